"""scikit-learn style wrapper: fit on (release, size) rows, transform to flow times."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import flow_stats, instance_from_arrays
from .engine import simulate
from .policies import make_policy


class FlowTimeScheduler(BaseEstimator, TransformerMixin):
    """Schedule jobs given as rows ``(release, size)`` and report per-job flow times.

    Row ``k`` of ``X`` becomes job ``k + 1``. ``transform`` returns the flow
    times in row order as an int64 column vector.
    """

    def __init__(self, policy="srpt", theta=None):
        self.policy = policy
        self.theta = theta

    def _instance(self, X):
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValueError(f"expected an (n, 2) array of release, size; got shape {X.shape}")
        if not np.issubdtype(X.dtype, np.integer):
            if not np.all(np.equal(np.mod(X, 1), 0)):
                raise ValueError("releases and sizes must be integers")
        return instance_from_arrays(X[:, 0].astype(int).tolist(), X[:, 1].astype(int).tolist())

    def fit(self, X, y=None):
        inst = self._instance(X)
        self.trace_ = simulate(inst, make_policy(self.policy, self.theta))
        self.stats_ = flow_stats(self.trace_)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "trace_")
        inst = self._instance(X)
        trace = self.trace_
        if inst != trace.instance:
            trace = simulate(inst, make_policy(self.policy, self.theta))
        flows = trace.flows
        return np.array([[flows[i]] for i in range(1, inst.n + 1)], dtype=np.int64)

    def score(self, X, y=None):
        """Negative l2 norm of flow time, so larger is better."""
        check_is_fitted(self, "trace_")
        return -float(np.sqrt(np.sum(self.transform(X).astype(float) ** 2)))
