"""Random Poisson / bounded-Pareto workloads and the named adversarial instances.

Random draws use numpy's PCG64 generator (``numpy.random.default_rng``).
For a fixed seed the draw order is: interarrival gaps in blocks of
``ceil(1.25 * T / lambda_inv) + 16`` exponentials until the accumulated
release passes ``T``, then one uniform per kept job for its size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, SchedError, validate_instance

# (L, H) pairs giving mean job size 30 with shape 1.1
PARETO_PAIRS = (
    (16.772, 2**6),
    (7.918, 2**9),
    (5.649, 2**12),
    (4.639, 2**15),
    (4.073, 2**18),
)
DEFAULT_SHAPE = 1.1


class NonPositiveInput(SchedError, ValueError):
    pass


@dataclass(frozen=True)
class WorkloadConfig:
    lambda_inv: float
    horizon: int
    low: float
    high: float
    shape: float = DEFAULT_SHAPE
    seed: int | None = None

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise ValueError("need 0 < low < high")
        if self.shape <= 0:
            raise ValueError("shape must be positive")
        if self.lambda_inv <= 0:
            raise ValueError("lambda_inv must be positive")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")


def round_positive(x: float) -> int:
    """Round a positive real to an integer >= 1: (0,1) goes up to 1, else floor."""
    if not x > 0:
        raise NonPositiveInput(f"expected a positive number, got {x!r}")
    return 1 if x < 1 else math.floor(x)


def _round_positive_array(x: np.ndarray) -> np.ndarray:
    if np.any(~(x > 0)):
        raise NonPositiveInput("expected positive numbers")
    return np.where(x < 1, 1, np.floor(x)).astype(np.int64)


def bounded_pareto_quantile(u, low, high, shape=DEFAULT_SHAPE):
    """Inverse CDF of the bounded Pareto law on [low, high]."""
    u = np.asarray(u, dtype=float)
    return low * (1.0 - u * (1.0 - (low / high) ** shape)) ** (-1.0 / shape)


def bounded_pareto_mean(low, high, shape=DEFAULT_SHAPE) -> float:
    """Closed-form mean of the bounded Pareto law (shape != 1)."""
    a = shape
    norm = 1.0 - (low / high) ** a
    return a * low**a * (low ** (1 - a) - high ** (1 - a)) / ((a - 1) * norm)


def sample_pareto_raw(cfg: WorkloadConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    """Pre-rounding bounded-Pareto samples."""
    return bounded_pareto_quantile(rng.random(size), cfg.low, cfg.high, cfg.shape)


def sample_bounded_pareto(cfg: WorkloadConfig, rng: np.random.Generator) -> int:
    x = float(bounded_pareto_quantile(rng.random(), cfg.low, cfg.high, cfg.shape))
    return round_positive(x)


def _rng(cfg: WorkloadConfig, rng):
    if rng is None:
        return np.random.default_rng(cfg.seed)
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def gen_poisson_instance(cfg: WorkloadConfig, rng=None) -> Instance:
    """Jobs arriving in [0, T] with rounded exponential gaps and bounded-Pareto sizes."""
    rng = _rng(cfg, rng)
    T = cfg.horizon
    block = math.ceil(1.25 * T / cfg.lambda_inv) + 16
    releases = []
    t = 0
    while t <= T:
        gaps = _round_positive_array(rng.exponential(cfg.lambda_inv, size=block))
        acc = t + np.cumsum(gaps)
        keep = acc[acc <= T]
        releases.append(keep)
        t = int(acc[-1])
    rel = np.concatenate(releases) if releases else np.zeros(0, dtype=np.int64)
    u = rng.random(len(rel))
    sizes = _round_positive_array(bounded_pareto_quantile(u, cfg.low, cfg.high, cfg.shape))
    return validate_instance(
        [(i + 1, int(r), int(p)) for i, (r, p) in enumerate(zip(rel, sizes))],
        allow_empty=True,
    )


# -- named instances ---------------------------------------------------------

def _check(cond, msg):
    if not cond:
        raise ValueError(msg)


def gen_fig1(n: int) -> Instance:
    """Two size-2 jobs at t=1 then unit jobs J_i at t=i (bad for SRPT)."""
    _check(n >= 3, "n must be >= 3")
    return validate_instance([(1, 1, 2), (2, 1, 2)] + [(i, i, 1) for i in range(3, n + 1)])


def gen_fig2(n: int) -> Instance:
    """Two size-n jobs at t=1 then unit jobs J_i at t=i (bad for FCFS)."""
    _check(n >= 3, "n must be >= 3")
    return validate_instance([(1, 1, n), (2, 1, n)] + [(i, i, 1) for i in range(3, n + 1)])


def gen_sjf_setf_lb(n: int) -> Instance:
    """p_i = n-i+1, r_1 = 1, r_i = r_{i-1} + p_{i-1} - 1."""
    _check(n >= 2, "n must be >= 2")
    jobs = []
    r = 1
    for i in range(1, n + 1):
        p = n - i + 1
        jobs.append((i, r, p))
        r = r + p - 1
    return validate_instance(jobs)


def gen_lb_pair(L: int) -> tuple[Instance, Instance]:
    """The two instances that agree before time L^5 (large, medium, then small jobs)."""
    _check(L >= 2, "L must be >= 2")
    L2, L3, L5 = L**2, L**3, L**5
    common = [(0, L3)] + [(m * L2, L2) for m in range(L3)]
    first = common + [(t, 1) for t in range(L5 + L3, 2 * L5 + L3)]
    second = common + [(t, 1) for t in range(L5, 2 * L5)]

    def build(rows):
        return validate_instance([(i + 1, r, p) for i, (r, p) in enumerate(rows)])

    return build(first), build(second)


def gen_priority_bad(k: int) -> Instance:
    """Classes C_0..C_k; C_h jobs have size 2^(k-h) and total work 5 * 2^k for h >= 1."""
    _check(k >= 2, "k must be >= 2")
    X = 5 * 2**k
    rows = [(0, 2**k), (0, 2**k)]
    first = 2**k
    for h in range(1, k + 1):
        size = 2 ** (k - h)
        rows.extend((first + m * size, size) for m in range(X // size))
        first += X
    return validate_instance([(i + 1, r, p) for i, (r, p) in enumerate(rows)])


def priority_bad_class(k: int, size: int) -> int:
    """Class index h of a job of the given size in ``gen_priority_bad(k)``."""
    return k - (size.bit_length() - 1)
