"""Randomised property suites run by ``balsched verify``.

Each suite returns a :class:`SuiteReport`; failures carry the offending
instance as CSV text so they can be replayed with ``balsched simulate``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analysis import bal_annotations, opt_lower_bound
from .core import flow_stats, write_instance
from .engine import check_trace, simulate, total_work_series
from .maps import (
    build_h_prime,
    dominates,
    hat_q,
    majorizes,
    proper_reduction,
    reduce_proper,
    reduction_holds,
    square_sum,
    total,
    truncate,
)
from .oracle import OracleLimit, min_F, min_max_flow, min_total_flow, random_instance, random_work_conserving
from .policies import Threshold, bal, fcfs, srpt

MAX_REPORTED = 5
DEFAULT_SEED = 12345
# thresholds exercised by the crossing-property check
CROSSING_THETAS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(4))


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    n_failures: int = 0

    @property
    def ok(self) -> bool:
        return self.n_failures == 0

    def fail(self, what: str, instance=None) -> None:
        self.n_failures += 1
        if len(self.failures) < MAX_REPORTED:
            if instance is not None:
                what = f"{what}\ninstance:\n{write_instance(instance)}"
            self.failures.append(what)

    def summary(self) -> str:
        status = "pass" if self.ok else "FAIL"
        return f"{self.name}: {status} ({self.checked} checks, {self.n_failures} failures)"


def _rng(seed):
    return np.random.default_rng(seed)


# -- oracle ------------------------------------------------------------------

def suite_oracle(n_instances=200, seed=DEFAULT_SEED) -> SuiteReport:
    """SRPT attains min total flow, FCFS attains min max flow, sum q(t) <= min F."""
    rep = SuiteReport("oracle")
    rng = _rng(seed)
    for _ in range(n_instances):
        inst = random_instance(rng, max_jobs=5, max_work=12)
        total_opt = min_total_flow(inst)
        max_opt = min_max_flow(inst)
        F_opt, witness = min_F(inst)
        got_total = flow_stats(simulate(inst, srpt())).l1
        got_max = flow_stats(simulate(inst, fcfs())).linf
        lb = opt_lower_bound(inst)
        rep.checked += 1
        if got_total != total_opt:
            rep.fail(f"SRPT total flow {got_total} != optimum {total_opt}", inst)
        if got_max != max_opt:
            rep.fail(f"FCFS max flow {got_max} != optimum {max_opt}", inst)
        if lb > F_opt:
            rep.fail(f"lower bound {lb} > min F {F_opt}", inst)
        if flow_stats(witness).F != F_opt:
            rep.fail("witness schedule does not attain min F", inst)
    return rep


# -- BAL endpoints and crossing property -------------------------------------

def equiv_instance(rng):
    return random_instance(rng, max_jobs=20, max_work=120, max_release=40, max_size=10)


def crossing_violations(trace, theta: Threshold) -> list[str]:
    """FaS jobs must starve at the first slot crossing theta; norm + starv must equal flow."""
    ann = bal_annotations(trace)
    flows = trace.flows
    out = []
    for j in trace.instance:
        i = j.id
        if ann.norm[i] + ann.starv[i] != flows[i]:
            out.append(f"job {i}: norm + starv != flow")
        if i not in ann.fas:
            continue
        ti = ann.t_i[i]
        for t in range(j.release, ti + 1):
            hit = theta.crossed(t - j.release, trace.remaining(t, i))
            if hit != (t == ti):
                out.append(f"job {i}: threshold test at t={t} is {hit}, t_i={ti}")
                break
        if ann.gamma[i] != Fraction(ti - j.release, trace.remaining(ti, i)):
            out.append(f"job {i}: gamma mismatch")
    return out


def suite_bal_equiv(n_instances=1000, seed=DEFAULT_SEED, thetas=CROSSING_THETAS) -> SuiteReport:
    """BAL(inf) == SRPT slot for slot; BAL(0) flows == FCFS flows; FaS crossing property."""
    rep = SuiteReport("bal_equiv")
    rng = _rng(seed)
    for _ in range(n_instances):
        inst = equiv_instance(rng)
        s = simulate(inst, srpt())
        b_inf = simulate(inst, bal(math.inf))
        f = simulate(inst, fcfs())
        b_zero = simulate(inst, bal(0))
        rep.checked += 1
        if b_inf.slots != s.slots:
            rep.fail("BAL(inf) schedule differs from SRPT", inst)
        if sorted(b_zero.flows.values()) != sorted(f.flows.values()):
            rep.fail("BAL(0) flow multiset differs from FCFS", inst)
        for th in thetas:
            theta = Threshold(th)
            tr = b_zero if th == 0 else simulate(inst, bal(theta))
            check_trace(tr)
            for msg in crossing_violations(tr, theta):
                rep.fail(f"theta={th}: {msg}", inst)
    return rep


# -- majorization of SRPT -----------------------------------------------------

def suite_majorization(n_instances=500, schedules=20, seed=DEFAULT_SEED) -> SuiteReport:
    """q_t under SRPT majorizes q_t under random work-conserving schedules at every t."""
    rep = SuiteReport("majorization")
    rng = _rng(seed)
    for _ in range(n_instances):
        inst = random_instance(rng, max_jobs=12, max_work=80, max_release=30, max_size=12)
        s = simulate(inst, srpt())
        horizon = s.makespan + 1
        q_srpt = [s.remaining_map(t) for t in range(horizon)]
        for _ in range(schedules):
            other = random_work_conserving(inst, rng)
            rep.checked += 1
            for t in range(horizon):
                if not majorizes(q_srpt[t], other.remaining_map(t)):
                    rep.fail(f"SRPT does not majorize a random schedule at t={t}", inst)
                    break
    return rep


# -- maps --------------------------------------------------------------------

def truncation_example() -> tuple[dict, dict]:
    f = {i: 10 * i for i in range(1, 11)}
    expected = dict.fromkeys(f, 0)
    expected.update({10: 100, 9: 90, 8: 80, 7: 30})
    return truncate(f, 300), expected


def staircase_example():
    """A reconstructed (f, f', g) whose second branch needs three rounds.

    I_2 = {a1, a2, a8}; rounds cover g positions [1,3], [4,6] and [8,9],
    each with f'(a)/2 <= S_{x,y}(g) < f'(a).
    """
    f = dict(zip(range(1, 9), (10, 10, 5, 5, 5, 5, 5, 5)))
    f_prime = dict(zip(range(1, 9), (10, 10, 2, 2, 2, 2, 2, 5)))
    g = {k: 2 for k in range(1, 26)}
    return f, g, f_prime


def random_triple(rng):
    """(f, g, f') with f majorizing g (by balancing moves) and f' dominated by f."""
    m = int(rng.integers(1, 9))
    f = {k: int(rng.integers(0, 21)) for k in range(1, m + 1)}
    vals = list(f.values()) + [0] * int(rng.integers(0, 4))
    for _ in range(int(rng.integers(0, 3 * len(vals) + 1))):
        i, j = (int(v) for v in rng.integers(0, len(vals), size=2))
        if vals[i] >= vals[j] + 2:
            vals[i] -= 1
            vals[j] += 1
    rng.shuffle(vals)
    g = {100 + k: int(v) for k, v in enumerate(vals)}
    f_prime = {k: int(rng.integers(0, v + 1)) for k, v in f.items()}
    return f, g, f_prime


def starving_bal_run(rng, max_jobs=15, theta=1, limit=None):
    """A random BAL run with at least one starving task, or None if this draw has none."""
    if limit is None:
        inst = random_instance(rng, max_jobs=max_jobs, max_work=8 * max_jobs, max_release=20, max_size=10)
    else:
        inst = random_instance(
            rng, max_jobs=limit.max_jobs, max_work=limit.max_total_work, max_release=6
        )
    tr = simulate(inst, bal(theta))
    ann = bal_annotations(tr)
    if ann.u_at(ann.t_star) == 0:
        return None
    return tr, ann


def suite_maps(n_triples=1000, n_bal_runs=1000, n_chain=200, seed=DEFAULT_SEED) -> SuiteReport:
    rep = SuiteReport("maps")
    rng = _rng(seed)

    got, expected = truncation_example()
    rep.checked += 1
    if got != expected:
        rep.fail(f"truncation example gave {got}")

    f, g, fp = staircase_example()
    red = proper_reduction(f, g, fp)
    rep.checked += 1
    if red.I2 != [1, 2, 8] or red.rounds != [(1, 1, 3), (2, 4, 6), (8, 8, 9)]:
        rep.fail(f"staircase example: I2={red.I2}, rounds={red.rounds}")
    b = sorted(g, key=lambda k: (-g[k], k))
    for kap, x, y in red.rounds:
        seg = sum(g[b[p - 1]] for p in range(x, y + 1))
        if not (fp[kap] <= 2 * seg and seg < fp[kap]):
            rep.fail(f"staircase round {(kap, x, y)} not bracketed")

    for _ in range(n_triples):
        f, g, fp = random_triple(rng)
        rep.checked += 1
        if total(f):
            c = int(rng.integers(1, total(f) + 1))
            tr = truncate(f, c)
            if total(tr) != c or not dominates(f, tr):
                rep.fail(f"truncation facts fail for f={f}, c={c}")
        gp = reduce_proper(f, g, fp)
        if not reduction_holds(g, fp, gp):
            rep.fail(f"reduction contract fails for f={f}, g={g}, f'={fp} -> {gp}")

    found = attempts = 0
    while found < n_bal_runs and attempts < 20 * n_bal_runs:
        attempts += 1
        run = starving_bal_run(rng)
        if run is None:
            continue
        found += 1
        tr, ann = run
        inst = tr.instance
        rep.checked += 1
        r = build_h_prime(tr, ann)
        if not r.ok:
            rep.fail(
                f"h' bounds fail: S={r.sum} u*={r.u_star} S2={r.sum_sq} bound={r.bound_sq}", inst
            )
        s = simulate(inst, srpt())
        for t in range(tr.makespan + 1):
            if not dominates(hat_q(tr, t, ann), s.remaining_map(t)):
                rep.fail(f"q-hat does not dominate SRPT at t={t}", inst)
                break
    if found < n_bal_runs:
        rep.fail(f"only {found} of {n_bal_runs} BAL runs had starving tasks")

    limit = OracleLimit()
    found = attempts = 0
    while found < n_chain and attempts < 50 * n_chain:
        attempts += 1
        run = starving_bal_run(rng, limit=limit)
        if run is None:
            continue
        found += 1
        tr, ann = run
        rep.checked += 1
        for msg in chain_violations(tr, ann):
            rep.fail(msg, tr.instance)
    if found < n_chain:
        rep.fail(f"only {found} of {n_chain} oracle-scale BAL runs had starving tasks")
    return rep


def chain_violations(tr, ann) -> list[str]:
    """Carry h' through SRPT to an optimal schedule; check the 1/16 and squared-sum bounds."""
    inst = tr.instance
    r = build_h_prime(tr, ann)
    t = r.t_star
    q_srpt = simulate(inst, srpt()).remaining_map(t)
    _, opt = min_F(inst)
    q_opt = opt.remaining_map(t)
    out = []
    if total(q_srpt) != total_work_series(inst)(t):
        out.append("SRPT total work differs from q(t*)")
    if not majorizes(r.h, q_srpt):
        out.append("h does not majorize q_SRPT at t*")
        return out
    g1 = reduce_proper(r.h, q_srpt, r.h_prime)
    g2 = reduce_proper(q_srpt, q_opt, g1)
    if 16 * total(g2) < r.u_star:
        out.append(f"chain mass {total(g2)} < u*/16 with u*={r.u_star}")
    if square_sum(g2) > r.bound_sq:
        out.append(f"chain squared sum {square_sum(g2)} > {r.bound_sq}")
    return out


SUITES = {
    "oracle": suite_oracle,
    "bal_equiv": suite_bal_equiv,
    "majorization": suite_majorization,
    "maps": suite_maps,
}


def run_suites(name: str, seed=DEFAULT_SEED) -> list[SuiteReport]:
    if name == "all":
        return [fn(seed=seed) for fn in SUITES.values()]
    if name not in SUITES:
        raise KeyError(name)
    return [SUITES[name](seed=seed)]
