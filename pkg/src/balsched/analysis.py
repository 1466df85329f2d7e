"""Busy-period partitioning, job-count estimate, OPT lower bound and BAL bookkeeping."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .core import Instance, SchedError, ScheduleTrace
from .engine import total_work_series

BIG_SEGMENT_MIN_JOBS = 11  # "more than ten jobs"


class NoBigSegment(SchedError):
    pass


class AnnotationsMissing(SchedError):
    pass


class MismatchedConfigs(SchedError):
    pass


@dataclass(frozen=True)
class Segment:
    start: int
    end: int  # first idle time after the busy period
    jobs: tuple[int, ...]

    def __len__(self):
        return len(self.jobs)


@dataclass(frozen=True)
class PartitionSummary:
    segments: tuple[Segment, ...]
    big_segments: tuple[Segment, ...]
    n_tilde: Fraction | None  # None when no segment has more than ten jobs

    def estimate(self, fallback: bool = True) -> Fraction:
        """The job-count estimate, or the largest segment's job count as a fallback."""
        if self.n_tilde is not None:
            return self.n_tilde
        if not fallback or not self.segments:
            raise NoBigSegment("no idle-free segment has more than ten jobs")
        return Fraction(max(len(s) for s in self.segments))


def partition_idle_free(instance: Instance) -> PartitionSummary:
    """Split an instance at the idle points of its (policy-free) total work curve."""
    q = total_work_series(instance).q
    by_release = defaultdict(list)
    for j in instance:
        by_release[j.release].append(j.id)
    segments = []
    start = None
    members: list[int] = []
    for t, v in enumerate(q):
        if v and start is None:
            start = t
            members = []
        if start is not None:
            members.extend(by_release.get(t, ()))
            if not v:
                segments.append(Segment(start, t, tuple(members)))
                start = None
    big = tuple(s for s in segments if len(s) >= BIG_SEGMENT_MIN_JOBS)
    n_tilde = Fraction(sum(len(s) for s in big), len(big)) if big else None
    return PartitionSummary(tuple(segments), big, n_tilde)


def opt_lower_bound(instance: Instance) -> int:
    """sum_t q(t), a lower bound on the optimal sum of squared flows."""
    return sum(total_work_series(instance).q)


@dataclass(frozen=True)
class LoadStats:
    rho: float
    P: float


def load_stats(instance: Instance, horizon: int | None = None) -> LoadStats:
    """Empirical load (mean size x arrival rate) and max/min size ratio."""
    sizes = [j.size for j in instance]
    if not sizes:
        raise ValueError("empty instance")
    span = horizon if horizon is not None else max(j.release for j in instance) + 1
    rate = len(sizes) / span
    return LoadStats(rho=sum(sizes) / len(sizes) * rate, P=max(sizes) / min(sizes))


# -- BAL annotations ---------------------------------------------------------

@dataclass(frozen=True)
class BalAnnotations:
    """Per-job starving/normal split of a BAL run.

    ``t_i[i]`` is the starving time of an FaS job and the completion time of an
    FaN job. ``u[t]`` is the number of starving tasks at time t.
    """

    fas: frozenset
    t_i: Mapping[int, int]
    gamma: Mapping[int, Fraction]
    norm: Mapping[int, int]
    starv: Mapping[int, int]
    u: tuple[int, ...]
    t_star: int

    def kind(self, i: int) -> str:
        return "FaS" if i in self.fas else "FaN"

    def u_at(self, t: int) -> int:
        return self.u[t] if 0 <= t < len(self.u) else 0


def bal_annotations(trace: ScheduleTrace) -> BalAnnotations:
    rec = trace.policy_record
    if not rec or rec.get("kind") != "bal":
        raise AnnotationsMissing("trace was not produced by a BAL policy")
    inst = trace.instance
    comps = trace.task_completions
    starving = rec["t_i"]
    t_i, norm, starv = {}, {}, {}
    diff = [0] * (trace.makespan + 2)
    for j in inst:
        c = comps[j.id][-1]
        ti = starving.get(j.id, c)
        t_i[j.id] = ti
        norm[j.id] = ti - j.release
        starv[j.id] = c - ti
        if j.id in starving:
            diff[ti] += trace.remaining(ti, j.id)
            for ck in comps[j.id]:
                if ck > ti:
                    diff[ck] -= 1
    u = []
    acc = 0
    for d in diff:
        acc += d
        u.append(acc)
    while len(u) > 1 and u[-1] == 0:
        u.pop()
    t_star = max(range(len(u)), key=lambda t: (u[t], -t))
    return BalAnnotations(
        fas=frozenset(starving),
        t_i=t_i,
        gamma=dict(rec["gamma"]),
        norm=norm,
        starv=starv,
        u=tuple(u),
        t_star=t_star,
    )


def decompose(trace: ScheduleTrace, ann: BalAnnotations | None = None) -> tuple[int, int]:
    """(sum of norm_i^2, sum of starv_i^2) for a BAL run."""
    if ann is None:
        ann = bal_annotations(trace)
    return (
        sum(v * v for v in ann.norm.values()),
        sum(v * v for v in ann.starv.values()),
    )


# -- ratio tables ------------------------------------------------------------

def sqrt_ratio(F_num: int, F_den: int) -> float:
    if F_den == 0:
        return 1.0 if F_num == 0 else math.inf
    return math.sqrt(F_num / F_den)


@dataclass(frozen=True)
class RunResult:
    """Sum of squared flows per policy label for one (H, lambda, seed) cell."""

    h_index: int
    lambda_inv: float
    seed: int
    F: Mapping[str, int]


def ratio_table(
    results: Iterable[RunResult],
    variants: Iterable[str],
    baselines: Iterable[str] = ("srpt", "fcfs", "rr"),
) -> dict[tuple, float]:
    """Mean over seeds of sqrt(F_variant / F_baseline).

    Keys are ``(lambda_inv, h_index, variant, baseline)``. Every cell must have
    the same set of seeds and every run must report each variant and baseline.
    """
    variants = list(variants)
    baselines = list(baselines)
    cells: dict[tuple, list[RunResult]] = defaultdict(list)
    for r in results:
        missing = [k for k in variants + baselines if k not in r.F]
        if missing:
            raise MismatchedConfigs(
                f"run h={r.h_index} lambda={r.lambda_inv} seed={r.seed} lacks {missing}"
            )
        cells[(r.lambda_inv, r.h_index)].append(r)
    seed_sets = {tuple(sorted(r.seed for r in runs)) for runs in cells.values()}
    if len(seed_sets) > 1:
        raise MismatchedConfigs("cells were run with different seed sets")
    table = {}
    for (lam, h), runs in sorted(cells.items()):
        for v in variants:
            for b in baselines:
                vals = [sqrt_ratio(r.F[v], r.F[b]) for r in runs]
                table[(lam, h, v, b)] = sum(vals) / len(vals)
    return table
