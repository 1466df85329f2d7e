"""Exhaustive search over work-conserving schedules for tiny instances."""
from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Instance, SchedError, ScheduleTrace, validate_instance
from .engine import Policy, simulate


class TooLarge(SchedError):
    pass


@dataclass(frozen=True)
class OracleLimit:
    max_jobs: int = 6
    max_total_work: int = 16
    max_horizon: int = 64  # last release + total work

    def check(self, instance: Instance) -> None:
        horizon = max(j.release for j in instance) + instance.total_work
        if (
            instance.n > self.max_jobs
            or instance.total_work > self.max_total_work
            or horizon > self.max_horizon
        ):
            raise TooLarge(
                f"n={instance.n}, work={instance.total_work}, horizon={horizon} "
                f"exceeds {self}"
            )


DEFAULT_LIMIT = OracleLimit()


def _square(flow, acc):
    return flow * flow + acc


def _sum(flow, acc):
    return flow + acc


def _max(flow, acc):
    return flow if flow > acc else acc


_OBJECTIVES = {"F": _square, "sum": _sum, "max": _max}


class _Search:
    """Memoised DFS; a state is (time, sorted (remaining, release) of active jobs, next index)."""

    def __init__(self, instance: Instance, objective: str):
        self.jobs = [(j.release, j.size) for j in instance.jobs]
        self.combine = _OBJECTIVES[objective]
        self.best = lru_cache(maxsize=None)(self._best)

    def _advance(self, t, active, nxt):
        jobs = self.jobs
        if not active and nxt < len(jobs):
            t = max(t, jobs[nxt][0])
        added = list(active)
        while nxt < len(jobs) and jobs[nxt][0] <= t:
            r, p = jobs[nxt]
            added.append((p, r))
            nxt += 1
        return t, tuple(sorted(added)), nxt

    def choices(self, t, active, nxt):
        """Yield (choice index, next state, flow of job completed in this slot or None)."""
        seen = set()
        for idx, (rem, rel) in enumerate(active):
            if (rem, rel) in seen:
                continue
            seen.add((rem, rel))
            rest = list(active)
            if rem == 1:
                del rest[idx]
                done = t + 1 - rel
            else:
                rest[idx] = (rem - 1, rel)
                done = None
            yield idx, self._advance(t + 1, tuple(sorted(rest)), nxt), done

    def _best(self, t, active, nxt):
        if not active:
            return 0
        best = None
        for _, state, done in self.choices(t, active, nxt):
            rest = self.best(*state)
            value = rest if done is None else self.combine(done, rest)
            if best is None or value < best:
                best = value
        return best

    def solve(self):
        start = self._advance(0, (), 0)
        return start, self.best(*start)


def _solve(instance: Instance, objective: str, limit: OracleLimit):
    limit.check(instance)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10_000))
    try:
        search = _Search(instance, objective)
        start, value = search.solve()
    finally:
        sys.setrecursionlimit(old)
    return search, start, value


class ScriptedPolicy(Policy):
    """Replays a fixed list of job ids, one per busy slot."""

    name = "scripted"

    def __init__(self, order):
        self.order = list(order)

    def start(self, instance):
        self.pos = 0

    def decide(self, state):
        i = self.order[self.pos]
        self.pos += 1
        return i


def _witness(instance: Instance, search: _Search, start) -> ScheduleTrace:
    """Follow optimal choices and map each (remaining, release) pick back to a job id."""
    remaining = {}
    order = []
    t, active, nxt = start
    jobs = instance.jobs
    released = 0
    while active:
        while released < len(jobs) and jobs[released].release <= t:
            remaining[jobs[released].id] = jobs[released].size
            released += 1
        target = search.best(t, active, nxt)
        for idx, state, done in search.choices(t, active, nxt):
            rest = search.best(*state)
            value = rest if done is None else search.combine(done, rest)
            if value == target:
                rem, rel = active[idx]
                job_id = min(
                    j.id for j in jobs
                    if remaining.get(j.id) == rem and j.release == rel
                )
                remaining[job_id] -= 1
                order.append(job_id)
                t, active, nxt = state
                break
        else:  # pragma: no cover - memo is consistent by construction
            raise AssertionError("no optimal choice found")
    return simulate(instance, ScriptedPolicy(order))


def min_F(instance: Instance, limit: OracleLimit = DEFAULT_LIMIT) -> tuple[int, ScheduleTrace]:
    """Exact minimum sum of squared flows and one optimal schedule."""
    search, start, value = _solve(instance, "F", limit)
    return value, _witness(instance, search, start)


def min_total_flow(instance: Instance, limit: OracleLimit = DEFAULT_LIMIT) -> int:
    return _solve(instance, "sum", limit)[2]


def min_max_flow(instance: Instance, limit: OracleLimit = DEFAULT_LIMIT) -> int:
    return _solve(instance, "max", limit)[2]


class RandomPolicy(Policy):
    """Uniformly random active job in every busy slot."""

    name = "random"

    def __init__(self, rng=None):
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def decide(self, state):
        active = sorted(state.active)
        return active[int(self.rng.integers(len(active)))]


def random_work_conserving(instance: Instance, rng=None) -> ScheduleTrace:
    return simulate(instance, RandomPolicy(rng))


def random_instance(rng, max_jobs=5, max_work=12, max_release=6, max_size=None) -> Instance:
    """Small random instance with at most ``max_jobs`` jobs and ``max_work`` total work."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n = int(rng.integers(1, max_jobs + 1))
    budget = max_work
    rows = []
    for i in range(1, n + 1):
        left = n - i  # keep at least one unit for each later job
        cap = budget - left
        if max_size is not None:
            cap = min(cap, max_size)
        size = int(rng.integers(1, cap + 1))
        budget -= size
        rows.append((i, int(rng.integers(0, max_release + 1)), size))
    rows.sort(key=lambda r: (r[1], r[0]))
    # renumber in arrival order so ids follow releases
    return validate_instance([(k + 1, r, p) for k, (_, r, p) in enumerate(rows)])
