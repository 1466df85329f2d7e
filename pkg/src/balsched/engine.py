"""Slotted single-machine simulation loop."""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import Instance, JobSpec, SchedError, ScheduleTrace


class PolicyChoseInactiveJob(SchedError):
    pass


@dataclass
class SimState:
    """Read view handed to a policy once per busy slot.

    ``arrivals`` holds the jobs released exactly at ``now``; they are already
    included in ``active`` and ``remaining``.
    """

    instance: Instance
    now: int = 0
    active: set = field(default_factory=set)
    remaining: dict = field(default_factory=dict)
    executed: dict = field(default_factory=dict)
    arrivals: tuple = ()
    released_work: int = 0


class Policy:
    """Base class for scheduling rules.

    ``decide`` is called for every slot in which at least one job is active and
    must return the id of an active job. The engine runs the next task of that
    job. Slots with no active job are skipped without consulting the policy, so
    policies see time jump across idle gaps.
    """

    name = "policy"

    def start(self, instance: Instance) -> None:
        pass

    def decide(self, state: SimState) -> int:
        raise NotImplementedError

    def record(self) -> dict | None:
        """Policy-specific data to attach to the finished trace."""
        return None

    def __repr__(self):
        return f"{type(self).__name__}()"


def simulate(instance: Instance, policy: Policy) -> ScheduleTrace:
    """Run ``policy`` on ``instance`` until every job completes."""
    jobs = instance.jobs
    n = len(jobs)
    state = SimState(instance)
    active = state.active
    remaining = state.remaining
    executed = state.executed
    comps: dict[int, list[int]] = {j.id: [] for j in jobs}
    slots: list[int] = []
    policy.start(instance)
    decide = policy.decide

    ptr = 0
    t = 0
    no_arrivals: tuple[JobSpec, ...] = ()
    while ptr < n or active:
        if not active:
            nxt = jobs[ptr].release
            if nxt > t:
                slots.extend([0] * (nxt - t))
                t = nxt
        if ptr < n and jobs[ptr].release <= t:
            start = ptr
            while ptr < n and jobs[ptr].release <= t:
                j = jobs[ptr]
                active.add(j.id)
                remaining[j.id] = j.size
                executed[j.id] = 0
                state.released_work += j.size
                ptr += 1
            state.arrivals = jobs[start:ptr]
        else:
            state.arrivals = no_arrivals
        state.now = t
        i = decide(state)
        if i not in active:
            raise PolicyChoseInactiveJob(
                f"{policy!r} chose {i!r} at t={t}; active={sorted(active)}"
            )
        slots.append(i)
        executed[i] += 1
        comps[i].append(t + 1)
        left = remaining[i] - 1
        remaining[i] = left
        if left == 0:
            active.discard(i)
        t += 1

    return ScheduleTrace(
        instance, slots, comps, policy_name=policy.name, policy_record=policy.record()
    )


@dataclass(frozen=True)
class TotalWorkSeries:
    """q(t) for t = 0..len-1; q(t) = 0 for every later t."""

    q: tuple[int, ...]

    def __call__(self, t: int) -> int:
        return self.q[t] if 0 <= t < len(self.q) else 0

    def __len__(self):
        return len(self.q)

    def __iter__(self):
        return iter(self.q)


def total_work_series(instance: Instance) -> TotalWorkSeries:
    """Total remaining tasks at each time under any work-conserving schedule."""
    jobs = instance.jobs
    if not jobs:
        return TotalWorkSeries((0,))
    end = max(j.release for j in jobs) + instance.total_work + 1
    arriving = [0] * end
    for j in jobs:
        arriving[j.release] += j.size
    out = []
    q = 0
    last_busy = 0
    for t in range(end):
        q += arriving[t]
        out.append(q)
        if q:
            last_busy = t
            q -= 1
    return TotalWorkSeries(tuple(out[: last_busy + 2]))


def check_trace(trace: ScheduleTrace) -> None:
    """Assert the structural invariants of a complete work-conserving trace."""
    inst = trace.instance
    done = {j.id: 0 for j in inst}
    comps = {j.id: [] for j in inst}
    series = total_work_series(inst)
    for t, i in enumerate(trace.slots):
        if i == 0:
            if series(t) != 0:
                raise AssertionError(f"idle at t={t} while q(t)={series(t)}")
            continue
        job = inst.job(i)
        if t < job.release:
            raise AssertionError(f"job {i} ran at t={t} before release {job.release}")
        done[i] += 1
        if done[i] > job.size:
            raise AssertionError(f"job {i} ran more than {job.size} tasks")
        comps[i].append(t + 1)
    for j in inst:
        if done[j.id] != j.size:
            raise AssertionError(f"job {j.id} incomplete")
        if comps[j.id] != list(trace.task_completions[j.id]):
            raise AssertionError(f"job {j.id}: completions do not match slots")
