"""Jobs, instances, schedule traces and flow-time metrics."""
from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class SchedError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstance(SchedError, ValueError):
    pass


class DuplicateId(InvalidInstance):
    pass


class NonPositiveSize(InvalidInstance):
    pass


class NegativeRelease(InvalidInstance):
    pass


class IncompleteTrace(SchedError):
    pass


@dataclass(frozen=True, order=True)
class JobSpec:
    id: int
    release: int
    size: int


@dataclass(frozen=True)
class Instance:
    """A validated job set. Build it with :func:`validate_instance`."""

    jobs: tuple[JobSpec, ...]
    _by_id: tuple[JobSpec, ...] = field(repr=False, compare=False, default=())

    def __post_init__(self):
        if not self._by_id:
            by_id = [None] * (len(self.jobs) + 1)
            for job in self.jobs:
                by_id[job.id] = job
            object.__setattr__(self, "_by_id", tuple(by_id))

    @property
    def n(self) -> int:
        return len(self.jobs)

    def __len__(self):
        return len(self.jobs)

    def __iter__(self):
        return iter(self.jobs)

    def job(self, job_id: int) -> JobSpec:
        return self._by_id[job_id]

    @property
    def total_work(self) -> int:
        return sum(j.size for j in self.jobs)

    @property
    def ids(self) -> list[int]:
        return [j.id for j in self.jobs]


def _as_int(value, what):
    if isinstance(value, bool):
        raise InvalidInstance(f"{what} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    try:
        import numpy as np

        if isinstance(value, np.integer):
            return int(value)
    except ImportError:  # pragma: no cover
        pass
    raise InvalidInstance(f"{what} must be an integer, got {value!r}")


def validate_instance(raw: Iterable[JobSpec | tuple], allow_empty: bool = False) -> Instance:
    """Check a raw job list and return a sorted :class:`Instance`.

    Entries may be :class:`JobSpec` objects or ``(id, release, size)`` tuples.
    Ids must be unique and form ``1..n``.
    """
    jobs = []
    seen = set()
    for item in raw:
        if isinstance(item, JobSpec):
            jid, rel, size = item.id, item.release, item.size
        else:
            jid, rel, size = item
        jid = _as_int(jid, "id")
        rel = _as_int(rel, "release")
        size = _as_int(size, "size")
        if jid in seen:
            raise DuplicateId(f"job id {jid} appears more than once")
        seen.add(jid)
        if size < 1:
            raise NonPositiveSize(f"job {jid} has size {size}")
        if rel < 0:
            raise NegativeRelease(f"job {jid} has release {rel}")
        jobs.append(JobSpec(jid, rel, size))
    if not jobs and not allow_empty:
        raise InvalidInstance("instance has no jobs")
    if seen != set(range(1, len(jobs) + 1)):
        raise InvalidInstance("job ids must be exactly 1..n")
    jobs.sort(key=lambda j: (j.release, j.id))
    return Instance(tuple(jobs))


def instance_from_arrays(releases: Sequence[int], sizes: Sequence[int]) -> Instance:
    """Number jobs 1..n in the given order."""
    return validate_instance(
        [(i + 1, r, p) for i, (r, p) in enumerate(zip(releases, sizes))]
    )


@dataclass
class ScheduleTrace:
    """Slot-by-slot record of one complete schedule.

    ``slots[t]`` is the id of the job run in slot ``[t]`` or 0 when idle.
    ``task_completions[i]`` lists ``c_{i,1} < ... < c_{i,p_i}``.
    """

    instance: Instance
    slots: list[int]
    task_completions: dict[int, list[int]]
    policy_name: str = ""
    policy_record: dict | None = None

    @property
    def completions(self) -> dict[int, int]:
        return {i: c[-1] for i, c in self.task_completions.items() if c}

    @property
    def flows(self) -> dict[int, int]:
        inst = self.instance
        return {
            i: c[-1] - inst.job(i).release
            for i, c in self.task_completions.items()
            if c and len(c) == inst.job(i).size
        }

    @property
    def makespan(self) -> int:
        return len(self.slots)

    def is_complete(self) -> bool:
        return all(
            len(self.task_completions.get(j.id, ())) == j.size for j in self.instance
        )

    def task_at(self, t: int) -> tuple[int, int] | None:
        """(job id, task index) executed in slot ``[t]``, or None."""
        if t < 0 or t >= len(self.slots) or self.slots[t] == 0:
            return None
        i = self.slots[t]
        return i, bisect_right(self.task_completions[i], t + 1)

    def remaining(self, t: int, job_id: int) -> int:
        """q_{t,S}(i): tasks of job i still to run at time t, 0 if inactive."""
        job = self.instance.job(job_id)
        if t < job.release:
            return 0
        done = bisect_right(self.task_completions.get(job_id, []), t)
        return job.size - done

    def remaining_map(self, t: int) -> dict[int, int]:
        return {j.id: self.remaining(t, j.id) for j in self.instance}

    def remaining_profile(self):
        """Callable ``(t, i) -> q_{t,S}(i)``."""
        return self.remaining

    def busy_slots(self):
        for t, i in enumerate(self.slots):
            if i:
                yield t, i, bisect_right(self.task_completions[i], t + 1)


@dataclass(frozen=True)
class FlowStats:
    l1: int
    l2: float
    linf: int
    F: int


def stats_from_flows(flows: Iterable[int]) -> FlowStats:
    flows = [int(f) for f in flows]
    F = sum(f * f for f in flows)
    return FlowStats(
        l1=sum(flows),
        l2=math.sqrt(F),
        linf=max(flows, default=0),
        F=F,
    )


def flow_stats(trace: ScheduleTrace) -> FlowStats:
    if not trace.is_complete():
        raise IncompleteTrace("some jobs are unfinished in this trace")
    return stats_from_flows(trace.flows.values())


# -- file formats ------------------------------------------------------------

def write_instance(instance: Instance, path: str | Path | None = None) -> str:
    """Header-less CSV ``id,release,size``; returns the text written."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for j in instance:
        w.writerow((j.id, j.release, j.size))
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_instance(text: str, allow_empty: bool = False) -> Instance:
    rows = []
    for line_no, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 3:
            raise InvalidInstance(f"line {line_no}: expected id,release,size")
        try:
            rows.append(tuple(int(x) for x in row))
        except ValueError as exc:
            raise InvalidInstance(f"line {line_no}: {exc}") from None
    return validate_instance(rows, allow_empty=allow_empty)


def read_instance(path: str | Path, allow_empty: bool = False) -> Instance:
    return parse_instance(Path(path).read_text(), allow_empty)


def write_trace(trace: ScheduleTrace, path: str | Path | None = None) -> str:
    """CSV ``t,job_id,task_index`` for busy slots only."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for t, i, k in trace.busy_slots():
        w.writerow((t, i, k))
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_trace(instance: Instance, text: str) -> ScheduleTrace:
    """Rebuild a trace from the CSV produced by :func:`write_trace`."""
    entries = sorted(tuple(int(x) for x in row) for row in csv.reader(io.StringIO(text)) if row)
    end = entries[-1][0] + 1 if entries else 0
    slots = [0] * end
    comps: dict[int, list[int]] = {j.id: [] for j in instance}
    for t, i, k in entries:
        if k != len(comps[i]) + 1:
            raise ValueError(f"slot {t}: job {i} task {k} out of order")
        slots[t] = i
        comps[i].append(t + 1)
    return ScheduleTrace(instance, slots, comps)


def read_trace(instance: Instance, path: str | Path) -> ScheduleTrace:
    return parse_trace(instance, Path(path).read_text())
