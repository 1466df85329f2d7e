"""Scheduling rules: SRPT, FCFS, RR, SJF, SETF, priority ratio and BAL."""
from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from heapq import heappop, heappush, heapreplace

from .core import SchedError
from .engine import Policy, SimState


class NormalModeEmpty(SchedError):
    pass


# -- starvation thresholds ---------------------------------------------------

class Threshold:
    """theta = base ** exponent with rational base and exponent, or +inf.

    ``crossed(age, q)`` decides ``age / q >= theta`` in exact integers: with
    ``exponent = a/d`` it compares ``age**d * den**a >= num**a * q**d``.
    """

    __slots__ = ("base", "exponent", "_num_a", "_den_a", "_d", "_approx")

    def __init__(self, base, exponent=1):
        self.base = None if base is None else Fraction(base)
        self.exponent = Fraction(exponent)
        if self.base is not None:
            if self.base < 0 or self.exponent < 0:
                raise ValueError("threshold must be nonnegative")
            a, d = self.exponent.numerator, self.exponent.denominator
            self._num_a = self.base.numerator ** a
            self._den_a = self.base.denominator ** a
            self._d = d
            self._approx = float(self.base) ** float(self.exponent)

    @classmethod
    def infinite(cls) -> "Threshold":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.base is None

    def crossed(self, age: int, q: int) -> bool:
        if self.base is None:
            return False
        d = self._d
        return age ** d * self._den_a >= self._num_a * q ** d

    def first_age(self, q: int) -> int | None:
        """Smallest integer age >= 0 with ``crossed(age, q)``; None for +inf."""
        if self.base is None:
            return None
        m = max(0, math.ceil(self._approx * q))
        while m > 0 and self.crossed(m - 1, q):
            m -= 1
        while not self.crossed(m, q):
            m += 1
        return m

    def __float__(self):
        return math.inf if self.base is None else self._approx

    def __eq__(self, other):
        if not isinstance(other, Threshold):
            return NotImplemented
        return (self.base, self.exponent) == (other.base, other.exponent)

    def __hash__(self):
        return hash((self.base, self.exponent))

    def __repr__(self):
        if self.base is None:
            return "Threshold(inf)"
        if self.exponent == 1:
            return f"Threshold({self.base})"
        return f"Threshold({self.base}**{self.exponent})"


def as_threshold(theta) -> Threshold:
    """Accept a Threshold, a number, ``math.inf`` or a string like '3/2' or 'inf'."""
    if isinstance(theta, Threshold):
        return theta
    if isinstance(theta, str):
        s = theta.strip().lower()
        if s in ("inf", "infinity", "+inf"):
            return Threshold.infinite()
        return Threshold(Fraction(s))
    if isinstance(theta, float) and math.isinf(theta):
        if theta < 0:
            raise ValueError("threshold must be nonnegative")
        return Threshold.infinite()
    return Threshold(Fraction(theta))


# -- simple policies ---------------------------------------------------------

class _SrptCore:
    """SRPT over its own copy of the job set; ties by (remaining, release, id)."""

    __slots__ = ("heap", "cur")

    def __init__(self):
        self.heap = []
        self.cur = None  # key of the job kept out of the heap while it runs

    def add(self, job):
        heappush(self.heap, (job.size, job.release, job.id))

    def step(self) -> int:
        cur = self.cur
        heap = self.heap
        if cur is None:
            cur = heappop(heap)
        elif heap and heap[0] < cur:
            cur = heapreplace(heap, cur)
        rem, rel, i = cur
        self.cur = (rem - 1, rel, i) if rem > 1 else None
        return i


class Srpt(Policy):
    name = "srpt"

    def start(self, instance):
        self.core = _SrptCore()

    def decide(self, state: SimState) -> int:
        core = self.core
        for j in state.arrivals:
            core.add(j)
        return core.step()


class Fcfs(Policy):
    """Non-preemptive; jobs run to completion in (release, id) order."""

    name = "fcfs"

    def start(self, instance):
        self.queue = deque()
        self.cur = None

    def decide(self, state):
        self.queue.extend(j.id for j in state.arrivals)
        cur = self.cur
        if cur is None or state.remaining[cur] == 0:
            cur = self.cur = self.queue.popleft()
        return cur


class RoundRobin(Policy):
    """Quantum-one FIFO cycling.

    The job served in the previous slot goes back to the tail before the jobs
    released at the current time are appended.
    """

    name = "rr"

    def start(self, instance):
        self.queue = deque()
        self.last = None

    def decide(self, state):
        q = self.queue
        last = self.last
        if last is not None and state.remaining[last] > 0:
            q.append(last)
        q.extend(j.id for j in state.arrivals)
        self.last = i = q.popleft()
        return i


class Sjf(Policy):
    """Preemptive smallest job size first; ties by smallest id."""

    name = "sjf"

    def start(self, instance):
        self.heap = []

    def decide(self, state):
        heap = self.heap
        for j in state.arrivals:
            heappush(heap, (j.size, j.id))
        while state.remaining[heap[0][1]] == 0:
            heappop(heap)
        return heap[0][1]


class Setf(Policy):
    """Least executed so far first; ties by smallest id."""

    name = "setf"

    def start(self, instance):
        self.heap = []
        self.last = None

    def decide(self, state):
        heap = self.heap
        last = self.last
        if last is not None and state.remaining[last] > 0:
            heappush(heap, (state.executed[last], last))
        for j in state.arrivals:
            heappush(heap, (0, j.id))
        _, i = heappop(heap)
        self.last = i
        return i


class PriorityRatio(Policy):
    """Largest (t - r_i) / remaining_i first, compared exactly; ties by smallest id."""

    name = "priority_ratio"

    def start(self, instance):
        self.instance = instance

    def decide(self, state):
        t = state.now
        rem = state.remaining
        job = self.instance.job
        best = None
        best_num = best_den = 0
        for i in state.active:
            num = t - job(i).release
            den = rem[i]
            if best is None:
                best, best_num, best_den = i, num, den
                continue
            lhs = num * best_den
            rhs = best_num * den
            if lhs > rhs or (lhs == rhs and i < best):
                best, best_num, best_den = i, num, den
        return best


# -- BAL ---------------------------------------------------------------------

class Bal(Policy):
    """SRPT with starvation mitigation.

    An active job becomes starving at the first ``t`` with
    ``(t - r_i) / q_t(i) >= theta``. Starving jobs run first, oldest starvation
    time first (then larger gamma, then smaller id). Otherwise the policy runs
    the pending task that an internal SRPT run, stepped in lockstep, completed
    earliest.
    """

    name = "bal"

    def __init__(self, theta=math.inf):
        self.theta = as_threshold(theta)

    def __repr__(self):
        return f"Bal({self.theta!r})"

    def threshold(self) -> Threshold:
        return self.theta

    def start(self, instance):
        self.inner = _SrptCore()
        self.release = {}
        self.rem = {}
        self.done = {}
        self.srpt_done = {}
        self.srpt_comp = {}
        self.version = {}
        self.n_active = 0
        self.pred = []  # (check time, id, version)
        self.cand = []  # (SRPT completion of next BAL task, id, task index)
        self.starving_heap = []  # (t_i, -gamma_i, id)
        self.t_i = {}
        self.gamma = {}

    def _on_arrivals(self, arrivals, t):
        th = self.threshold()
        for j in arrivals:
            i = j.id
            self.release[i] = j.release
            self.rem[i] = j.size
            self.done[i] = 0
            self.srpt_done[i] = 0
            self.srpt_comp[i] = []
            self.version[i] = 0
            self.inner.add(j)
            self._predict(i, t, th)
        self.n_active += len(arrivals)

    def _predict(self, i, t_from, th):
        age = th.first_age(self.rem[i])
        if age is None:
            return
        heappush(self.pred, (max(t_from, self.release[i] + age), i, self.version[i]))

    def _mark_starving(self, t):
        pred = self.pred
        th = None
        while pred and pred[0][0] <= t:
            _, i, ver = heappop(pred)
            if ver != self.version[i] or i in self.t_i or self.rem[i] == 0:
                continue
            if th is None:
                th = self.threshold()
            age = t - self.release[i]
            q = self.rem[i]
            if th.crossed(age, q):
                g = Fraction(age, q)
                self.t_i[i] = t
                self.gamma[i] = g
                heappush(self.starving_heap, (t, -g, i))
            else:
                self._predict(i, t + 1, th)

    def decide(self, state):
        t = state.now
        if state.arrivals:
            self._on_arrivals(state.arrivals, t)

        # inner SRPT runs slot [t] first so M_SRPT(t) is known
        s = self.inner.step()
        k = self.srpt_done[s] + 1
        self.srpt_done[s] = k
        self.srpt_comp[s].append(t + 1)
        if k == self.done[s] + 1 and s not in self.t_i:
            heappush(self.cand, (t + 1, s, k))

        if self.pred and self.pred[0][0] <= t:
            self._mark_starving(t)

        if self.starving_heap:
            i = self.starving_heap[0][2]
            self.done[i] += 1
            self.rem[i] -= 1
            if self.rem[i] == 0:
                heappop(self.starving_heap)
                self.n_active -= 1
            return i

        cand = self.cand
        done = self.done
        t_i = self.t_i
        while cand:
            _, i, k = cand[0]
            if done[i] + 1 == k and i not in t_i:
                break
            heappop(cand)
        else:
            raise NormalModeEmpty(f"no normal task available at t={t}")
        heappop(cand)
        d = done[i] = done[i] + 1
        self.rem[i] -= 1
        if self.rem[i] == 0:
            self.n_active -= 1
        else:
            if d < self.srpt_done[i]:
                heappush(cand, (self.srpt_comp[i][d], i, d + 1))
            self.version[i] += 1
            self._predict(i, t + 1, self.threshold())
        return i

    def record(self):
        return {
            "kind": "bal",
            "theta": self.theta,
            "t_i": dict(self.t_i),
            "gamma": dict(self.gamma),
            "srpt_task_completions": {i: list(c) for i, c in self.srpt_comp.items()},
        }


class DynamicBal(Bal):
    """BAL with theta = n(t)^(2/3), n(t) counting releases in the current busy period.

    Starving status is sticky even when theta later grows.
    """

    name = "bal_dynamic"

    def __init__(self):
        super().__init__(math.inf)
        self._cache = {}

    def __repr__(self):
        return "DynamicBal()"

    def start(self, instance):
        super().start(instance)
        self.n_t = 0
        self._cache = {}

    def threshold(self):
        th = self._cache.get(self.n_t)
        if th is None:
            th = self._cache[self.n_t] = Threshold(self.n_t, Fraction(2, 3))
        return th

    def _on_arrivals(self, arrivals, t):
        if self.n_active == 0:
            self.n_t = 0
        self.n_t += len(arrivals)
        super()._on_arrivals(arrivals, t)

    def record(self):
        rec = super().record()
        rec["theta"] = "n(t)^(2/3)"
        return rec


# -- constructors ------------------------------------------------------------

def srpt() -> Policy:
    return Srpt()


def fcfs() -> Policy:
    return Fcfs()


def rr() -> Policy:
    return RoundRobin()


def sjf() -> Policy:
    return Sjf()


def setf() -> Policy:
    return Setf()


def priority_ratio() -> Policy:
    return PriorityRatio()


def bal(theta) -> Policy:
    return Bal(theta)


def dynamic_bal() -> Policy:
    return DynamicBal()


POLICIES = {
    "srpt": srpt,
    "fcfs": fcfs,
    "rr": rr,
    "sjf": sjf,
    "setf": setf,
    "priority_ratio": priority_ratio,
    "bal_dynamic": dynamic_bal,
}


def make_policy(name: str, theta=None) -> Policy:
    name = name.lower()
    if name in ("bal", "bal_static"):
        if theta is None:
            raise ValueError("bal needs a threshold")
        return bal(theta)
    try:
        return POLICIES[name]()
    except KeyError:
        raise ValueError(f"unknown policy {name!r}") from None
