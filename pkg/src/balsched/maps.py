"""Finite nonnegative integer maps: prefix sums, domination, majorization,
truncation, and the constructive reductions between proper maps.

A map is a plain ``dict`` from comparable keys to ints >= 0. Sorting by value
("pi_f order") is descending with ties broken by the smaller key.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .analysis import BalAnnotations, bal_annotations
from .core import SchedError, ScheduleTrace
from .engine import total_work_series

MapNat = dict


class InvalidTruncation(SchedError, ValueError):
    pass


class NotMajorized(SchedError, ValueError):
    pass


class NotDominated(SchedError, ValueError):
    pass


class NoStarvation(SchedError):
    pass


def check_map(f: Mapping) -> None:
    for k, v in f.items():
        if not isinstance(v, int) or v < 0:
            raise ValueError(f"map value at {k!r} must be an int >= 0, got {v!r}")


def total(f: Mapping) -> int:
    """S(f)."""
    return sum(f.values())


def square_sum(f: Mapping) -> int:
    """S(f^2)."""
    return sum(v * v for v in f.values())


def sorted_keys(f: Mapping) -> list:
    """pi_f(1), pi_f(2), ...: keys by decreasing value, ties by smaller key."""
    return sorted(f, key=lambda k: (-f[k], k))


def prefix_sums(f: Mapping) -> list[int]:
    """[S_0(f), S_1(f), ..., S_|dom f|(f)]."""
    out = [0]
    for k in sorted_keys(f):
        out.append(out[-1] + f[k])
    return out


def top_k_sum(f: Mapping, k: int) -> int:
    """S_k(f): sum of the k largest values (all of them once k >= |dom f|)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    vals = sorted(f.values(), reverse=True)
    return sum(vals[:k])


def dominates(f: Mapping, g: Mapping) -> bool:
    """True iff dom f == dom g and g <= f pointwise."""
    if f.keys() != g.keys():
        return False
    return all(g[k] <= f[k] for k in f)


def majorizes(f: Mapping, g: Mapping) -> bool:
    """True iff S(f) == S(g) and S_k(f) >= S_k(g) for every k."""
    if total(f) != total(g):
        return False
    pf = sorted(f.values(), reverse=True)
    pg = sorted(g.values(), reverse=True)
    sf = sg = 0
    for k in range(max(len(pf), len(pg))):
        sf += pf[k] if k < len(pf) else 0
        sg += pg[k] if k < len(pg) else 0
        if sf < sg:
            return False
    return True


def least_prefix(f: Mapping, c: int) -> int:
    """lu(f, c): least k with S_k(f) >= c."""
    if c <= 0:
        return 0
    acc = 0
    for k, key in enumerate(sorted_keys(f), 1):
        acc += f[key]
        if acc >= c:
            return k
    raise InvalidTruncation(f"c={c} exceeds S(f)={acc}")


def truncate(f: Mapping, c: int) -> dict:
    """TR[f, c]: keep the largest values until they sum to exactly c, zero the rest."""
    s = total(f)
    if not 1 <= c <= s:
        raise InvalidTruncation(f"need 1 <= c <= S(f) = {s}, got c={c}")
    out = dict.fromkeys(f, 0)
    acc = 0
    for key in sorted_keys(f):
        if acc >= c:
            break
        take = min(f[key], c - acc)
        out[key] = take
        acc += take
    return out


# -- q-hat and the 1-proper map ----------------------------------------------

def hat_q(trace: ScheduleTrace, t: int, ann: BalAnnotations | None = None) -> dict[int, int]:
    """q_t with each FaS job frozen at its remaining work when it became starving."""
    if ann is None:
        ann = bal_annotations(trace)
    out = {}
    for j in trace.instance:
        i = j.id
        if i in ann.fas and t > ann.t_i[i]:
            out[i] = trace.remaining(ann.t_i[i], i)
        else:
            out[i] = trace.remaining(t, i)
    return out


@dataclass
class HPrimeReport:
    t_star: int
    u_star: int
    q_star: int  # q(t*)
    hat_q: dict
    h: dict
    h_prime: dict
    bound_sq: int  # sum_i q_{t_i}(i)^2 over FaS jobs

    @property
    def sum(self) -> int:
        return total(self.h_prime)

    @property
    def sum_sq(self) -> int:
        return square_sum(self.h_prime)

    @property
    def ok(self) -> bool:
        return (
            self.sum >= self.u_star
            and self.sum_sq <= self.bound_sq
            and dominates(self.h, self.h_prime)
        )


def starving_square_bound(trace: ScheduleTrace, ann: BalAnnotations) -> int:
    """sum_i q_{t_i}(i)^2; FaN jobs contribute 0 since t_i is their completion."""
    return sum(trace.remaining(ann.t_i[i], i) ** 2 for i in ann.fas)


def build_h_prime(trace: ScheduleTrace, ann: BalAnnotations | None = None) -> HPrimeReport:
    """Truncate q-hat at t* to q(t*), then keep only FaS jobs starving by t*."""
    if ann is None:
        ann = bal_annotations(trace)
    t_star = ann.t_star
    u_star = ann.u_at(t_star)
    if u_star == 0:
        raise NoStarvation("no starving tasks at any time")
    q_star = total_work_series(trace.instance)(t_star)
    hq = hat_q(trace, t_star, ann)
    h = truncate(hq, q_star)
    in_s = {i for i in ann.fas if ann.t_i[i] <= t_star}
    h_prime = {i: (v if i in in_s else 0) for i, v in h.items()}
    return HPrimeReport(
        t_star=t_star,
        u_star=u_star,
        q_star=q_star,
        hat_q=hq,
        h=h,
        h_prime=h_prime,
        bound_sq=starving_square_bound(trace, ann),
    )


# -- reduction across majorization ------------------------------------------

@dataclass
class Reduction:
    g_prime: dict
    I0: list = field(default_factory=list)
    I1: list = field(default_factory=list)
    I2: list = field(default_factory=list)
    rounds: list = field(default_factory=list)  # (kappa, x, y), 1-based positions
    branch: int = 1


def proper_reduction(f: Mapping, g: Mapping, f_prime: Mapping) -> Reduction:
    """Build g' dominated by g with S(g'^2) <= S(f'^2) and S(g') >= S(f')/4.

    Requires f to majorize g and f' to be dominated by f. Positions of f and g
    are paired in pi order; pairs where f' fits under g are copied (branch 1),
    the rest are covered by consecutive runs of g summing to at least half
    of f' (branch 2). Whichever branch carries more of f' is returned.
    """
    if not dominates(f, f_prime):
        raise NotDominated("f' must be dominated by f")
    if not majorizes(f, g):
        raise NotMajorized("f must majorize g")
    a = sorted_keys(f)
    b = sorted_keys(g)
    d_f = sum(1 for v in f.values() if v > 0)
    d_g = sum(1 for v in g.values() if v > 0)
    I0 = a[d_f:]
    I1, I2 = [], []
    kappa = []
    for k in range(d_f):
        if f_prime[a[k]] <= g[b[k]]:
            I1.append(a[k])
        else:
            I2.append(a[k])
            kappa.append(k + 1)

    g1 = dict.fromkeys(g, 0)
    for k in range(d_f):
        if f_prime[a[k]] <= g[b[k]]:
            g1[b[k]] = f_prime[a[k]]

    g2 = dict.fromkeys(g, 0)
    rounds = []
    y_prev = kappa[0] - 1 if kappa else 0
    for kap in kappa:
        need = f_prime[a[kap - 1]]
        x = max(kap, y_prev + 1)
        acc = 0
        y = x - 1
        while 2 * acc < need:
            y += 1
            if y > d_g:
                raise AssertionError("ran out of positive entries of g")
            acc += g[b[y - 1]]
        for pos in range(x, y + 1):
            g2[b[pos - 1]] = g[b[pos - 1]]
        rounds.append((kap, x, y))
        y_prev = y

    mass1 = sum(f_prime[i] for i in I1)
    mass2 = sum(f_prime[i] for i in I2)
    branch = 1 if mass1 >= mass2 else 2
    return Reduction(
        g_prime=g1 if branch == 1 else g2,
        I0=I0,
        I1=I1,
        I2=I2,
        rounds=rounds,
        branch=branch,
    )


def reduce_proper(f: Mapping, g: Mapping, f_prime: Mapping) -> dict:
    return proper_reduction(f, g, f_prime).g_prime


def reduction_holds(g: Mapping, f_prime: Mapping, g_prime: Mapping) -> bool:
    """The reduction contract: domination, squared sum, and the 1/4 mass bound."""
    return (
        dominates(g, g_prime)
        and square_sum(g_prime) <= square_sum(f_prime)
        and 4 * total(g_prime) >= total(f_prime)
    )

