import numpy as np
import pytest
from scipy import integrate

from balsched.core import flow_stats, write_instance
from balsched.engine import simulate
from balsched.policies import fcfs, srpt
from balsched.workload import (
    PARETO_PAIRS,
    NonPositiveInput,
    WorkloadConfig,
    bounded_pareto_mean,
    bounded_pareto_quantile,
    gen_fig1,
    gen_fig2,
    gen_lb_pair,
    gen_poisson_instance,
    gen_priority_bad,
    gen_sjf_setf_lb,
    round_positive,
    sample_bounded_pareto,
)


@pytest.mark.parametrize("x,want", [(0.3, 1), (7.9, 7), (1.0, 1), (2.0, 2), (1e-12, 1)])
def test_round_positive(x, want):
    assert round_positive(x) == want


@pytest.mark.parametrize("x", [0, -1.5, float("nan")])
def test_round_positive_rejects(x):
    with pytest.raises(NonPositiveInput):
        round_positive(x)


def test_config_validation():
    with pytest.raises(ValueError):
        WorkloadConfig(30, 100, 5, 4)
    with pytest.raises(ValueError):
        WorkloadConfig(0, 100, 1, 4)
    with pytest.raises(ValueError):
        WorkloadConfig(30, 100, 1, 4, shape=0)


def test_quantile_at_zero_is_low():
    L, H = PARETO_PAIRS[0]
    assert float(bounded_pareto_quantile(0.0, L, H)) == pytest.approx(L)
    assert round_positive(float(bounded_pareto_quantile(0.0, L, H))) == 16


def test_quantile_approaches_high():
    L, H = PARETO_PAIRS[4]
    assert float(bounded_pareto_quantile(1 - 1e-15, L, H)) == pytest.approx(H, rel=1e-3)


def test_sample_in_range():
    L, H = PARETO_PAIRS[2]
    cfg = WorkloadConfig(30, 10, L, H)
    rng = np.random.default_rng(3)
    vals = [sample_bounded_pareto(cfg, rng) for _ in range(500)]
    assert min(vals) >= int(L) and max(vals) <= H


@pytest.mark.parametrize("L,H", PARETO_PAIRS)
def test_mean_closed_form_matches_quadrature(L, H):
    a = 1.1
    c = a * L**a / (1 - (L / H) ** a)
    quad, _ = integrate.quad(lambda x: c * x ** (-a), L, H, limit=200)
    assert bounded_pareto_mean(L, H) == pytest.approx(quad, rel=1e-9)
    assert abs(bounded_pareto_mean(L, H) - 30) < 0.01


def test_poisson_deterministic():
    cfg = WorkloadConfig(30, 5000, *PARETO_PAIRS[3], seed=7)
    assert write_instance(gen_poisson_instance(cfg)) == write_instance(gen_poisson_instance(cfg))


def test_poisson_zero_horizon_is_empty():
    # every rounded gap is at least 1, so nothing is released by T=0
    inst = gen_poisson_instance(WorkloadConfig(30, 0, *PARETO_PAIRS[0], seed=1))
    assert inst.n == 0


def test_poisson_releases_in_range():
    inst = gen_poisson_instance(WorkloadConfig(5, 3000, *PARETO_PAIRS[0], seed=2))
    rel = [j.release for j in inst]
    assert rel == sorted(rel) and rel[0] >= 1 and rel[-1] <= 3000
    assert [j.id for j in inst] == list(range(1, inst.n + 1))


def test_poisson_job_count():
    T, lam = 2**16, 30
    counts = [
        gen_poisson_instance(WorkloadConfig(lam, T, *PARETO_PAIRS[3], seed=s)).n
        for s in range(10)
    ]
    assert abs(np.mean(counts) - T / lam) <= 0.1 * T / lam


def test_fig1_small():
    inst = gen_fig1(3)
    assert inst.n == 3 and inst.total_work == 5


def test_fig1_n8_stats():
    inst = gen_fig1(8)
    s, f = flow_stats(simulate(inst, srpt())), flow_stats(simulate(inst, fcfs()))
    assert (s.F, f.F, s.linf, f.linf) == (110, 74, 10, 4)


def test_fig2_n6():
    inst = gen_fig2(6)
    tr = simulate(inst, srpt())
    assert tr.flows == {1: 10, 2: 16, 3: 1, 4: 1, 5: 1, 6: 1}
    assert flow_stats(simulate(inst, fcfs())).l1 > flow_stats(tr).l1


def test_fig2_n3_completes():
    inst = gen_fig2(3)
    for make in (srpt, fcfs):
        assert simulate(inst, make()).is_complete()


def test_named_generators_reject_small_params():
    for fn, bad in ((gen_fig1, 2), (gen_fig2, 2), (gen_sjf_setf_lb, 1), (gen_lb_pair, 1), (gen_priority_bad, 1)):
        with pytest.raises(ValueError):
            fn(bad)


def test_sjf_lb_releases():
    inst = gen_sjf_setf_lb(7)
    assert [inst.job(i).release for i in range(1, 8)] == [1, 7, 12, 16, 19, 21, 22]
    assert set(simulate(inst, fcfs()).flows.values()) == {7}


def test_sjf_lb_n2():
    inst = gen_sjf_setf_lb(2)
    assert [(j.release, j.size) for j in inst] == [(1, 2), (2, 1)]


def test_lb_pair_l2():
    i1, i2 = gen_lb_pair(2)
    assert i1.n == i2.n == 41
    small2 = sorted(j.release for j in i2 if j.size == 1)
    assert small2 == list(range(32, 64))
    early1 = sorted((j.release, j.size) for j in i1 if j.release < 32)
    early2 = sorted((j.release, j.size) for j in i2 if j.release < 32)
    assert early1 == early2
    assert i1.job(1).release == 0 and i1.job(1).size == 8


def test_priority_bad_k2():
    inst = gen_priority_bad(2)
    assert inst.n == 32
    rows = [(j.release, j.size) for j in inst]
    assert rows[:2] == [(0, 4), (0, 4)]
    assert [r for r, p in rows if p == 2] == list(range(4, 24, 2))
    assert [r for r, p in rows if p == 1] == list(range(24, 44))


def test_priority_bad_without_one_big_job_never_queues():
    inst = gen_priority_bad(2)
    rest = [j for j in inst if j.id != 1]
    spans = sorted((j.release, j.release + j.size) for j in rest)
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
