import pytest
from hypothesis import given, settings

from balsched.core import flow_stats, parse_trace, validate_instance, write_trace
from balsched.engine import Policy, PolicyChoseInactiveJob, check_trace, simulate, total_work_series
from balsched.policies import bal, dynamic_bal, fcfs, priority_ratio, rr, setf, sjf, srpt

from conftest import instances

ALL = [srpt, fcfs, rr, sjf, setf, priority_ratio, dynamic_bal, lambda: bal(1), lambda: bal(0)]


def test_srpt_instance_a(inst_a):
    tr = simulate(inst_a, srpt())
    assert tr.completions == {2: 1, 1: 3}
    assert tr.flows == {1: 3, 2: 1}


def test_fcfs_instance_a(inst_a):
    tr = simulate(inst_a, fcfs())
    assert tr.completions == {1: 2, 2: 3}
    assert tr.flows == {1: 2, 2: 3}


@pytest.mark.parametrize("make", ALL)
def test_single_job_runs_uncontended(make):
    inst = validate_instance([(1, 5, 4)])
    tr = simulate(inst, make())
    assert tr.slots == [0] * 5 + [1] * 4
    assert tr.flows == {1: 4}


def test_total_work_series_examples(inst_a):
    assert list(total_work_series(inst_a)) == [3, 2, 1, 0]
    assert list(total_work_series(validate_instance([(1, 0, 1)]))) == [1, 0]
    q = total_work_series(validate_instance([(1, 0, 1), (2, 5, 1)]))
    assert [q(t) for t in range(7)] == [1, 0, 0, 0, 0, 1, 0]
    assert q(100) == 0


class _Bad(Policy):
    def decide(self, state):
        return 99


def test_inactive_choice_is_rejected(inst_a):
    with pytest.raises(PolicyChoseInactiveJob):
        simulate(inst_a, _Bad())


@settings(max_examples=60, deadline=None)
@given(instances())
def test_work_conservation_all_policies(inst):
    q = total_work_series(inst)
    bound = max(j.release for j in inst) + inst.total_work
    for make in ALL:
        tr = simulate(inst, make())
        check_trace(tr)
        assert tr.makespan <= bound
        for t in range(tr.makespan + 2):
            assert sum(tr.remaining_map(t).values()) == q(t)
        for j in inst:
            assert tr.flows[j.id] >= j.size


@settings(max_examples=40, deadline=None)
@given(instances())
def test_trace_replay(inst):
    tr = simulate(inst, rr())
    back = parse_trace(inst, write_trace(tr))
    assert back.completions == tr.completions
    assert flow_stats(back) == flow_stats(tr)


@settings(max_examples=40, deadline=None)
@given(instances())
def test_deterministic(inst):
    assert simulate(inst, bal(2)).slots == simulate(inst, bal(2)).slots
