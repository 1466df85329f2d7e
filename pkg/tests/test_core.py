import math

import pytest
from hypothesis import given, strategies as st

from balsched.core import (
    DuplicateId,
    IncompleteTrace,
    InvalidInstance,
    JobSpec,
    NegativeRelease,
    NonPositiveSize,
    ScheduleTrace,
    flow_stats,
    parse_instance,
    parse_trace,
    read_instance,
    stats_from_flows,
    validate_instance,
    write_instance,
    write_trace,
)
from balsched.engine import simulate
from balsched.policies import fcfs, srpt
from balsched.workload import gen_fig1


def test_validate_identity(inst_a):
    assert inst_a.n == 2
    assert [j.id for j in inst_a] == [1, 2]


def test_validate_sorts_by_release_then_id():
    inst = validate_instance([JobSpec(1, 5, 1), JobSpec(3, 0, 2), JobSpec(2, 0, 1)])
    assert [(j.id, j.release) for j in inst] == [(2, 0), (3, 0), (1, 5)]


def test_validate_rejects_zero_size():
    with pytest.raises(NonPositiveSize):
        validate_instance([(1, 0, 0)])


def test_validate_rejects_duplicate_id():
    with pytest.raises(DuplicateId):
        validate_instance([(1, 0, 1), (1, 1, 1)])


def test_validate_rejects_negative_release():
    with pytest.raises(NegativeRelease):
        validate_instance([(1, -1, 1)])


def test_validate_rejects_gap_in_ids():
    with pytest.raises(InvalidInstance):
        validate_instance([(1, 0, 1), (3, 0, 1)])


def test_validate_rejects_empty_unless_allowed():
    with pytest.raises(InvalidInstance):
        validate_instance([])
    assert validate_instance([], allow_empty=True).n == 0


def test_flow_stats_instance_a(inst_a):
    s = flow_stats(simulate(inst_a, srpt()))
    assert (s.l1, s.linf, s.F) == (4, 3, 10)
    assert s.l2 == pytest.approx(math.sqrt(10))


def test_flow_stats_all_unit():
    s = stats_from_flows([1] * 7)
    assert s.F == 7 and s.linf == 1


def test_flow_stats_fig1_fcfs():
    tr = simulate(gen_fig1(8), fcfs())
    assert [tr.flows[i] for i in range(1, 9)] == [2, 4, 3, 3, 3, 3, 3, 3]
    assert flow_stats(tr).F == 74


def test_incomplete_trace_raises(inst_a):
    tr = ScheduleTrace(inst_a, [2], {2: [1]})
    with pytest.raises(IncompleteTrace):
        flow_stats(tr)


def test_big_flows_are_exact():
    s = stats_from_flows([2**32] * 4)
    assert s.F == 4 * 2**64


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=30))
def test_stats_order_independent(flows):
    a = stats_from_flows(flows)
    b = stats_from_flows(list(reversed(flows)))
    assert a == b
    assert a.linf <= a.l1 and a.F >= a.linf**2


def test_instance_csv_roundtrip(tmp_path, inst_a):
    text = write_instance(inst_a, tmp_path / "a.csv")
    assert text == "1,0,2\n2,0,1\n"
    assert read_instance(tmp_path / "a.csv") == inst_a


@pytest.mark.parametrize("bad", ["1,0\n", "1,x,2\n", "1,0,2\n1,0,1\n"])
def test_parse_instance_errors(bad):
    with pytest.raises(InvalidInstance):
        parse_instance(bad)


def test_trace_roundtrip(inst_a):
    tr = simulate(inst_a, srpt())
    text = write_trace(tr)
    assert text == "0,2,1\n1,1,1\n2,1,2\n"
    back = parse_trace(inst_a, text)
    assert back.slots == tr.slots
    assert back.task_completions == tr.task_completions


def test_remaining_profile(inst_a):
    tr = simulate(inst_a, srpt())
    q = tr.remaining_profile()
    assert [q(t, 1) for t in range(4)] == [2, 2, 1, 0]
    assert [q(t, 2) for t in range(4)] == [1, 0, 0, 0]
