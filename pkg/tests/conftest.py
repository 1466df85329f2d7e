import pytest
from hypothesis import strategies as st

from balsched.core import validate_instance


@pytest.fixture
def inst_a():
    """Two jobs released together: sizes 2 and 1."""
    return validate_instance([(1, 0, 2), (2, 0, 1)])


@st.composite
def instances(draw, max_jobs=8, max_release=15, max_size=6):
    n = draw(st.integers(1, max_jobs))
    rows = [
        (draw(st.integers(0, max_release)), draw(st.integers(1, max_size)))
        for _ in range(n)
    ]
    rows.sort()
    return validate_instance([(i + 1, r, p) for i, (r, p) in enumerate(rows)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, (ok, detail) in sorted(RESULTS.items(), key=lambda kv: str(kv[0]).zfill(3)):
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
