import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from kpartite.hypergraph import PartiteHypergraph  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def hypergraphs(draw, k_range=(2, 4), n_range=(1, 4), density=None):
    k = draw(st.integers(*k_range))
    n = draw(st.integers(*n_range))
    p = density if density is not None else draw(st.sampled_from([0.2, 0.5, 0.8, 1.0]))
    seed = draw(st.integers(0, 2**31 - 1))
    adj = np.random.default_rng(seed).random((n,) * k) < p
    return PartiteHypergraph(k, n, adj)


def random_graph(k, n, p, seed) -> PartiteHypergraph:
    return PartiteHypergraph(k, n, np.random.default_rng(seed).random((n,) * k) < p)


# -- acceptance summary ----------------------------------------------------

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        _ACCEPTANCE[name] = ("PASS" if report.outcome == "passed" else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{status} {name}" + (f"  ({detail})" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
