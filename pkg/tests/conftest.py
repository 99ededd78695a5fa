import numpy as np
import pytest
from hypothesis import strategies as st

from gedkit.graph import Graph

ALPHABET = ("C", "N", "O")


@st.composite
def graphs(draw, min_nodes=1, max_nodes=6, labeled=None):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = [e for e in pairs if draw(st.booleans())] if pairs else []
    if labeled is None:
        labeled = draw(st.booleans())
    labels = [draw(st.sampled_from(ALPHABET)) for _ in range(n)] if labeled else [None] * n
    return Graph(tuple(labels), tuple(edges))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def path_graph(n, labels=None):
    return Graph.from_edges(labels or [None] * n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n, labels=None):
    return Graph.from_edges(labels or [None] * n, [(i, (i + 1) % n) for i in range(n)])


def three_edit_pair():
    """Two 5-node graphs one edge deletion, one edge insertion and one relabel apart."""
    left = Graph.from_edges(["C", "C", "O", "N", "C"], [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)], "left")
    right = Graph.from_edges(["C", "C", "S", "N", "C"], [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], "right")
    return left, right


@pytest.fixture(scope="session")
def toy_dataset():
    from gedkit.dataset import build_dataset
    from gedkit.graph import generate_corpus

    return build_dataset(generate_corpus(60, 3, 8, ["C", "N", "O"], seed=11), seed=11)


# Acceptance reporting: one PASS/FAIL line per criterion at the end of the run.
_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance checks")
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    for key, value in report.user_properties:
        if key != "criterion":
            continue
        n, title = value
        entry = _criteria.setdefault(n, {"title": title, "ok": True, "ran": False})
        if report.when == "call" or report.failed:
            entry["ran"] = entry["ran"] or report.when == "call"
            entry["ok"] = entry["ok"] and not report.failed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        entry = _criteria[n]
        status = "PASS" if entry["ok"] and entry["ran"] else "FAIL" if not entry["ok"] else "SKIP"
        terminalreporter.write_line(f"{status}  criterion {n:>2}: {entry['title']}")
