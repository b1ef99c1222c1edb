from __future__ import annotations

import re

import networkx as nx
import pytest
from hypothesis import strategies as st

from uppertail.graph import Graph


def from_nx(gx) -> Graph:
    nodes = sorted(gx.nodes())
    pos = {v: i for i, v in enumerate(nodes)}
    return Graph.from_edges(len(nodes), [(pos[u], pos[v]) for u, v in gx.edges()], one_based=False)


def atlas(max_nodes: int, *, connected: bool = True, min_edges: int = 0) -> list[Graph]:
    out = []
    for gx in nx.graph_atlas_g()[1:]:
        if gx.number_of_nodes() > max_nodes:
            break
        if connected and not nx.is_connected(gx):
            continue
        if gx.number_of_edges() < min_edges:
            continue
        out.append(from_nx(gx))
    return out


def random_connected(n: int, p: float, seed: int) -> Graph:
    """Connected G(n, p) sample from networkx, retried with derived seeds."""
    k = 0
    while True:
        gx = nx.gnp_random_graph(n, p, seed=seed * 1009 + k)
        if nx.is_connected(gx):
            return from_nx(gx)
        k += 1


@st.composite
def graphs(draw, min_order: int = 1, max_order: int = 7, connected_only: bool = False):
    n = draw(st.integers(min_order, max_order))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    g = Graph.from_edges(n, [e for e, k in zip(pairs, keep) if k], one_based=False)
    if connected_only:
        from uppertail.graph import connected

        if not connected(g):
            extra = [(i, i + 1) for i in range(n - 1)]
            g = Graph.from_edges(n, set(g.edges()) | set(extra), one_based=False)
    return g


@pytest.fixture(scope="session")
def small_connected() -> list[Graph]:
    return atlas(6)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA: dict[str, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.originalname or item.name
    if rep.when == "call" and name.startswith("test_criterion_"):
        key = re.match(r"\d+", name.removeprefix("test_criterion_")).group()
        _CRITERIA.setdefault(key, []).append(rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=int):
        verdict = "PASS" if all(o == "passed" for o in _CRITERIA[key]) else "FAIL"
        terminalreporter.write_line(f"criterion {key}: {verdict}")
