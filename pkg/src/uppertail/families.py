"""Deterministic generators for the counterexample families, plus cover gluing.

Labelings are fixed so that witnesses in reports can be checked by eye:

* ``cycle_pendant(l, r)``: cycle on 1..l, pendants l+1..l+r hang off vertex 1.
* ``snail()``: edges 12 23 13 14 45 46 27.
* ``badnews(r)``: hexagon 1..6 with chords 14 and 25, then ``r-1`` triangle
  units (apex adjacent to 1, apex plus two leaves forming a triangle), then
  the three internal vertices of a 5-vertex path from 3 to 4.
* ``fig2_example()``: K5 on 1..5; 6, 7, 8 adjacent to 1 and 2; 9 adjacent to
  6 and 10; 10 adjacent to 3.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .density import m_density
from .errors import GraphError, InternalCheckError
from .graph import MAX_ORDER, Graph, iter_bits, popcount


def cycle_pendant(l: int, r: int) -> Graph:
    if l < 3 or r < 1:
        raise GraphError("cycle_pendant needs l >= 3 and r >= 1")
    if l + r > MAX_ORDER:
        raise GraphError(f"cycle_pendant({l}, {r}) exceeds {MAX_ORDER} vertices")
    edges = [(i, i % l + 1) for i in range(1, l + 1)]
    edges += [(1, l + j) for j in range(1, r + 1)]
    return Graph.from_edges(l + r, edges)


SNAIL_EDGES = ((1, 2), (2, 3), (1, 3), (1, 4), (4, 5), (4, 6), (2, 7))


def snail() -> Graph:
    return Graph.from_edges(7, SNAIL_EDGES)


def badnews(r: int) -> Graph:
    if r < 2:
        raise GraphError("badnews needs r >= 2")
    order = 3 * r + 6
    if order > MAX_ORDER:
        raise GraphError(f"badnews({r}) has {order} vertices, above the cap of {MAX_ORDER}")
    edges = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1), (1, 4), (2, 5)]
    nxt = 7
    for _ in range(r - 1):
        apex, a, b = nxt, nxt + 1, nxt + 2
        edges += [(1, apex), (apex, a), (apex, b), (a, b)]
        nxt += 3
    x, y, z = nxt, nxt + 1, nxt + 2
    edges += [(3, x), (x, y), (y, z), (z, 4)]
    return Graph.from_edges(order, edges)


def fig2_example() -> Graph:
    edges = list(itertools.combinations(range(1, 6), 2))
    for w in (6, 7, 8):
        edges += [(1, w), (2, w)]
    edges += [(6, 9), (9, 10), (10, 3)]
    return Graph.from_edges(10, edges)


@dataclass(frozen=True)
class GlueSpec:
    """Glue ``copies`` copies of ``j`` along the primal vertex set ``g_vertices``."""

    j: Graph
    g_vertices: int
    copies: int

    def __post_init__(self) -> None:
        from .lattice import covers, primal_family

        if self.copies < 1:
            raise GraphError("glue needs at least one copy")
        if self.g_vertices == 0 or self.g_vertices & ~self.j.full_mask:
            raise GraphError("glue base set must be a non-empty subset of V(J)")
        fam = primal_family(self.j)
        if self.g_vertices not in fam.index or self.j.full_mask not in fam.index:
            raise GraphError("glue base must be primal in J and J must be balanced")
        if not covers(fam, self.g_vertices, self.j.full_mask):
            raise GraphError("J does not cover the glue base")
        vg = popcount(self.g_vertices)
        size = vg + self.copies * (self.j.order - vg)
        if size > MAX_ORDER:
            raise GraphError(f"glued graph would have {size} vertices, above {MAX_ORDER}")


def glue(spec: GlueSpec) -> Graph:
    """Glue copies of J onto G; verifies balance, density m_J and the minimal primal size."""
    from .lattice import primal_family

    j, gmask, r = spec.j, spec.g_vertices, spec.copies
    base = list(iter_bits(gmask))
    outside = [v for v in range(j.order) if not gmask >> v & 1]
    vg, k = len(base), len(outside)
    pos: dict[tuple[int, int], int] = {}
    for v_index, v in enumerate(base):
        for c in range(r):
            pos[v, c] = v_index
    for w_index, w in enumerate(outside):
        for c in range(r):
            pos[w, c] = vg + c * k + w_index
    edges = set()
    for u, v in j.edges():
        if gmask >> u & 1 and gmask >> v & 1:
            edges.add((pos[u, 0], pos[v, 0]))
            continue
        for c in range(r):
            a, b = pos[u, c], pos[v, c]
            edges.add((min(a, b), max(a, b)))
    out = Graph.from_edges(vg + r * k, sorted(edges), one_based=False)

    target = m_density(j).value
    if m_density(out).value != target or out.edge_count * target.denominator != out.order * target.numerator:
        raise InternalCheckError("glued graph is not balanced with density m_J")
    if primal_family(out).min_vertex_count != primal_family(j).min_vertex_count:
        raise InternalCheckError("glued graph has a primal smaller than J's smallest primal")
    return out


def named_graph(name: str, *, l: int | None = None, r: int | None = None, k: int | None = None) -> Graph:
    """Look up a generator by CLI family name."""
    from .graph import complete_graph, cycle_graph, path_graph, star_graph

    def need(value, flag):
        if value is None:
            raise GraphError(f"family {name!r} requires --{flag}")
        return value

    if name == "cycle-pendant":
        return cycle_pendant(need(l, "l"), need(r, "r"))
    if name == "snail":
        return snail()
    if name == "badnews":
        return badnews(need(r, "r"))
    if name == "fig2":
        return fig2_example()
    if name == "triangle":
        return complete_graph(3)
    if name == "edge":
        return complete_graph(2)
    if name == "complete":
        return complete_graph(need(k, "k"))
    if name == "cycle":
        return cycle_graph(need(l, "l"))
    if name == "path":
        return path_graph(need(k, "k"))
    if name == "star":
        return star_graph(need(k, "k"))
    raise GraphError(f"unknown family {name!r}")


FAMILY_NAMES = ("cycle-pendant", "snail", "badnews", "fig2", "glue", "triangle", "edge", "complete", "cycle", "path", "star")
