"""Small simple graphs as per-vertex bit masks, plus exact counting primitives.

Vertices are 0-based internally and 1-based in every external label (edge
lists, reports, label strings such as ``"1234"``).  A vertex set is a plain
``int`` bit mask over the vertex indices of a specific graph.

The copy counter works on any sequence of adjacency masks, so the same engine
serves both fixed graphs (at most 32 vertices) and sampled hosts with up to a
few hundred vertices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import CountingGuardError, EdgeListError, GraphError

MAX_ORDER = 32
MAX_PATTERN_ORDER = 10
EXHAUSTIVE_AUT_MAX = 12


def popcount(x: int) -> int:
    return x.bit_count()


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``0..order-1``.

    ``adj[v]`` is the bit mask of neighbours of ``v``.  Equality and hashing
    are by labelled structure, not isomorphism class.
    """

    order: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.order <= MAX_ORDER:
            raise GraphError(f"order must be in 1..{MAX_ORDER}, got {self.order}")
        if len(self.adj) != self.order:
            raise GraphError("adjacency length does not match order")
        full = (1 << self.order) - 1
        for v, row in enumerate(self.adj):
            if row & ~full:
                raise GraphError(f"vertex {v + 1} has a neighbour outside the graph")
            if row >> v & 1:
                raise GraphError(f"loop at vertex {v + 1}")
            for u in iter_bits(row):
                if not self.adj[u] >> v & 1:
                    raise GraphError("adjacency is not symmetric")

    @classmethod
    def from_edges(cls, order: int, edges: Iterable[tuple[int, int]], *, one_based: bool = True) -> Graph:
        shift = 1 if one_based else 0
        rows = [0] * order
        for a, b in edges:
            u, v = a - shift, b - shift
            if not (0 <= u < order and 0 <= v < order):
                raise GraphError(f"edge {a}-{b} outside vertex range")
            if u == v:
                raise GraphError(f"loop at vertex {a}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(order, tuple(rows))

    @cached_property
    def edge_count(self) -> int:
        return sum(popcount(row) for row in self.adj) // 2

    @property
    def full_mask(self) -> int:
        return (1 << self.order) - 1

    def degree(self, v: int) -> int:
        return popcount(self.adj[v])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(popcount(row) for row in self.adj)

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    def edges(self) -> list[tuple[int, int]]:
        """0-based edges ``(u, v)`` with ``u < v``, sorted."""
        return [(u, v) for u in range(self.order) for v in iter_bits(self.adj[u] >> (u + 1) << (u + 1))]

    def labeled_edges(self) -> list[tuple[int, int]]:
        return [(u + 1, v + 1) for u, v in self.edges()]

    def to_edge_list(self) -> str:
        lines = [f"{u} {v}" for u, v in self.labeled_edges()]
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"Graph(order={self.order}, edges={self.labeled_edges()})"


# ----------------------------------------------------------------------------
# vertex sets


def mask_from_labels(labels: Iterable[int]) -> int:
    mask = 0
    for label in labels:
        if not 1 <= label <= MAX_ORDER:
            raise GraphError(f"vertex label {label} out of range")
        mask |= 1 << (label - 1)
    return mask


def labels_from_mask(mask: int) -> list[int]:
    return [v + 1 for v in iter_bits(mask)]


def label_string(mask: int, order: int | None = None) -> str:
    """``"1234"`` style label for a vertex set; comma separated when labels exceed 9."""
    labels = labels_from_mask(mask)
    if (order if order is not None else max(labels, default=0)) <= 9:
        return "".join(map(str, labels))
    return ",".join(map(str, labels))


def parse_label_string(text: str) -> int:
    text = text.strip()
    if "," in text or " " in text:
        parts = [t for t in text.replace(",", " ").split()]
        return mask_from_labels(int(t) for t in parts)
    return mask_from_labels(int(ch) for ch in text)


# ----------------------------------------------------------------------------
# parsing


def graph_from_edge_list(text: str) -> Graph:
    """Parse an edge-list document: two labels per line, ``#`` comments, blanks ignored."""
    edges: set[tuple[int, int]] = set()
    top = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListError(lineno, f"expected two vertex labels, got {len(tokens)} tokens")
        try:
            a, b = (int(t) for t in tokens)
        except ValueError:
            raise EdgeListError(lineno, f"malformed token in {line!r}") from None
        if a < 1 or b < 1:
            raise EdgeListError(lineno, "vertex labels must be positive")
        if a > MAX_ORDER or b > MAX_ORDER:
            raise EdgeListError(lineno, f"vertex label exceeds {MAX_ORDER}")
        if a == b:
            raise EdgeListError(lineno, f"loop edge at vertex {a}")
        edges.add((min(a, b), max(a, b)))
        top = max(top, a, b)
    if not edges:
        raise EdgeListError(0, "document contains no edges")
    return Graph.from_edges(top, sorted(edges))


# ----------------------------------------------------------------------------
# structure


def induced_subgraph(g: Graph, s: int) -> Graph:
    """Subgraph induced by vertex mask ``s``, relabelled in ascending label order."""
    if s == 0:
        raise GraphError("induced subgraph of an empty vertex set")
    if s & ~g.full_mask:
        raise GraphError("vertex set outside the graph")
    verts = list(iter_bits(s))
    index = {v: i for i, v in enumerate(verts)}
    rows = []
    for v in verts:
        row = 0
        for u in iter_bits(g.adj[v] & s):
            row |= 1 << index[u]
        rows.append(row)
    return Graph(len(verts), tuple(rows))


def induced_edge_count(g: Graph, s: int) -> int:
    return sum(popcount(g.adj[v] & s) for v in iter_bits(s)) // 2


def edge_subgraph(g: Graph, edges: Sequence[tuple[int, int]]) -> Graph:
    """Graph spanned by 0-based ``edges`` of ``g`` (no isolated vertices), relabelled ascending."""
    verts = sorted({v for e in edges for v in e})
    index = {v: i for i, v in enumerate(verts)}
    return Graph.from_edges(len(verts), [(index[u], index[v]) for u, v in edges], one_based=False)


def component_mask(adj: Sequence[int], start: int, within: int) -> int:
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= adj[v]
        nxt &= within & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def connected(g: Graph) -> bool:
    return component_mask(g.adj, 0, g.full_mask) == g.full_mask


def mask_connected(g: Graph, s: int) -> bool:
    """True iff ``g[s]`` is connected; the empty set is not."""
    if s == 0:
        return False
    start = (s & -s).bit_length() - 1
    return component_mask(g.adj, start, s) == s


# ----------------------------------------------------------------------------
# counting engine


@lru_cache(maxsize=None)
def _set_partitions(k: int) -> tuple[tuple[int, tuple[tuple[int, ...], ...]], ...]:
    """All set partitions of ``range(k)`` with their Moebius coefficients.

    The number of injective tuples ``x_i in A_i`` equals the sum over partitions
    of ``coef * prod |intersection of A_i over each block|``.
    """

    def gen(items: list[int]) -> Iterator[list[list[int]]]:
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for part in gen(rest):
            yield [[first], *part]
            for i in range(len(part)):
                yield [*part[:i], [first, *part[i]], *part[i + 1 :]]

    out = []
    for part in gen(list(range(k))):
        coef = 1
        for block in part:
            size = len(block)
            coef *= (-1) ** (size - 1) * math.factorial(size - 1)
        out.append((coef, tuple(tuple(b) for b in part)))
    return tuple(out)


@dataclass(frozen=True)
class _Plan:
    order: tuple[int, ...]          # backtracking order over pattern vertices
    back: tuple[tuple[int, ...], ...]  # earlier positions adjacent to each position
    need: tuple[int, ...]           # pattern degree at each position
    tail: tuple[int, ...]           # independent trailing vertices counted in closed form
    tail_back: tuple[tuple[int, ...], ...]
    tail_need: tuple[int, ...]


MAX_TAIL = 6


@lru_cache(maxsize=256)
def _plan(pattern: Graph) -> _Plan:
    k = pattern.order
    deg = pattern.degrees
    full = pattern.full_mask
    whole_connected = connected(pattern)

    # trailing independent set: every member's neighbours stay in the backtracked part
    tail_mask = 0
    for v in sorted(range(k), key=lambda v: (deg[v], v)):
        if popcount(tail_mask) >= MAX_TAIL:
            break
        if pattern.adj[v] & tail_mask:
            continue
        rest = full & ~(tail_mask | 1 << v)
        if rest == 0:
            continue
        if whole_connected and not mask_connected(pattern, rest):
            continue
        tail_mask |= 1 << v
    rest = full & ~tail_mask

    order: list[int] = []
    placed = 0
    remaining = rest
    while remaining:
        best = None
        best_key = None
        for v in iter_bits(remaining):
            key = (popcount(pattern.adj[v] & placed), deg[v], -v)
            if best_key is None or key > best_key:
                best, best_key = v, key
        order.append(best)
        placed |= 1 << best
        remaining &= ~(1 << best)
    pos = {v: i for i, v in enumerate(order)}
    back = tuple(tuple(pos[u] for u in order[:i] if pattern.adj[v] >> u & 1) for i, v in enumerate(order))
    tail = tuple(iter_bits(tail_mask))
    tail_back = tuple(tuple(pos[u] for u in iter_bits(pattern.adj[t])) for t in tail)
    return _Plan(
        order=tuple(order),
        back=back,
        need=tuple(deg[v] for v in order),
        tail=tail,
        tail_back=tail_back,
        tail_need=tuple(deg[t] for t in tail),
    )


def search_volume(host_adj: Sequence[int], pattern: Graph) -> int:
    """Crude upper bound on the number of backtracking nodes for ``count_embeddings``."""
    plan = _plan(pattern)
    n = len(host_adj)
    maxdeg = max((popcount(a) for a in host_adj), default=0)
    volume = 1
    for back in plan.back:
        volume *= maxdeg if back else n
    return volume


def count_embeddings(host_adj: Sequence[int], pattern: Graph, *, volume_limit: int | None = None) -> int:
    """Number of injective edge-preserving maps from ``pattern`` into the host."""
    n = len(host_adj)
    if pattern.order > n:
        return 0
    if volume_limit is not None:
        volume = search_volume(host_adj, pattern)
        if volume > volume_limit:
            raise CountingGuardError(
                f"search volume bound {volume:.3g} exceeds limit {volume_limit:.3g}; use smaller n or p"
            )
    plan = _plan(pattern)
    host_deg = [popcount(a) for a in host_adj]
    needed = set(plan.need) | set(plan.tail_need)
    deg_ok = {}
    for d in needed:
        m = 0
        for x, hd in enumerate(host_deg):
            if hd >= d:
                m |= 1 << x
        deg_ok[d] = m

    back = plan.back
    need_mask = [deg_ok[d] for d in plan.need]
    depth = len(plan.order)
    img = [0] * depth
    tail_back = plan.tail_back
    tail_need = [deg_ok[d] for d in plan.tail_need]
    ntail = len(tail_back)
    partitions = _set_partitions(ntail) if ntail > 1 else ()

    def tail_count(used: int) -> int:
        sets = []
        for tb, ok in zip(tail_back, tail_need):
            m = ok & ~used
            for p in tb:
                m &= host_adj[img[p]]
            sets.append(m)
        if ntail == 1:
            return popcount(sets[0])
        total = 0
        for coef, blocks in partitions:
            prod = coef
            for block in blocks:
                m = sets[block[0]]
                for i in block[1:]:
                    m &= sets[i]
                prod *= popcount(m)
                if not prod:
                    break
            total += prod
        return total

    def rec(i: int, used: int) -> int:
        cand = need_mask[i] & ~used
        for p in back[i]:
            cand &= host_adj[img[p]]
        if i == depth - 1:
            if not ntail:
                return popcount(cand)
            total = 0
            while cand:
                low = cand & -cand
                img[i] = low.bit_length() - 1
                total += tail_count(used | low)
                cand ^= low
            return total
        total = 0
        while cand:
            low = cand & -cand
            img[i] = low.bit_length() - 1
            total += rec(i + 1, used | low)
            cand ^= low
        return total

    if depth == 0:
        return tail_count(0) if ntail else 1
    return rec(0, 0)


def find_embedding(host_adj: Sequence[int], pattern: Graph, pinned: dict[int, int] | None = None) -> list[int] | None:
    """First injective edge-preserving map (pattern vertex -> host vertex) in search order, or None."""
    n = len(host_adj)
    k = pattern.order
    if k > n:
        return None
    pinned = dict(pinned or {})
    order = list(pinned)
    placed = sum(1 << v for v in order)
    remaining = pattern.full_mask & ~placed
    while remaining:
        best = max(iter_bits(remaining), key=lambda v: (popcount(pattern.adj[v] & placed), pattern.degrees[v], -v))
        order.append(best)
        placed |= 1 << best
        remaining &= ~(1 << best)
    pos = {v: i for i, v in enumerate(order)}
    back = [[pos[u] for u in order[:i] if pattern.adj[v] >> u & 1] for i, v in enumerate(order)]
    host_deg = [popcount(a) for a in host_adj]
    img = [0] * k

    def ok(i: int, x: int, used: int) -> bool:
        if used >> x & 1 or host_deg[x] < pattern.degrees[order[i]]:
            return False
        return all(host_adj[img[p]] >> x & 1 for p in back[i])

    used = 0
    for i, v in enumerate(order[: len(pinned)]):
        x = pinned[v]
        if not ok(i, x, used):
            return None
        img[i] = x
        used |= 1 << x

    def rec(i: int, used: int) -> bool:
        if i == k:
            return True
        cand = ((1 << n) - 1) & ~used
        for p in back[i]:
            cand &= host_adj[img[p]]
        need = pattern.degrees[order[i]]
        while cand:
            low = cand & -cand
            x = low.bit_length() - 1
            cand ^= low
            if host_deg[x] < need:
                continue
            img[i] = x
            if rec(i + 1, used | low):
                return True
        return False

    if not rec(len(pinned), used):
        return None
    out = [0] * k
    for i, v in enumerate(order):
        out[v] = img[i]
    return out


# ----------------------------------------------------------------------------
# automorphisms


def _extend_to_automorphism(g: Graph, pinned: dict[int, int]) -> list[int] | None:
    """An automorphism of ``g`` agreeing with ``pinned``, or None."""
    k = g.order
    deg = g.degrees
    adj = g.adj
    order = list(pinned)
    placed = sum(1 << v for v in order)
    remaining = g.full_mask & ~placed
    while remaining:
        best = max(iter_bits(remaining), key=lambda v: (popcount(adj[v] & placed), deg[v], -v))
        order.append(best)
        placed |= 1 << best
        remaining &= ~(1 << best)
    img = [-1] * k          # pattern vertex -> image
    img_mask = 0

    def consistent(v: int, x: int) -> bool:
        if deg[v] != deg[x] or img_mask >> x & 1:
            return False
        required = 0
        for u in iter_bits(adj[v] & placed_src[0]):
            required |= 1 << img[u]
        return adj[x] & img_mask == required

    placed_src = [0]
    for v in order[: len(pinned)]:
        x = pinned[v]
        if not consistent(v, x):
            return None
        img[v] = x
        img_mask |= 1 << x
        placed_src[0] |= 1 << v

    def rec(i: int) -> bool:
        nonlocal img_mask
        if i == k:
            return True
        v = order[i]
        anchored = adj[v] & placed_src[0]
        if anchored:
            u = (anchored & -anchored).bit_length() - 1
            cand = adj[img[u]] & ~img_mask
        else:
            cand = g.full_mask & ~img_mask
        while cand:
            low = cand & -cand
            x = low.bit_length() - 1
            cand ^= low
            if not consistent(v, x):
                continue
            img[v] = x
            img_mask |= low
            placed_src[0] |= 1 << v
            if rec(i + 1):
                return True
            img_mask &= ~low
            placed_src[0] &= ~(1 << v)
            img[v] = -1
        return False

    return list(img) if rec(len(pinned)) else None


def _automorphism_count_exhaustive(g: Graph) -> int:
    if g.order > EXHAUSTIVE_AUT_MAX:
        raise GraphError(f"exhaustive automorphism enumeration is capped at {EXHAUSTIVE_AUT_MAX} vertices")
    edges = set(g.edges())
    count = 0
    for perm in itertools.permutations(range(g.order)):
        if all((min(perm[u], perm[v]), max(perm[u], perm[v])) in edges for u, v in edges):
            count += 1
    return count


@lru_cache(maxsize=65536)
def _automorphism_count_pruned(g: Graph) -> int:
    # orbit-stabiliser chain: |Aut| = prod of orbit sizes of successive base points
    total = 1
    fixed: dict[int, int] = {}
    base = sorted(range(g.order), key=lambda v: (-g.degrees[v], v))
    for v in base:
        gens: list[list[int]] = []
        orbit = {v}
        for u in base:
            if u in orbit or u in fixed or g.degrees[u] != g.degrees[v]:
                continue
            perm = _extend_to_automorphism(g, {**fixed, v: u})
            if perm is None:
                continue
            gens.append(perm)
            frontier = list(orbit)
            while frontier:
                w = frontier.pop()
                for s in gens:
                    if s[w] not in orbit:
                        orbit.add(s[w])
                        frontier.append(s[w])
        total *= len(orbit)
        fixed[v] = v
    return total


def automorphism_count(g: Graph, method: str = "pruned") -> int:
    """|Aut(g)|.

    ``"pruned"`` runs an orbit-stabiliser chain of degree-respecting extension
    searches; ``"exhaustive"`` checks every permutation (order <= 12);
    ``"embeddings"`` counts self-embeddings with the copy-counting engine.
    """
    if method == "pruned":
        return _automorphism_count_pruned(g)
    if method == "exhaustive":
        return _automorphism_count_exhaustive(g)
    if method == "embeddings":
        return count_embeddings(g.adj, g)
    raise ValueError(f"unknown method {method!r}")


def count_copies(host, pattern: Graph, *, volume_limit: int | None = None) -> int:
    """Number of subgraphs of ``host`` isomorphic to ``pattern`` (unlabelled copies).

    ``host`` is a :class:`Graph` or anything exposing an ``adj`` mask sequence.
    """
    host_adj = host.adj if hasattr(host, "adj") else host
    if pattern.order > len(host_adj):
        return 0
    if pattern.order > MAX_PATTERN_ORDER:
        raise GraphError(f"pattern order {pattern.order} exceeds the counting cap {MAX_PATTERN_ORDER}")
    maps = count_embeddings(host_adj, pattern, volume_limit=volume_limit)
    aut = automorphism_count(pattern)
    copies, rem = divmod(maps, aut)
    if rem:
        raise AssertionError("embedding count not divisible by |Aut(pattern)|")
    return copies


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    """Graph with vertex ``v`` renamed ``perm[v]`` (0-based permutation)."""
    rows = [0] * g.order
    for v in range(g.order):
        for u in iter_bits(g.adj[v]):
            rows[perm[v]] |= 1 << perm[u]
    return Graph(g.order, tuple(rows))


def complete_graph(k: int) -> Graph:
    return Graph.from_edges(k, itertools.combinations(range(k), 2), one_based=False)


def cycle_graph(k: int) -> Graph:
    return Graph.from_edges(k, [(i, (i + 1) % k) for i in range(k)], one_based=False)


def path_graph(k: int) -> Graph:
    if k == 1:
        return Graph(1, (0,))
    return Graph.from_edges(k, [(i, i + 1) for i in range(k - 1)], one_based=False)


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], one_based=False)


def disjoint_union(a: Graph, b: Graph) -> Graph:
    edges = a.edges() + [(u + a.order, v + a.order) for u, v in b.edges()]
    return Graph.from_edges(a.order + b.order, edges, one_based=False)



def count_extensions(host_adj: Sequence[int], pattern: Graph, fixed: dict[int, int], allowed: int) -> int:
    """Injective edge-preserving maps of ``pattern`` that agree with ``fixed``.

    Unfixed pattern vertices are sent into the host vertex mask ``allowed``;
    edges among fixed vertices are not re-checked.
    """
    known = set(fixed)
    pool = [v for v in range(pattern.order) if v not in known]
    order: list[int] = []
    while pool:
        best = max(pool, key=lambda v: (sum(1 for u in iter_bits(pattern.adj[v]) if u in known), -v))
        order.append(best)
        known.add(best)
        pool.remove(best)
    placed = dict(fixed)
    used0 = 0
    for x in fixed.values():
        used0 |= 1 << x

    def rec(i: int, used: int) -> int:
        if i == len(order):
            return 1
        v = order[i]
        cand = allowed & ~used
        for u in iter_bits(pattern.adj[v]):
            if u in placed:
                cand &= host_adj[placed[u]]
        total = 0
        while cand:
            low = cand & -cand
            placed[v] = low.bit_length() - 1
            total += rec(i + 1, used | low)
            cand ^= low
        placed.pop(v, None)
        return total

    return rec(0, used0)
