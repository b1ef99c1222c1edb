"""Subset scans over small graphs: densities, balance, fractional independence.

Induced edge counts for all ``2**v`` vertex subsets are produced chunk by chunk
with numpy, so a 27-vertex host (``2**27`` subsets) fits in a few hundred MB.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .graph import Graph, GraphError, iter_bits, popcount

SCAN_MAX_ORDER = 28
CHUNK_BITS = 20


def _low_table(g: Graph, m: int) -> np.ndarray:
    """Induced edge counts of every subset of the first ``m`` vertices."""
    e = np.zeros(1 << m, dtype=np.uint16)
    for k in range(m):
        row = g.adj[k] & ((1 << k) - 1)
        lo = np.arange(1 << k, dtype=np.uint32)
        e[1 << k : 1 << (k + 1)] = e[: 1 << k] + np.bitwise_count(lo & np.uint32(row))
    return e


def iter_subset_counts(g: Graph) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(base, edges, sizes)`` chunks covering every vertex subset mask.

    Entry ``i`` of a chunk describes mask ``base + i``.
    """
    if g.order > SCAN_MAX_ORDER:
        raise GraphError(f"subset scan is capped at {SCAN_MAX_ORDER} vertices, got {g.order}")
    m = min(g.order, CHUNK_BITS)
    e_low = _low_table(g, m)
    lo = np.arange(1 << m, dtype=np.uint32)
    size_low = np.bitwise_count(lo).astype(np.uint8)
    low_mask = (1 << m) - 1
    high = list(range(m, g.order))
    cross = {u: np.bitwise_count(lo & np.uint32(g.adj[u] & low_mask)).astype(np.uint16) for u in high}
    for h in range(1 << len(high)):
        verts = [high[i] for i in iter_bits(h)]
        hmask = sum(1 << u for u in verts)
        inner = sum(popcount(g.adj[u] & hmask) for u in verts) // 2
        edges = e_low + np.uint16(inner)
        for u in verts:
            np.add(edges, cross[u], out=edges)
        sizes = size_low + np.uint8(len(verts))
        yield hmask, edges, sizes


@dataclass(frozen=True)
class Density:
    """Exact density ``edges/vertices`` of a witness vertex set."""

    edges: int
    vertices: int
    witness: int = 0

    @property
    def value(self) -> Fraction:
        return Fraction(self.edges, self.vertices)


# Every subset density is e/s with s <= 28 and e <= 378. Two distinct such
# ratios differ by more than 1e-3, far above float32 rounding, and division is
# correctly rounded, so float32 equality of ratios is exact rational equality.


def _ratios(edges: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = edges.astype(np.float32) / sizes
    ratio[sizes == 0] = -1
    return ratio


@lru_cache(maxsize=256)
def _densest(g: Graph) -> tuple[Fraction, tuple[int, ...]]:
    best = Fraction(-1)
    out: list[int] = []
    for base, edges, sizes in iter_subset_counts(g):
        ratio = _ratios(edges, sizes)
        i = int(np.argmax(ratio))
        f = Fraction(int(edges[i]), int(sizes[i]))
        if f < best:
            continue
        if f > best:
            best, out = f, []
        out.extend(base + int(k) for k in np.flatnonzero(ratio == ratio[i]))
    out.sort(key=lambda s: (popcount(s), s))
    return best, tuple(out)


def m_density(h: Graph) -> Density:
    """Maximum induced density over non-empty vertex subsets, with the smallest witness."""
    best, masks = _densest(h)
    w = masks[0]
    return Density(popcount(w) * best.numerator // best.denominator, popcount(w), w)


@lru_cache(maxsize=256)
def density_masks(g: Graph, value: Fraction) -> tuple[int, ...]:
    """All non-empty vertex masks whose induced density equals ``value`` exactly."""
    value = Fraction(value)
    best, masks = _densest(g)
    if value == best:
        return masks
    if value > best or value.denominator > g.order:
        return ()
    target = np.float32(value.numerator) / np.float32(value.denominator)
    out: list[int] = []
    for base, edges, sizes in iter_subset_counts(g):
        out.extend(base + int(k) for k in np.flatnonzero(_ratios(edges, sizes) == target))
    out.sort(key=lambda s: (popcount(s), s))
    return tuple(out)


def is_balanced(h: Graph) -> bool:
    if h.edge_count < 1:
        raise GraphError("balance is defined for graphs with at least one edge")
    return Fraction(h.edge_count, h.order) == m_density(h).value


def is_strictly_balanced(h: Graph) -> bool:
    """Every proper non-empty subgraph is strictly sparser than ``h``."""
    if not is_balanced(h):
        return False
    return density_masks(h, m_density(h).value) == (h.full_mask,)


# ----------------------------------------------------------------------------
# fractional independence


def maximum_matching_double_cover(g: Graph) -> int:
    """Maximum matching size of the bipartite double cover of ``g`` (Kuhn's algorithm)."""
    match_right = [-1] * g.order

    def augment(u: int, seen: list[int]) -> bool:
        cand = g.adj[u] & ~seen[0]
        while cand:
            low = cand & -cand
            w = low.bit_length() - 1
            cand ^= low
            seen[0] |= low
            if match_right[w] < 0 or augment(match_right[w], seen):
                match_right[w] = u
                return True
        return False

    return sum(1 for u in range(g.order) if augment(u, [0]))


def fractional_independence(g: Graph) -> Fraction:
    """Fractional independence number, ``v - nu(double cover)/2``; always half-integral."""
    return Fraction(2 * g.order - maximum_matching_double_cover(g), 2)
