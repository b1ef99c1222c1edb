"""The lattice of maximum-density (primal) vertex sets and the quantities built on it."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .density import density_masks, m_density
from .errors import GraphError, InternalCheckError
from .graph import Graph, label_string, mask_connected, popcount


@dataclass(frozen=True)
class PrimalFamily:
    """Vertex sets of ``host`` inducing density exactly ``m``, in (size, mask) order."""

    host: Graph
    m: Fraction
    members: tuple[int, ...]
    cover_edges: tuple[tuple[int, int], ...]
    upper: tuple[tuple[int, ...], ...] = field(repr=False)
    index: dict[int, int] = field(repr=False, compare=False)

    @property
    def min_vertex_count(self) -> int:
        return popcount(self.members[0])

    @property
    def v0(self) -> int:
        return self.min_vertex_count

    def covering(self, mask: int) -> tuple[int, ...]:
        return tuple(self.members[j] for j in self.upper[self._idx(mask)])

    def minimal_members(self) -> list[int]:
        has_below = {j for _, j in self.cover_edges}
        return [m for i, m in enumerate(self.members) if i not in has_below]

    def labels(self) -> list[str]:
        return [label_string(m, self.host.order) for m in self.members]

    def _idx(self, mask: int) -> int:
        try:
            return self.index[mask]
        except KeyError:
            raise GraphError(f"{label_string(mask, self.host.order)} is not a primal set") from None


def _hasse(members: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    # Members are sorted by size, so each set's covers are the minimal supersets
    # found first; a superset containing an accepted cover is not minimal.
    upper = []
    for i, a in enumerate(members):
        found: list[int] = []
        for j in range(i + 1, len(members)):
            b = members[j]
            if b & a != a or b == a:
                continue
            if any(members[k] & b == members[k] for k in found):
                continue
            found.append(j)
        upper.append(tuple(found))
    return tuple(upper)


@lru_cache(maxsize=128)
def primal_family(h: Graph) -> PrimalFamily:
    if h.edge_count < 1:
        raise GraphError("primal sets are defined for graphs with at least one edge")
    m = m_density(h).value
    members = density_masks(h, m)
    upper = _hasse(members)
    edges = tuple((i, j) for i, ups in enumerate(upper) for j in ups)
    return PrimalFamily(h, m, members, edges, upper, {s: i for i, s in enumerate(members)})


def covers(family: PrimalFamily, lower: int, upper: int) -> bool:
    i, j = family._idx(lower), family._idx(upper)
    return j in family.upper[i]


def covering_primals(family: PrimalFamily, g: int) -> list[int]:
    """Covers of ``g`` ordered by vertex count, ties by mask value."""
    return list(family.covering(g))


# ----------------------------------------------------------------------------
# structural claims


@dataclass(frozen=True)
class ClaimFailure:
    claim: str
    sets: tuple[int, ...]


@dataclass(frozen=True)
class ClaimReport:
    union_closed: bool
    cover_complements_connected: bool
    cover_complements_disjoint: bool
    failures: tuple[ClaimFailure, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def claim_suite(h: Graph, max_failures: int = 10) -> ClaimReport:
    fam = primal_family(h)
    fails: dict[str, list[ClaimFailure]] = {"union": [], "connected": [], "disjoint": []}

    members = fam.members
    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            if a | b not in fam.index:
                fails["union"].append(ClaimFailure("union", (a, b)))
    for i, g in enumerate(members):
        outside = [members[j] & ~g for j in fam.upper[i]]
        for j, diff in zip(fam.upper[i], outside):
            if not mask_connected(h, diff):
                fails["connected"].append(ClaimFailure("connected", (g, members[j])))
        for x in range(len(outside)):
            for y in range(x + 1, len(outside)):
                if outside[x] & outside[y]:
                    pair = (g, members[fam.upper[i][x]], members[fam.upper[i][y]])
                    fails["disjoint"].append(ClaimFailure("disjoint", pair))
    flat = tuple(f for key in ("union", "connected", "disjoint") for f in fails[key][:max_failures])
    return ClaimReport(not fails["union"], not fails["connected"], not fails["disjoint"], flat)


# ----------------------------------------------------------------------------
# grading chain


def grading(h: Graph) -> list[int]:
    """Chain from the union of minimal primals up to V(h) via unions of covers."""
    fam = primal_family(h)
    if h.full_mask not in fam.index:
        raise GraphError("the grading chain needs a balanced graph")
    current = 0
    for s in fam.minimal_members():
        current |= s
    chain = []
    while True:
        if current not in fam.index:
            raise InternalCheckError(f"grading element {label_string(current, h.order)} is not primal")
        if chain and current == chain[-1]:
            raise InternalCheckError("grading chain stalled below the full vertex set")
        chain.append(current)
        if current == h.full_mask:
            return chain
        nxt = current
        for s in fam.covering(current):
            nxt |= s
        current = nxt


# ----------------------------------------------------------------------------
# zeta


def prefix_zeta(g: int, cover_list: list[int] | tuple[int, ...]) -> tuple[Fraction, int]:
    """Best prefix ratio ``(v_G + sum (v_J - v_G)) / r`` and the smallest prefix length attaining it."""
    vg = popcount(g)
    total = vg
    best: Fraction | None = None
    best_r = 0
    for r, j in enumerate(cover_list, start=1):
        total += popcount(j) - vg
        value = Fraction(total, r)
        if best is None or value < best:
            best, best_r = value, r
    if best is None:
        raise GraphError("prefix ratio needs at least one cover")
    return best, best_r


@dataclass(frozen=True)
class ZetaResult:
    zeta: Fraction
    witness_g: int
    witness_covers: tuple[int, ...]
    per_g: dict[int, Fraction]

    @property
    def k_mask(self) -> int:
        out = self.witness_g
        for j in self.witness_covers:
            out |= j
        return out


def zeta(h: Graph) -> ZetaResult:
    fam = primal_family(h)
    per_g: dict[int, Fraction] = {}
    best = None
    for g in fam.members:
        ups = fam.covering(g)
        if not ups:
            continue
        value, r = prefix_zeta(g, ups)
        per_g[g] = value
        if best is None or value < best[0]:
            best = (value, g, ups[:r])
    if best is None:
        raise GraphError("no primal set has a cover (strictly balanced or single primal)")
    return ZetaResult(best[0], best[1], tuple(best[2]), per_g)


@dataclass(frozen=True)
class Verdict:
    is_counterexample: bool
    v0: int
    zeta: Fraction | None = None
    witness_g: int | None = None
    witness_covers: tuple[int, ...] = ()
    k_mask: int | None = None


def counterexample_check(h: Graph) -> Verdict:
    """True when some primal G and r of its covers satisfy v_K / r < v0."""
    fam = primal_family(h)
    if not any(fam.upper):
        return Verdict(False, fam.v0)
    z = zeta(h)
    hit = z.zeta < fam.v0
    return Verdict(hit, fam.v0, z.zeta, z.witness_g, z.witness_covers, z.k_mask)

