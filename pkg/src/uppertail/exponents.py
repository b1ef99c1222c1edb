"""Expected counts and the exponents competing for the upper tail, all in natural-log scale.

Expected counts follow the unlabelled-copy convention
``mu_G = (n)_{v_G} / |Aut(G)| * p^{e_G}``.

Minimisations over subgraphs (Phi, M) run over every non-empty edge subset of
H, taken with its vertex support. Edge subsets are grouped into
``(vertices, edges)`` classes. For each subset, an upper bound on ``|Aut|`` (the
product of factorials of degree-class sizes) gives a lower bound on its
value, so exact automorphism counts are needed only for the few subsets that
could still beat the running minimum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .density import fractional_independence, m_density
from .errors import GraphError, ParameterError
from .graph import Graph, automorphism_count, edge_subgraph, induced_subgraph, iter_bits, mask_connected, popcount

EXACT_EDGE_CAP = 22
FALLBACK_SMALL_ORDER = 4
_CHUNK = 1 << 20
_LOG_FACT = np.array([math.lgamma(k + 1) for k in range(64)])

MECHANISMS = ("disjoint", "clustered", "locally_disjoint")


def _check_np(n: int, p: float) -> None:
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ParameterError(f"p must lie in [0, 1], got {p}")


def log_falling(n: int, k: int) -> float:
    """log of n (n-1) ... (n-k+1)."""
    return math.fsum(math.log(n - i) for i in range(k))


def _log_mu_counts(n: int, p: float, v: int, e: int, log_aut: float) -> float:
    if e and p == 0.0:
        return -math.inf
    return log_falling(n, v) - log_aut + (e * math.log(p) if e else 0.0)


def log_mu(g: Graph, n: int, p: float) -> float:
    """Natural log of the expected number of copies of ``g`` in G(n, p); -inf when p = 0."""
    _check_np(n, p)
    if n < g.order:
        raise ParameterError(f"n = {n} is smaller than the graph order {g.order}")
    return _log_mu_counts(n, p, g.order, g.edge_count, math.log(automorphism_count(g)))


def mu(g: Graph, n: int, p: float) -> float:
    """Expected number of copies in linear scale (``inf`` when not representable)."""
    value = log_mu(g, n, p)
    try:
        return math.exp(value)
    except OverflowError:
        return math.inf


# ----------------------------------------------------------------------------
# subgraph catalogues


@dataclass
class _Class:
    v: int
    e: int
    ids: np.ndarray
    log_bound: np.ndarray
    max_log_bound: float


@dataclass
class _Catalogue:
    host: Graph
    by_edges: bool
    classes: list[_Class]
    _aut: dict[int, float] = field(default_factory=dict)
    _alpha: dict[int, Fraction] = field(default_factory=dict)

    def subgraph(self, ident: int) -> Graph:
        if self.by_edges:
            edges = self.host.edges()
            return edge_subgraph(self.host, [edges[k] for k in iter_bits(ident)])
        return induced_subgraph(self.host, ident)

    def log_aut(self, ident: int) -> float:
        if ident not in self._aut:
            self._aut[ident] = math.log(automorphism_count(self.subgraph(ident)))
        return self._aut[ident]

    def alpha(self, ident: int) -> Fraction:
        if ident not in self._alpha:
            self._alpha[ident] = fractional_independence(self.subgraph(ident))
        return self._alpha[ident]

    def describe(self, ident: int) -> tuple[int, tuple[tuple[int, int], ...]]:
        """Vertex mask and 1-based edges of a catalogue entry."""
        if self.by_edges:
            edges = [self.host.edges()[k] for k in iter_bits(ident)]
        else:
            edges = [(u, v) for u, v in self.host.edges() if ident >> u & 1 and ident >> v & 1]
        verts = 0
        for u, v in edges:
            verts |= 1 << u | 1 << v
        return verts, tuple((u + 1, v + 1) for u, v in edges)


def _group(v: np.ndarray, e: np.ndarray, ids: np.ndarray, log_bound: np.ndarray) -> list[_Class]:
    width = int(e.max()) + 1
    key = v.astype(np.int64) * width + e
    order = np.argsort(key, kind="stable")
    key, ids, log_bound = key[order], ids[order], log_bound[order]
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    ends = np.r_[starts[1:], key.size]
    out = []
    for a, b in zip(starts, ends):
        k = int(key[a])
        lb = log_bound[a:b]
        out.append(_Class(k // width, k % width, ids[a:b], lb, float(lb.max())))
    return out


@lru_cache(maxsize=32)
def _edge_catalogue(h: Graph) -> _Catalogue:
    edges = h.edges()
    e = len(edges)
    total = 1 << e
    ends = np.array([(1 << u) | (1 << v) for u, v in edges], dtype=np.uint32)
    support = np.zeros(total, dtype=np.uint32)
    for k in range(e):
        support[1 << k : 1 << (k + 1)] = support[: 1 << k] | ends[k]
    incident = [sum(1 << k for k, (a, b) in enumerate(edges) if u in (a, b)) for u in range(h.order)]
    log_bound = np.zeros(total)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.uint32)
        deg = np.stack([np.bitwise_count(idx & np.uint32(inc)) for inc in incident])
        for d in range(1, h.max_degree + 1):
            log_bound[start : start + idx.size] += _LOG_FACT[(deg == d).sum(axis=0)]
    ids = np.arange(1, total, dtype=np.int64)
    v = np.bitwise_count(support[1:]).astype(np.int64)
    ecount = np.bitwise_count(ids.astype(np.uint32)).astype(np.int64)
    return _Catalogue(h, True, _group(v, ecount, ids, log_bound[1:]))


def _degree_class_bound(g: Graph, mask: int) -> float:
    counts: dict[int, int] = {}
    for u in iter_bits(mask):
        d = popcount(g.adj[u] & mask)
        counts[d] = counts.get(d, 0) + 1
    return float(sum(_LOG_FACT[c] for c in counts.values()))


@lru_cache(maxsize=32)
def _induced_catalogue(h: Graph) -> _Catalogue:
    """Induced candidates for graphs above the edge cap: primal sets plus small connected sets."""
    from .lattice import primal_family

    masks: set[int] = set()
    try:
        masks.update(primal_family(h).members)
    except GraphError:
        pass
    for k in range(2, FALLBACK_SMALL_ORDER + 1):
        for combo in itertools.combinations(range(h.order), k):
            s = sum(1 << u for u in combo)
            if mask_connected(h, s):
                masks.add(s)
    masks.add(h.full_mask)
    ordered = sorted(masks, key=lambda s: (popcount(s), s))
    v = np.array([popcount(s) for s in ordered], dtype=np.int64)
    e = np.array([sum(popcount(h.adj[u] & s) for u in iter_bits(s)) // 2 for s in ordered], dtype=np.int64)
    lb = np.array([_degree_class_bound(h, s) for s in ordered])
    return _Catalogue(h, False, _group(v, e, np.array(ordered, dtype=np.int64), lb))


def _catalogue(h: Graph) -> _Catalogue:
    if h.edge_count < 1:
        raise GraphError("the minimisation needs a graph with at least one edge")
    if h.edge_count <= EXACT_EDGE_CAP:
        return _edge_catalogue(h)
    return _induced_catalogue(h)


# ----------------------------------------------------------------------------
# minimisation


@dataclass(frozen=True)
class Minimizer:
    """Minimum value (log scale) over subgraphs with at least one edge, with its witness."""

    log_value: float
    vertices: int
    edges: tuple[tuple[int, int], ...]
    approximate: bool

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf


Score = Callable[[float, Fraction, int], float]
Bound = Callable[[np.ndarray, int], np.ndarray]


def _minimise(h: Graph, n: int, p: float, score: Score, bound: Bound, needs_alpha: bool) -> Minimizer:
    cat = _catalogue(h)
    log_p = math.log(p)
    if n < h.order:
        raise ParameterError(f"n = {n} is smaller than the graph order {h.order}")
    scored = []
    for c in cat.classes:
        base = log_falling(n, c.v) + c.e * log_p
        scored.append((float(bound(base - c.max_log_bound, c.v)), c.v, c.e, base, c))
    scored.sort(key=lambda t: t[:3])
    best = math.inf
    best_id = None
    for class_lb, _, _, base, c in scored:
        if class_lb >= best:
            break
        member_lb = bound(base - c.log_bound, c.v)
        for k in np.argsort(member_lb, kind="stable"):
            if member_lb[k] >= best:
                break
            ident = int(c.ids[k])
            log_m = base - cat.log_aut(ident)
            alpha = cat.alpha(ident) if needs_alpha else Fraction(0)
            value = score(log_m, alpha, c.v)
            if value < best:
                best, best_id = value, ident
    verts, edges = cat.describe(best_id)
    return Minimizer(best, verts, edges, not cat.by_edges)


def phi(h: Graph, n: int, p: float) -> Minimizer:
    """Minimum expected count over subgraphs with at least one edge (log scale)."""
    _check_np(n, p)
    if p == 0.0:
        raise ParameterError("the minimisation needs p > 0")
    return _minimise(h, n, p, lambda lm, a, v: lm, lambda lb, v: np.asarray(lb), False)


def _root_bound(lb, v: int):
    # alpha* lies in [v/2, v-1] once there is an edge
    return np.where(lb >= 0, lb / (v - 1), lb / (v / 2))


def _alt_bound(lb, v: int):
    # v / alpha* lies in [v/(v-1), 2]
    return np.where(lb >= 0, lb * v / (v - 1), 2 * lb)


@dataclass(frozen=True)
class MParameter:
    log_value: float
    branch: str
    witness: Minimizer | None

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf


def m_branch_small(h: Graph, n: int, p: float) -> bool:
    """True on the ``p < n^(-1/Delta)`` branch (strict, evaluated in log scale)."""
    return math.log(p) < -math.log(n) / h.max_degree


def M_parameter(h: Graph, n: int, p: float) -> MParameter:
    _check_np(n, p)
    if not 0.0 < p < 1.0:
        raise ParameterError("M is defined for 0 < p < 1")
    if h.edge_count < 1:
        raise GraphError("M needs a graph with at least one edge")
    if m_branch_small(h, n, p):
        w = _minimise(h, n, p, lambda lm, a, v: lm / float(a), _root_bound, True)
        return MParameter(w.log_value, "small_p", w)
    return MParameter(2 * math.log(n) + h.max_degree * math.log(p), "dense", None)


def M_parameter_alt(h: Graph, n: int, p: float) -> MParameter:
    """Variant with exponent ``v_G / alpha*_G`` on the small-p branch; the dense branch is shared."""
    _check_np(n, p)
    if not 0.0 < p < 1.0:
        raise ParameterError("M is defined for 0 < p < 1")
    if m_branch_small(h, n, p):
        w = _minimise(h, n, p, lambda lm, a, v: lm * v / float(a), _alt_bound, True)
        return MParameter(w.log_value, "small_p", w)
    return MParameter(2 * math.log(n) + h.max_degree * math.log(p), "dense", None)


# ----------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class ExponentReport:
    """Competing exponents at one ``(n, p, eps)``; every ``*_ln`` field is a natural log."""

    n: int
    p: float
    eps: float
    log_mu_H: float
    phi_ln: float
    M_ln: float
    M_log_term_ln: float
    zeta_term_ln: float | None
    conjectured_min_ln: float
    mechanism: str
    variance_estimate_ln: float
    omega_ln: float
    approximate: bool
    M_branch: str
    zeta: Fraction | None = None
    zeta_note: str | None = None
    phi_witness: Minimizer | None = None
    M_witness: Minimizer | None = None
    M_alt_ln: float | None = None


def log_omega(h: Graph, n: int, p: float) -> float:
    """log(n p^{m_H})."""
    return math.log(n) + float(m_density(h).value) * math.log(p)


def zeta_term_ln(zeta_value: Fraction, log_w: float) -> float | None:
    """log of omega^zeta * log(omega); undefined (None) unless omega > 1."""
    if log_w <= 0:
        return None
    return float(zeta_value) * log_w + math.log(log_w)


def conjecture_report(h: Graph, n: int, p: float, eps: float) -> ExponentReport:
    from .lattice import zeta as zeta_of

    _check_np(n, p)
    if not 0.0 < p < 1.0:
        raise ParameterError("the report needs 0 < p < 1")
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    lm = log_mu(h, n, p)
    ph = phi(h, n, p)
    mp = M_parameter(h, n, p)
    alt = M_parameter_alt(h, n, p)
    m_term = mp.log_value + math.log(-math.log(p))
    lw = log_omega(h, n, p)

    z_value = z_term = note = None
    try:
        z_value = zeta_of(h).zeta
    except GraphError:
        note = "no primal set has a cover"
    if z_value is not None:
        z_term = zeta_term_ln(z_value, lw)
        if z_term is None:
            note = "omega <= 1, term undefined"

    terms = [ph.log_value, m_term] + ([z_term] if z_term is not None else [])
    best = min(range(len(terms)), key=lambda i: (terms[i], i))
    return ExponentReport(
        n=n,
        p=p,
        eps=eps,
        log_mu_H=lm,
        phi_ln=ph.log_value,
        M_ln=mp.log_value,
        M_log_term_ln=m_term,
        zeta_term_ln=z_term,
        conjectured_min_ln=terms[best],
        mechanism=MECHANISMS[best],
        variance_estimate_ln=2 * lm - ph.log_value,
        omega_ln=lw,
        approximate=ph.approximate or (mp.witness is not None and mp.witness.approximate),
        M_branch=mp.branch,
        zeta=z_value,
        zeta_note=note,
        phi_witness=ph,
        M_witness=mp.witness,
        M_alt_ln=alt.log_value,
    )
