"""Planted lower-bound constructions: plans with deterministic certificates, and their execution.

Three constructions are supported:

* ``pendant``: find a cycle in a first round, then give one cycle vertex ``z``
  extra neighbours; any ``r`` of them complete a copy of the cycle with ``r``
  pendants.
* ``general``: find an ordered copy of a primal ``G``, then plant ``z``
  vertex-disjoint extensions of ``G`` to each covering primal ``J_i``, giving
  ``z^r`` copies of ``K = J_1 u ... u J_r``; a third round fills in the rest.
* ``mixed``: the two-mechanism plan for ``badnews(r)``, ``r in {7, 8}``; analytic only.

``log_cost`` is always ``-log`` of the plan's probability bound, so larger is rarer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import FeasibilityError, GraphError, InternalCheckError, ParameterError
from .exponents import log_falling, log_mu, log_omega
from .families import badnews
from .graph import (
    Graph,
    count_extensions,
    cycle_graph,
    find_embedding,
    induced_subgraph,
    iter_bits,
    label_string,
    popcount,
)
from .lattice import covers, primal_family
from .tail import Host, _stream, count_in_host, hit_threshold, sample_gnp

DEFAULT_C_H = 4.0
DEFAULT_SMALL_C_H = 0.25


def log_binom(n: int | float, k: int) -> float:
    """log C(n, k) for possibly astronomically large integer ``n``."""
    if k < 0 or k > n:
        return -math.inf
    if k == 0:
        return 0.0
    if n < 2**52:
        return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    j = np.arange(k, dtype=float)
    return k * math.log(n) + float(np.log1p(-j / float(n)).sum()) - math.lgamma(k + 1)


def split_probability(p: float, *others: float) -> float:
    """Round probability ``q`` with ``(1 - q) * prod(1 - o) = 1 - p``."""
    # q = (p - (1 - rest)) / rest, with 1 - rest formed via log1p/expm1 so
    # that tiny p keeps full relative precision
    log_rest = sum(math.log1p(-o) for o in others)
    rest = math.exp(log_rest)
    q = (p + math.expm1(log_rest)) / rest
    if q < -1e-15:
        raise ParameterError("round probabilities exceed p")
    q = max(q, 0.0)
    total = 1.0 - (1.0 - q) * rest
    if abs(total - p) > 1e-12:
        raise InternalCheckError(f"round probabilities compose to {total}, not {p}")
    return q


def _ceil_exp(log_value: float) -> int:
    if log_value > 700:
        raise FeasibilityError("plan size overflows double precision")
    return max(1, math.ceil(math.exp(log_value)))


@dataclass(frozen=True)
class PlantPlan:
    """A planted construction and its guarantees.

    ``certificate_copies`` counts copies created by the planted structure
    alone; ``certificate_target`` is what the construction promises to reach:
    ``ceil((1+eps) mu_H)`` copies of H for pendant and mixed plans,
    ``ceil(C_H eps mu_K)`` copies of K for general plans.
    """

    kind: str
    n: int
    p: float
    eps: float
    rounds: tuple[float, ...]
    z: int
    certificate_copies: int
    certificate_target: int
    log_cost: float
    log_mu_H: float
    constants: dict = field(default_factory=dict)
    delta: float | None = None
    z_minimal: int | None = None
    z_star: int | None = None
    u_size: int | None = None
    cost_parts: dict = field(default_factory=dict)
    host: Graph | None = field(default=None, repr=False)
    g_mask: int | None = None
    cover_masks: tuple[int, ...] = ()
    dropped: tuple[int, ...] = ()
    extra: dict = field(default_factory=dict)

    @property
    def certificate_ok(self) -> bool:
        return self.certificate_copies >= self.certificate_target

    @property
    def threshold(self) -> int:
        return hit_threshold(math.exp(self.log_mu_H), self.eps)


def _check_common(n: int, p: float, eps: float) -> None:
    if not 0.0 < p < 1.0:
        raise ParameterError(f"planting needs 0 < p < 1, got {p}")
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if n < 1:
        raise ParameterError("n must be positive")


# ----------------------------------------------------------------------------
# pendant


def pendant_z(r: int, log_mu_h: float, eps: float) -> tuple[int, int]:
    """(ceiling-formula z, smallest z with C(z, r) >= ceil((1+eps) mu))."""
    z = _ceil_exp(math.log(r) + (math.log1p(eps) + log_mu_h) / r)
    target = math.ceil((1 + eps) * math.exp(log_mu_h))
    lo, hi = r, max(z, r)
    while math.comb(hi, r) < target:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if math.comb(mid, r) >= target:
            hi = mid
        else:
            lo = mid + 1
    return z, lo


def plan_pendant(l: int, r: int, n: int, p: float, eps: float) -> PlantPlan:
    from .families import cycle_pendant

    _check_common(n, p, eps)
    if r < 1:
        raise ParameterError("pendant plans need r >= 1")
    h = cycle_pendant(l, r)
    lm = log_mu(h, n, p)
    z, z_min = pendant_z(r, lm, eps)
    if z + l > n:
        raise FeasibilityError(f"z + l = {z + l} exceeds n = {n}")
    p2 = p / 2
    p1 = split_probability(p, p2)
    free = n - l
    cost = -(log_binom(free, z) + z * math.log(p2) + (free - z) * math.log1p(-p2))
    return PlantPlan(
        kind="pendant",
        n=n,
        p=p,
        eps=eps,
        rounds=(p1, p2),
        z=z,
        certificate_copies=math.comb(z, r),
        certificate_target=hit_threshold(math.exp(lm), eps),
        log_cost=cost,
        log_mu_H=lm,
        z_minimal=z_min,
        host=h,
        extra={"l": l, "r": r},
    )


@dataclass(frozen=True)
class PendantOutcome:
    cycle_found: bool
    planted: bool
    x_h: int
    hit: bool
    root: int | None = None


def execute_pendant(plan: PlantPlan, seed: int) -> PendantOutcome:
    if plan.kind != "pendant":
        raise ParameterError("execute_pendant needs a pendant plan")
    l = plan.extra["l"]
    p1, p2 = plan.rounds
    n = plan.n
    e1 = sample_gnp(n, p1, seed, 1)
    e2 = sample_gnp(n, p2, seed, 2)
    host = e1.union(e2)
    emb = find_embedding(e1.adj, cycle_graph(l))
    root = None
    if emb is not None:
        root = emb[0]
        outside = np.array(sorted(set(range(n)) - set(emb)))
        chosen = _stream(seed, 3).choice(outside, size=plan.z, replace=False)
        host = host.with_edges((root, int(x)) for x in sorted(chosen))
    x = count_in_host(host, plan.host)
    planted = emb is not None
    if planted and x < plan.certificate_copies:
        raise InternalCheckError(f"planted host has {x} copies, below the certificate {plan.certificate_copies}")
    return PendantOutcome(planted, planted, x, x >= plan.threshold, root)


# ----------------------------------------------------------------------------
# general


def _reduce(h: Graph, g: int, cover_list: list[int], n: int, p: float, eps: float) -> tuple[list[int], list[int]]:
    """Drop covers whose ratio mu_J / mu_G exceeds (eps mu_K)^(1/r), worst first; keeps at least one."""
    lg = log_mu(induced_subgraph(h, g), n, p)
    kept, dropped = list(cover_list), []
    while len(kept) > 1:
        k = g
        for j in kept:
            k |= j
        limit = (math.log(eps) + log_mu(induced_subgraph(h, k), n, p)) / len(kept)
        ratios = [log_mu(induced_subgraph(h, j), n, p) - lg for j in kept]
        worst = max(range(len(kept)), key=lambda i: (ratios[i], -i))
        if ratios[worst] <= limit:
            break
        dropped.append(kept.pop(worst))
    return kept, dropped


def plan_general(
    h: Graph,
    g: int,
    cover_list: list[int] | tuple[int, ...],
    n: int,
    p: float,
    eps: float,
    C_H: float = DEFAULT_C_H,
    c_H: float = DEFAULT_SMALL_C_H,
) -> PlantPlan:
    _check_common(n, p, eps)
    if not cover_list:
        raise GraphError("a general plan needs at least one cover")
    if len(set(cover_list)) != len(cover_list):
        raise GraphError("covers must be distinct")
    fam = primal_family(h)
    for j in cover_list:
        if not covers(fam, g, j):
            raise GraphError(f"{label_string(j, h.order)} does not cover {label_string(g, h.order)}")
    if not 0 < c_H <= 1 or C_H <= 0:
        raise ParameterError("need C_H > 0 and 0 < c_H <= 1")

    kept, dropped = _reduce(h, g, list(cover_list), n, p, eps)
    r = len(kept)
    k = g
    for j in kept:
        k |= j
    lk = log_mu(induced_subgraph(h, k), n, p)
    z = _ceil_exp((math.log(C_H) + math.log(eps) + lk) / r)

    delta = c_H * min(eps, 1.0)
    p1 = p2 = delta * p
    p3 = split_probability(p, p1, p2)
    vg = popcount(g)
    sizes = [(n - vg) // r + (1 if i < (n - vg) % r else 0) for i in range(r)]
    ks = [popcount(j) - vg for j in kept]
    if z * max(ks) * r >= n or any(z * ki > ni for ki, ni in zip(ks, sizes)):
        raise FeasibilityError(f"z = {z} disjoint extensions do not fit into n = {n}")

    eg = _edges_in(h, g)
    cost = 0.0
    for j, ki, ni in zip(kept, ks, sizes):
        cost -= log_binom(math.comb(ni, ki), z) + (_edges_in(h, j) - eg) * z * math.log(p2)
    target = math.ceil(C_H * eps * math.exp(lk)) if lk < 700 else None
    return PlantPlan(
        kind="general",
        n=n,
        p=p,
        eps=eps,
        rounds=(p1, p2, p3),
        z=z,
        certificate_copies=z**r,
        certificate_target=target if target is not None else z**r,
        log_cost=cost,
        log_mu_H=log_mu(h, n, p),
        constants={"C_H": C_H, "c_H": c_H},
        delta=delta,
        host=h,
        g_mask=g,
        cover_masks=tuple(kept),
        dropped=tuple(dropped),
        extra={"block_sizes": sizes, "log_mu_K": lk},
    )


def _edges_in(h: Graph, s: int) -> int:
    return sum(popcount(h.adj[u] & s) for u in iter_bits(s)) // 2


@dataclass(frozen=True)
class GeneralOutcome:
    g_found: bool
    planted: bool
    extension_counts: tuple[int, ...]
    k_copies: int
    x_h: int
    hit: bool
    y_h: int
    y_expected: float


def execute_general(plan: PlantPlan, seed: int) -> GeneralOutcome:
    if plan.kind != "general":
        raise ParameterError("execute_general needs a general plan")
    h, n, g = plan.host, plan.n, plan.g_mask
    p1, p2, p3 = plan.rounds
    g_verts = list(iter_bits(g))
    e1 = sample_gnp(n, p1, seed, 1)
    e2 = sample_gnp(n, p2, seed, 2)
    e3 = sample_gnp(n, p3, seed, 3)
    emb = find_embedding(e1.adj, induced_subgraph(h, g))

    counts: list[int] = []
    k_copies = 0
    host = e1.union(e2)
    y_host = e3
    if emb is not None:
        image = {u: emb[i] for i, u in enumerate(g_verts)}
        rest = [x for x in range(n) if x not in set(emb)]
        planted_edges: list[tuple[int, int]] = []
        blocks: list[list[int]] = []
        start = 0
        for size in plan.extra["block_sizes"]:
            blocks.append(rest[start : start + size])
            start += size
        for j, block in zip(plan.cover_masks, blocks):
            new = [u for u in iter_bits(j & ~g)]
            for c in range(plan.z):
                where = dict(image)
                where.update({u: block[c * len(new) + t] for t, u in enumerate(new)})
                for u, v in _edge_pairs(h, j):
                    if not (g >> u & 1 and g >> v & 1):
                        planted_edges.append((where[u], where[v]))
        structure = Host.empty(n).with_edges(planted_edges)
        base = Host.empty(n).with_edges((image[u], image[v]) for u, v in _edge_pairs(h, g))
        structure = structure.union(base)
        k_copies = 1
        for j, block in zip(plan.cover_masks, blocks):
            jg = induced_subgraph(h, j)
            local = {t: image[u] for t, u in enumerate(iter_bits(j)) if g >> u & 1}
            allowed = sum(1 << x for x in block)
            found = count_extensions(structure.adj, jg, local, allowed)
            per_copy = count_extensions(jg.adj, jg, {t: t for t in local}, jg.full_mask & ~_local_mask(local))
            if found != plan.z * per_copy:
                raise InternalCheckError(f"block holds {found} extensions, expected {plan.z} x {per_copy}")
            counts.append(found)
            k_copies *= found // per_copy
        if k_copies != plan.certificate_copies:
            raise InternalCheckError("planted structure does not realise z^r copies of K")
        host = host.union(structure)
        cut = sum(1 << x for x in emb)
        y_host = Host(n, tuple(0 if cut >> x & 1 else a & ~cut for x, a in enumerate(e3.adj)))
    host = host.union(e3)
    x = count_in_host(host, h)
    y = count_in_host(y_host, h)
    vg = len(g_verts)
    y_expected = math.exp(log_mu(h, n - vg, p3)) if emb is not None else math.exp(log_mu(h, n, p3))
    return GeneralOutcome(emb is not None, emb is not None, tuple(counts), k_copies, x, x >= plan.threshold, y, y_expected)


def _local_mask(local: dict[int, int]) -> int:
    out = 0
    for t in local:
        out |= 1 << t
    return out


def _edge_pairs(h: Graph, s: int) -> list[tuple[int, int]]:
    return [(u, v) for u, v in h.edges() if s >> u & 1 and s >> v & 1]


# ----------------------------------------------------------------------------
# mixed


def mixed_constants(r: int) -> dict[str, Fraction]:
    v = 3 * r + 6
    gamma = Fraction(1, r**3)
    c_h = 2 / (Fraction(v, r) - (r - 1) * gamma)
    d_h = 1 / (Fraction(v, r) - 2 + gamma / 2)
    return {"gamma": gamma, "c_H": c_h, "d_H": d_h}


def plan_mixed(r: int, n: int, p: float, eps: float) -> PlantPlan:
    _check_common(n, p, eps)
    if r < 7:
        raise ParameterError("the mixed plan is defined for r >= 7")
    h = badnews(r)
    v = h.order
    consts = mixed_constants(r)
    gamma = float(consts["gamma"])
    lm = log_mu(h, n, p)
    lw = log_omega(h, n, p)
    base = (math.log1p(eps) + lm) / r
    z = _ceil_exp(math.log(r) + base - gamma * lw)
    z_star = _ceil_exp(base + (r - 1) * gamma * lw)
    u_size = math.ceil(2 * math.sqrt(z_star))
    p2 = p / 2
    p1 = split_probability(p, p2)
    v1 = (n - 6) // 2
    v2 = n - 6 - v1
    if 3 * z > v1 or u_size + 1 > v2:
        raise FeasibilityError(f"z = {z} triangles or |U| = {u_size} do not fit into n = {n}")
    log_tri = log_falling(v1, 3 * z) if 3 * z < 10**6 else math.lgamma(v1 + 1) - math.lgamma(v1 - 3 * z + 1)
    disjoint = -(log_tri - z * math.log(6) + 4 * z * math.log(p2) - math.lgamma(z + 1))
    clustered = -3 * u_size * math.log(p2)
    loglog = math.log(math.log(n))
    return PlantPlan(
        kind="mixed",
        n=n,
        p=p,
        eps=eps,
        rounds=(p1, p2),
        z=z,
        certificate_copies=math.comb(z, r - 1) * math.comb(u_size, 2),
        certificate_target=hit_threshold(math.exp(lm), eps),
        log_cost=disjoint + clustered,
        log_mu_H=lm,
        constants=dict(consts),
        z_star=z_star,
        u_size=u_size,
        cost_parts={"disjoint": disjoint, "clustered": clustered},
        host=h,
        extra={
            "r": r,
            "omega_ln": lw,
            "in_window": float(consts["c_H"]) * loglog < lw < float(consts["d_H"]) * loglog,
            "v_H": v,
        },
    )
