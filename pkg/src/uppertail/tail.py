"""Sampling G(n, p), exact copy counting in sampled hosts, and Monte Carlo tail estimates.

Every trial draws its edges from a Philox stream keyed by ``(seed, trial)``
through ``numpy.random.SeedSequence``. Results therefore depend only on the
inputs and never on how trials are scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError
from .exponents import log_mu, phi
from .graph import Graph, count_copies, iter_bits, popcount

MAX_HOST = 512
DEFAULT_VOLUME_LIMIT = 2 * 10**8


@dataclass(frozen=True)
class Host:
    """Simple graph on ``n <= 512`` vertices with Python-int adjacency masks."""

    n: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_HOST:
            raise ParameterError(f"host order must be in 1..{MAX_HOST}, got {self.n}")
        if len(self.adj) != self.n:
            raise ParameterError("adjacency length does not match n")

    @classmethod
    def empty(cls, n: int) -> Host:
        return cls(n, (0,) * n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Host:
        """Host from 0-based edges."""
        return cls.empty(n).with_edges(edges)

    @classmethod
    def from_graph(cls, g: Graph, n: int | None = None) -> Host:
        n = g.order if n is None else n
        return cls(n, tuple(g.adj) + (0,) * (n - g.order))

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> Host:
        rows = list(self.adj)
        for u, v in edges:
            if u == v:
                raise ParameterError(f"loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Host(self.n, tuple(rows))

    def union(self, other: Host) -> Host:
        if other.n != self.n:
            raise ParameterError("hosts of different orders")
        return Host(self.n, tuple(a | b for a, b in zip(self.adj, other.adj)))

    @property
    def edge_count(self) -> int:
        return sum(popcount(a) for a in self.adj) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in iter_bits(self.adj[u] >> (u + 1) << (u + 1))]


def _stream(seed, *key: int) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    else:
        if not 0 <= int(seed) < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def _rows_from_matrix(mat: np.ndarray) -> tuple[int, ...]:
    packed = np.packbits(mat, axis=1, bitorder="little")
    return tuple(int.from_bytes(row.tobytes(), "little") for row in packed)


def sample_bits(n: int, p: float, rng: np.random.Generator) -> tuple[int, ...]:
    """Adjacency masks of G(n, p) drawn from ``rng`` (pairs in row-major upper-triangle order)."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    mat = np.zeros((n, n), dtype=bool)
    mat[iu[0][keep], iu[1][keep]] = True
    mat |= mat.T
    return _rows_from_matrix(mat)


def sample_gnp(n: int, p: float, seed, *key: int) -> Host:
    """G(n, p) with a Philox generator seeded by ``SeedSequence(seed, spawn_key=key)``."""
    if not 1 <= n <= MAX_HOST:
        raise ParameterError(f"sampling is capped at n = {MAX_HOST}, got {n}")
    return Host(n, sample_bits(n, p, _stream(seed, *key)))


def count_in_host(host: Host | Graph, pattern: Graph, volume_limit: int | None = DEFAULT_VOLUME_LIMIT) -> int:
    """Exact number of copies of ``pattern``; raises CountingGuardError above the volume bound."""
    return count_copies(host, pattern, volume_limit=volume_limit)


# ----------------------------------------------------------------------------
# Monte Carlo


def worker_count() -> int:
    """Workers from UPPERTAIL_THREADS (unset or 0 means one per CPU)."""
    raw = os.environ.get("UPPERTAIL_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"UPPERTAIL_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ParameterError("UPPERTAIL_THREADS must be non-negative")
    return value or (os.cpu_count() or 1)


def _run_trials(h: Graph, n: int, p: float, seed: int, trials: Sequence[int], volume_limit) -> list[int]:
    return [count_in_host(sample_gnp(n, p, seed, t), h, volume_limit) for t in trials]


def _map_trials(h, n, p, seed, trials: int, workers: int, volume_limit) -> list[int]:
    if workers <= 1 or trials < 2:
        return _run_trials(h, n, p, seed, range(trials), volume_limit)
    blocks = [list(range(i, trials, workers)) for i in range(workers)]
    out = [0] * trials
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_trials, h, n, p, seed, b, volume_limit) for b in blocks]
        for block, fut in zip(blocks, futures):
            for t, x in zip(block, fut.result()):
                out[t] = x
    return out


@dataclass(frozen=True)
class TailEstimate:
    n: int
    p: float
    eps: float
    trials: int
    seed: int
    hit_count: int
    p_hat: float
    interval: tuple[float, float]
    mean_X: float
    var_X: float
    mu: float
    threshold: float
    phi: float
    variance_ratio: float | None
    counts: tuple[int, ...] = field(repr=False, default=())

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.var_X / self.trials)

    @property
    def z_score(self) -> float:
        se = self.standard_error
        if se == 0:
            return 0.0 if self.mean_X == self.mu else math.inf
        return (self.mean_X - self.mu) / se


def hit_threshold(mu_value: float, eps: float) -> int:
    """Smallest integer count that reaches (1 + eps) mu."""
    return math.ceil((1 + eps) * mu_value)


def tail_estimate(
    h: Graph,
    n: int,
    p: float,
    eps: float,
    trials: int,
    seed: int,
    *,
    workers: int | None = None,
    volume_limit: int | None = DEFAULT_VOLUME_LIMIT,
) -> TailEstimate:
    if trials < 1:
        raise ParameterError("trials must be positive")
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    lm = log_mu(h, n, p)
    mu_value = math.exp(lm)
    threshold = (1 + eps) * mu_value
    need = hit_threshold(mu_value, eps)
    workers = worker_count() if workers is None else workers
    xs = _map_trials(h, n, p, seed, trials, min(workers, trials), volume_limit)

    hits = sum(1 for x in xs if x >= need)
    arr = np.array(xs, dtype=float)
    mean = float(arr.mean())
    var = float(arr.var(ddof=1)) if trials > 1 else 0.0
    from scipy.stats import binomtest  # deferred: scipy.stats is slow to import

    ci = binomtest(hits, trials).proportion_ci(confidence_level=0.95, method="wilson")
    if p > 0 and h.edge_count:
        phi_value = phi(h, n, p).value
        ratio = var * phi_value / mu_value**2
    else:
        phi_value, ratio = 0.0, None
    return TailEstimate(
        n=n,
        p=p,
        eps=eps,
        trials=trials,
        seed=seed,
        hit_count=hits,
        p_hat=hits / trials,
        interval=(float(ci.low), float(ci.high)),
        mean_X=mean,
        var_X=var,
        mu=mu_value,
        threshold=threshold,
        phi=phi_value,
        variance_ratio=ratio,
        counts=tuple(xs),
    )
