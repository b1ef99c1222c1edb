from __future__ import annotations

import math

import numpy as np
import pytest

import oracles

from uppertail.errors import CountingGuardError, ParameterError
from uppertail.families import cycle_pendant
from uppertail.graph import complete_graph, cycle_graph
from uppertail.tail import (
    Host,
    count_in_host,
    hit_threshold,
    sample_gnp,
    tail_estimate,
    worker_count,
)

TRIANGLE = complete_graph(3)


def test_sample_extremes():
    assert sample_gnp(30, 0.0, 1).edge_count == 0
    full = sample_gnp(30, 1.0, 1)
    assert full.edge_count == math.comb(30, 2)
    assert count_in_host(full, TRIANGLE) == math.comb(30, 3)


def test_sample_is_symmetric_and_simple():
    h = sample_gnp(80, 0.3, 5)
    for u in range(h.n):
        assert not h.has_edge(u, u)
        for v in range(h.n):
            assert h.has_edge(u, v) == h.has_edge(v, u)


def test_sample_edge_count_moments():
    n, p = 100, 0.5
    pairs = math.comb(n, 2)
    mean, sd = pairs * p, math.sqrt(pairs * p * (1 - p))
    counts = np.array([sample_gnp(n, p, 11, s).edge_count for s in range(100)])
    assert np.all(np.abs(counts - mean) <= 4 * sd)
    assert abs(counts.mean() - mean) <= 3 * sd / math.sqrt(len(counts))


def test_sample_deterministic_and_keyed():
    a = sample_gnp(120, 0.1, 42, 3)
    assert a == sample_gnp(120, 0.1, 42, 3)
    assert a != sample_gnp(120, 0.1, 42, 4)
    assert a != sample_gnp(120, 0.1, 43, 3)


def test_sample_rejects():
    with pytest.raises(ParameterError):
        sample_gnp(513, 0.1, 0)
    with pytest.raises(ParameterError):
        sample_gnp(10, 1.5, 0)
    with pytest.raises(ParameterError):
        sample_gnp(10, 0.5, -1)


def test_host_operations():
    h = Host.from_edges(6, [(0, 1), (1, 2)])
    g = Host.from_edges(6, [(2, 0), (3, 4)])
    u = h.union(g)
    assert u.edge_count == 4
    assert count_in_host(u, TRIANGLE) == 1
    assert Host.from_graph(cycle_graph(4), 10).edge_count == 4
    with pytest.raises(ParameterError):
        h.with_edges([(2, 2)])
    with pytest.raises(ParameterError):
        h.union(Host.empty(5))


def test_count_in_host_examples():
    h = sample_gnp(60, 0.2, 9)
    assert count_in_host(h, complete_graph(2)) == h.edge_count
    planted = Host.from_graph(cycle_pendant(4, 9), 200)
    assert count_in_host(planted, cycle_pendant(4, 3)) == math.comb(9, 3)


def test_count_guard():
    with pytest.raises(CountingGuardError):
        count_in_host(sample_gnp(200, 0.9, 1), complete_graph(6), volume_limit=10**5)


def test_threshold_uses_exact_mu():
    assert hit_threshold(34.22, 1.0) == 69
    assert hit_threshold(10.0, 1.0) == 20


def test_tail_zero_p():
    est = tail_estimate(TRIANGLE, 30, 0.0, 1.0, 20, 3, workers=1)
    assert est.mu == 0 and est.threshold == 0
    assert est.hit_count == 20 and est.p_hat == 1.0
    assert est.variance_ratio is None


def test_tail_triangle_mean():
    est = tail_estimate(TRIANGLE, 60, 0.1, 1.0, 2000, 7, workers=1)
    assert est.mu == pytest.approx(math.comb(60, 3) * 1e-3)
    assert abs(est.z_score) <= 3
    lo, hi = est.interval
    assert 0 <= lo <= est.p_hat <= hi <= 1
    assert 0 <= est.hit_count <= est.trials
    assert est.threshold == pytest.approx(2 * est.mu)


@pytest.mark.parametrize("h", [complete_graph(2), TRIANGLE, cycle_pendant(3, 2)], ids=["K2", "K3", "C3+2"])
@pytest.mark.parametrize("trials", [500, 2000, 8000])
def test_tail_mean_non_explosive(h, trials):
    est = tail_estimate(h, 60, 0.1, 1.0, trials, 1000 + trials, workers=1)
    assert abs(est.z_score) <= 4


@pytest.mark.parametrize("h", [TRIANGLE, cycle_pendant(3, 2), cycle_graph(4)], ids=["K3", "C3+2", "C4"])
@pytest.mark.parametrize("n", [40, 60, 100])
@pytest.mark.parametrize("np_", [4, 8])
def test_variance_ratio_window(h, n, np_):
    est = tail_estimate(h, n, np_ / n, 1.0, 2000, 17, workers=1)
    assert 1 / 8 <= est.variance_ratio <= 8


@pytest.mark.parametrize("h", [TRIANGLE, cycle_graph(4)], ids=["K3", "C4"])
@pytest.mark.parametrize("n, np_", [(40, 4), (40, 8), (60, 8)])
def test_empirical_variance_matches_exact(h, n, np_):
    p = np_ / n
    est = tail_estimate(h, n, p, 1.0, 2000, 23, workers=1)
    exact = oracles.exact_variance(h, n, p)
    # sample variance of a sum of indicators: allow a generous 25% relative band
    assert est.var_X == pytest.approx(exact, rel=0.25)


def test_tail_independent_of_workers(monkeypatch):
    ref = tail_estimate(TRIANGLE, 40, 0.15, 1.0, 37, 5, workers=1)
    for w in (2, 3):
        assert tail_estimate(TRIANGLE, 40, 0.15, 1.0, 37, 5, workers=w) == ref
    monkeypatch.setenv("UPPERTAIL_THREADS", "2")
    assert worker_count() == 2
    assert tail_estimate(TRIANGLE, 40, 0.15, 1.0, 37, 5) == ref


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("UPPERTAIL_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.delenv("UPPERTAIL_THREADS")
    assert worker_count() >= 1
    monkeypatch.setenv("UPPERTAIL_THREADS", "-1")
    with pytest.raises(ParameterError):
        worker_count()
    monkeypatch.setenv("UPPERTAIL_THREADS", "two")
    with pytest.raises(ParameterError):
        worker_count()


def test_tail_rejects():
    with pytest.raises(ParameterError):
        tail_estimate(TRIANGLE, 30, 0.1, 1.0, 0, 1)
    with pytest.raises(ParameterError):
        tail_estimate(TRIANGLE, 30, 0.1, 0.0, 10, 1)
