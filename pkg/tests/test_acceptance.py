"""Acceptance criteria 1-9.

Each test prints one ``criterion N ...: PASS|FAIL`` line; conftest aggregates
them into a per-criterion summary at the end of the run.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import networkx as nx

import oracles
from conftest import atlas, from_nx, random_connected
from uppertail.density import fractional_independence, is_balanced, m_density
from uppertail.exponents import M_parameter, conjecture_report, m_branch_small, phi
from uppertail.families import GlueSpec, badnews, cycle_pendant, fig2_example, glue, snail
from uppertail.graph import Graph, complete_graph, cycle_graph, induced_subgraph, parse_label_string, popcount
from uppertail.lattice import claim_suite, counterexample_check, grading, primal_family, zeta
from uppertail.plant import execute_pendant, mixed_constants, plan_mixed, plan_pendant
from uppertail.tail import tail_estimate

TESTS = Path(__file__).parent
N_WINDOW = 10**9


def L(text: str) -> int:
    return parse_label_string(text)


class Checks:
    """Collects named sub-checks so one line can summarise the whole criterion."""

    def __init__(self, label: str):
        self.label = label
        self.failures: list[str] = []

    def check(self, ok: bool, what: str) -> None:
        if not ok:
            self.failures.append(what)

    def finish(self) -> None:
        verdict = "PASS" if not self.failures else "FAIL"
        print(f"\n{self.label}: {verdict}")
        for f in self.failures[:20]:
            print(f"  - {f}")
        assert not self.failures, f"{self.label}: {len(self.failures)} failed checks, first: {self.failures[0]}"


def fig2_j() -> Graph:
    edges = [(a, b) for a in range(1, 6) for b in range(a + 1, 6)] + [(1, 6), (2, 6)]
    return Graph.from_edges(6, edges)


# ---------------------------------------------------------------- 1


def test_criterion_1_snail_fixtures():
    c = Checks("criterion 1 (snail fixtures)")
    t0 = time.perf_counter()
    h = snail()
    fam = primal_family(h)
    expected = ["123", "1234", "1237", "12345", "12346", "12347", "123456", "123457", "123467", "1234567"]
    c.check(fam.labels() == expected, f"primal family {fam.labels()}")
    z = zeta(h)
    c.check(z.zeta == Fraction(7, 3), f"zeta {z.zeta}")
    c.check(z.witness_g == L("1234"), "witness G")
    c.check(z.witness_covers == (L("12345"), L("12346"), L("12347")), "cover prefix")
    c.check(z.per_g.get(L("123")) == Fraction(5, 2), "zeta(123)")
    c.check(z.per_g.get(L("12347")) == Fraction(7, 2), "zeta(12347)")
    c.check(grading(h) == [L("123"), L("12347"), L("1234567")], "grading chain")
    elapsed = time.perf_counter() - t0
    c.check(elapsed < 1.0, f"took {elapsed:.3f}s")
    c.finish()


# ---------------------------------------------------------------- 2


def test_criterion_2_family_constants():
    c = Checks("criterion 2 (family constants)")
    for l in (3, 4, 5, 6):
        for r in (1, 2, 3):
            h = cycle_pendant(l, r)
            fam = primal_family(h)
            tag = f"C{l}+{r}"
            c.check(h.order == l + r and h.edge_count == l + r, f"{tag} v/e")
            c.check(fam.m == 1, f"{tag} m")
            c.check(fam.v0 == l, f"{tag} v0")
            c.check(zeta(h).zeta == Fraction(l + r, r), f"{tag} zeta")
            c.check(counterexample_check(h).is_counterexample == (r >= 2), f"{tag} verdict")

    t0 = time.perf_counter()
    h = badnews(7)
    fam = primal_family(h)
    c.check((h.order, h.edge_count) == (27, 36), "H_7 v/e")
    c.check(fam.m == Fraction(4, 3), f"H_7 m {fam.m}")
    c.check(fam.v0 == 6, "H_7 v0")
    c.check(zeta(h).zeta == Fraction(27, 7), "H_7 zeta")
    for s in fam.members:
        a = fractional_independence(induced_subgraph(h, s))
        c.check(a == Fraction(popcount(s), 2), f"H_7 alpha* on {s:#x}")
    elapsed = time.perf_counter() - t0
    c.check(elapsed <= 300, f"H_7 lattice scan {elapsed:.1f}s")
    print(f"  H_7 scan {elapsed:.2f}s, {len(fam.members)} primal members")

    f = fig2_example()
    c.check(Fraction(f.edge_count, f.order) == Fraction(19, 10), "fig2 e/v")
    c.check(m_density(f).value == 2, "fig2 m")
    c.check(counterexample_check(f).is_counterexample, "fig2 verdict")
    c.finish()


# ---------------------------------------------------------------- 3


def _petersen_samples() -> list[Graph]:
    pet = nx.petersen_graph()
    out = [from_nx(pet)]
    for drop in range(1, 5):
        out.append(from_nx(pet.subgraph(range(drop, 10))))
    for k in range(3):
        keep = [v for v in range(10) if v not in (k, k + 5)]
        out.append(from_nx(pet.subgraph(keep)))
    return out


def test_criterion_3a_alpha_oracle():
    c = Checks("criterion 3a (fractional independence vs half-integral brute force)")
    graphs = atlas(6) + [cycle_graph(5), cycle_graph(7)] + _petersen_samples()
    for i, g in enumerate(graphs):
        c.check(fractional_independence(g) == oracles.alpha_half_integral(g), f"graph #{i} {g.edges()}")
    print(f"  {len(graphs)} graphs")
    c.finish()


NAMED_FAMILIES = {"snail": snail(), "triangle": complete_graph(3), "glue-r1": glue(GlueSpec(fig2_j(), 0b11111, 1))}
NAMED_FAMILIES.update({f"C{l}+{r}": cycle_pendant(l, r) for l in (3, 4, 5, 6) for r in (1, 2, 3)})
POINTS = [(60, 0.05), (10**5, 4e-5), (N_WINDOW, 20 / N_WINDOW)]


def test_criterion_3b_phi_M_oracle():
    c = Checks("criterion 3b (phi/M vs exhaustive edge subsets)")
    count = 0
    for name, g in NAMED_FAMILIES.items():
        assert g.edge_count <= 12
        for n, p in POINTS:
            ours = phi(g, n, p).log_value
            ref = oracles.edge_subset_minimum(g, n, p, "phi")
            c.check(math.isclose(ours, ref, rel_tol=1e-12, abs_tol=1e-12), f"{name} phi n={n} p={p}: {ours} vs {ref}")
            if m_branch_small(g, n, p):
                ours = M_parameter(g, n, p).log_value
                ref = oracles.edge_subset_minimum(g, n, p, "M")
                c.check(math.isclose(ours, ref, rel_tol=1e-12, abs_tol=1e-12), f"{name} M n={n} p={p}: {ours} vs {ref}")
            count += 1
    print(f"  {count} (graph, n, p) points")
    c.finish()


def test_criterion_3c_prefix_rule_oracle():
    c = Checks("criterion 3c (prefix rule vs cover-subset brute force)")
    cases = {"snail": snail(), "fig2": fig2_example()}
    cases.update({f"C{l}+{r}": cycle_pendant(l, r) for l in (3, 4, 5, 6) for r in (1, 2, 3)})
    for name, h in cases.items():
        ours, ref = zeta(h).zeta, oracles.zeta_bruteforce(h)
        c.check(ours == ref, f"{name}: {ours} vs {ref}")
    c.finish()


# ---------------------------------------------------------------- 4


def test_criterion_4_claims():
    c = Checks("criterion 4 (primal family claims)")
    generated = [snail(), fig2_example()] + [badnews(r) for r in range(2, 8)]
    generated += [cycle_pendant(l, r) for l in range(3, 7) for r in range(1, 4)]
    generated += [glue(GlueSpec(fig2_j(), 0b11111, r)) for r in (1, 2, 3, 6)]
    for h in generated:
        rep = claim_suite(h)
        c.check(rep.passed, f"generated {h.order}v/{h.edge_count}e: {rep.failures}")
    for i in range(100):
        g = random_connected(3 + i % 7, 0.45, 7000 + i)
        assert g.order <= 9
        rep = claim_suite(g)
        c.check(rep.passed, f"random #{i}: {rep.failures}")
    c.finish()


# ---------------------------------------------------------------- 5


def test_criterion_5_glue():
    c = Checks("criterion 5 (glue postconditions)")
    for r in (1, 2, 3, 6):
        k = glue(GlueSpec(fig2_j(), 0b11111, r))
        c.check(m_density(k).value == 2 and is_balanced(k), f"r={r} density")
        c.check(primal_family(k).v0 == 5, f"r={r} v0")
        expect = Fraction(k.order, r) < 5
        c.check(expect == (r >= 2), f"r={r} threshold arithmetic")
        c.check(counterexample_check(k).is_counterexample == expect, f"r={r} verdict")
    c.finish()


# ---------------------------------------------------------------- 6


def test_criterion_6_monte_carlo():
    c = Checks("criterion 6 (Monte Carlo sanity)")
    t0 = time.perf_counter()
    for name, h in (("triangle", complete_graph(3)), ("C3+2", cycle_pendant(3, 2))):
        est = tail_estimate(h, 60, 0.1, 1.0, 2000, 2024)
        print(f"  {name}: mu={est.mu:.3f} z={est.z_score:.3f} variance_ratio={est.variance_ratio:.3f}")
        c.check(abs(est.z_score) <= 4, f"{name} |z| = {abs(est.z_score):.3f}")
        c.check(1 / 8 <= est.variance_ratio <= 8, f"{name} variance ratio {est.variance_ratio:.3f}")
    elapsed = time.perf_counter() - t0
    c.check(elapsed <= 120, f"took {elapsed:.1f}s")
    c.finish()


# ---------------------------------------------------------------- 7


def test_criterion_7_pendant_certificate():
    c = Checks("criterion 7 (pendant plant certificate)")
    t0 = time.perf_counter()
    n = 300
    plan = plan_pendant(3, 2, n, 8 / n, 1.0)
    c.check(plan.certificate_copies >= plan.certificate_target, "plan certificate")
    found = planted = hits = 0
    for seed in range(50):
        out = execute_pendant(plan, seed)
        found += out.cycle_found
        planted += out.planted
        c.check(out.planted == out.cycle_found, f"seed {seed}: cycle found but not planted")
        if out.planted:
            hits += out.hit
            c.check(out.hit and out.x_h >= plan.certificate_target, f"seed {seed}: X_H = {out.x_h}")
    print(f"  cycles {found}/50, planted {planted}, hits {hits}")
    c.check(found >= 45, f"round 1 found a cycle in only {found}/50 seeds")
    elapsed = time.perf_counter() - t0
    c.check(elapsed <= 120, f"took {elapsed:.1f}s")
    c.finish()


# ---------------------------------------------------------------- 8

PENDANT_C_H = Fraction(2, 5)  # r / (l + r) for C_3^{+2}
GRID_POINTS = 9
TRACKING_WINDOW = (1 / 8, 8.0)


def _interior(lo: float, hi: float, k: int = GRID_POINTS) -> list[float]:
    return [lo + (hi - lo) * (i + 0.5) / k for i in range(k)]


def pendant_window_rows(n: int = N_WINDOW) -> list[dict]:
    h = cycle_pendant(3, 2)
    top = float(PENDANT_C_H) * math.log(math.log(n))
    rows = []
    for t in _interior(0.0, top):
        p = math.exp(t) / n
        rep = conjecture_report(h, n, p, 1.0)
        cost = math.log(plan_pendant(3, 2, n, p, 1.0).log_cost)
        rows.append({"np": math.exp(t), "cost_ln": cost, "phi_ln": rep.phi_ln, "M_log_term_ln": rep.M_log_term_ln})
    return rows


def mixed_window_rows(n: int = N_WINDOW, r: int = 7) -> list[dict]:
    h = badnews(r)
    consts = mixed_constants(r)
    lnln = math.log(math.log(n))
    m = float(m_density(h).value)
    exponent = Fraction(h.order, r)
    rows = []
    for lw in _interior(float(consts["c_H"]) * lnln, float(consts["d_H"]) * lnln):
        p = math.exp((lw - math.log(n)) / m)
        rep = conjecture_report(h, n, p, 1.0)
        terms = [rep.phi_ln, rep.M_log_term_ln, rep.zeta_term_ln]
        cost = math.log(plan_mixed(r, n, p, 1.0).log_cost)
        reference = float(exponent) * rep.omega_ln + math.log(rep.omega_ln)
        rows.append({"omega_ln": rep.omega_ln, "cost_ln": cost, "terms": terms, "tracking": math.exp(min(terms) - reference)})
    return rows


def test_criterion_8a_pendant_window():
    c = Checks("criterion 8a (pendant cost below phi and M log(1/p))")
    for row in pendant_window_rows():
        best = min(row["phi_ln"], row["M_log_term_ln"])
        print(f"  np={row['np']:.3f} ln cost={row['cost_ln']:.3f} ln min={best:.3f}")
        c.check(row["cost_ln"] < best, f"np={row['np']:.3f}: ln cost {row['cost_ln']:.3f} >= ln min {best:.3f}")
    c.finish()


def test_criterion_8b_mixed_window():
    c = Checks("criterion 8b (mixed cost below all three terms, min-term tracking)")
    lo, hi = TRACKING_WINDOW
    for row in mixed_window_rows():
        best = min(row["terms"])
        print(f"  ln omega={row['omega_ln']:.4f} ln cost={row['cost_ln']:.3f} ln min={best:.3f} tracking={row['tracking']:.4f}")
        c.check(row["cost_ln"] < best, f"ln omega={row['omega_ln']:.4f}: ln cost {row['cost_ln']:.3f} >= ln min {best:.3f}")
        c.check(lo <= row["tracking"] <= hi, f"ln omega={row['omega_ln']:.4f}: tracking ratio {row['tracking']:.4f}")
    c.finish()


def test_criterion_8_timing():
    c = Checks("criterion 8 (analytic window evaluation time)")
    # fresh interpreter so no cache from earlier tests helps
    script = (
        "import sys, time; sys.path.insert(0, sys.argv[1]);"
        "import test_acceptance as t;"
        "s = time.perf_counter(); t.pendant_window_rows(); t.mixed_window_rows();"
        "print(time.perf_counter() - s)"
    )
    res = subprocess.run([sys.executable, "-c", script, str(TESTS)], capture_output=True, text=True, check=True)
    elapsed = float(res.stdout.strip().splitlines()[-1])
    print(f"  {elapsed:.3f}s")
    c.check(elapsed <= 1.0, f"took {elapsed:.3f}s")
    c.finish()


# ---------------------------------------------------------------- 9

SEEDED_COMMANDS = [
    ["simulate", "--family", "triangle", "--n", "50", "--p", "0.1", "--eps", "1", "--trials", "64", "--seed", "9"],
    ["simulate", "--family", "cycle-pendant", "--l", "3", "--r", "2", "--n", "40", "--p", "0.1", "--trials", "40", "--seed", "3"],
    ["plant", "--kind", "pendant", "--l", "3", "--r", "2", "--n", "300", "--np", "8", "--eps", "1", "--seed", "1", "--repeat", "4"],
    ["plant", "--kind", "general", "--family", "snail", "--n", "200", "--p", "0.025", "--c-H", "0.4", "--seed", "2", "--repeat", "3"],
]


def _cli(args: list[str], threads: str) -> bytes:
    env = dict(os.environ, UPPERTAIL_THREADS=threads)
    res = subprocess.run([sys.executable, "-m", "uppertail", *args], capture_output=True, env=env)
    assert res.returncode == 0, res.stderr.decode()
    return res.stdout


def test_criterion_9_determinism():
    c = Checks("criterion 9 (determinism across runs and worker counts)")
    for args in SEEDED_COMMANDS:
        outputs = {t: _cli(args, t) for t in ("1", "2", "3")}
        again = _cli(args, "1")
        c.check(again == outputs["1"], f"{args[:2]} differs between runs")
        c.check(len(set(outputs.values())) == 1, f"{args[:2]} differs across UPPERTAIL_THREADS")
        json.loads(outputs["1"])
    ref = tail_estimate(complete_graph(3), 50, 0.12, 1.0, 48, 11, workers=1)
    for w in (2, 4):
        c.check(tail_estimate(complete_graph(3), 50, 0.12, 1.0, 48, 11, workers=w) == ref, f"library workers={w}")
    c.finish()
