"""Command-line interface: analyze, sweep, simulate, plant, generate.

Exit codes: 0 success, 2 input error, 3 ``--assert-counterexample`` failed,
4 feasibility or counting-guard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

from .density import fractional_independence, is_balanced, is_strictly_balanced, m_density
from .errors import FeasibilityError, GraphError, ParameterError, UpperTailError
from .exponents import ExponentReport, conjecture_report
from .families import GlueSpec, glue, named_graph
from .graph import Graph, graph_from_edge_list, label_string, parse_label_string
from .lattice import claim_suite, counterexample_check, grading, primal_family, zeta
from .plant import (
    DEFAULT_C_H,
    DEFAULT_SMALL_C_H,
    PlantPlan,
    execute_general,
    execute_pendant,
    plan_general,
    plan_mixed,
    plan_pendant,
)
from .tail import tail_estimate

SCHEMA = 1
FAMILY_CHOICES = ("cycle-pendant", "snail", "badnews", "fig2", "glue", "triangle", "edge", "complete", "cycle", "path", "star")


class InputError(UpperTailError):
    """Bad command-line input."""


# ----------------------------------------------------------------------------
# value parsing and serialisation


_LOG_POWER = re.compile(r"^\s*(?:(?P<c>[0-9.eE+-]+)\s*\*\s*)?\(\s*log\s+n\s*\)\s*\^\s*(?P<x>[0-9./eE+-]+)\s*$")


def parse_count(text: str) -> int:
    """Integer that may be written in scientific notation, e.g. ``1e9``."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"not an integer: {text!r}") from None
    if not value.is_integer():
        raise InputError(f"not an integer: {text!r}")
    return int(value)


def parse_scale(text: str, n: int | None) -> float:
    """A positive number, or ``(log n)^x`` / ``c*(log n)^x`` evaluated at ``n``."""
    m = _LOG_POWER.match(text)
    if m:
        if n is None:
            raise InputError(f"{text!r} needs --n")
        coef = float(m.group("c")) if m.group("c") else 1.0
        return coef * math.log(n) ** float(Fraction(m.group("x")))
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise InputError(f"cannot parse value {text!r}") from None


def rat(x: Fraction | None) -> str | None:
    if x is None:
        return None
    return f"{x.numerator}/{x.denominator}"


def num(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return x


def _labels(mask: int, g: Graph) -> str:
    return label_string(mask, g.order)


# ----------------------------------------------------------------------------
# graph sources


def add_graph_source(p: argparse.ArgumentParser, positional: bool = True) -> None:
    if positional:
        p.add_argument("edges", nargs="?", help="edge-list file (one 'u v' pair per line)")
    p.add_argument("--family", choices=FAMILY_CHOICES)
    p.add_argument("--l", type=int, help="cycle length")
    p.add_argument("--r", type=int, help="pendant count / badnews parameter")
    p.add_argument("--k", type=int, help="size parameter for complete/path/star")
    p.add_argument("--j", help="edge-list file of J (glue)")
    p.add_argument("--g", help="vertex labels of the glue base inside J, e.g. 12345 or 1,2,3")
    p.add_argument("--copies", type=int, help="number of glued copies")


def load_graph(args) -> Graph:
    edges_path = getattr(args, "edges", None)
    if edges_path and args.family:
        raise InputError("give either an edge-list file or --family, not both")
    if edges_path:
        return graph_from_edge_list(_read(edges_path))
    if args.family == "glue":
        if not (args.j and args.g and args.copies):
            raise InputError("--family glue needs --j, --g and --copies")
        j = graph_from_edge_list(_read(args.j))
        return glue(GlueSpec(j, parse_label_string(args.g), args.copies))
    if args.family:
        return named_graph(args.family, l=args.l, r=args.r, k=args.k)
    raise InputError("no graph given: pass an edge-list file or --family")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _probability(args, n: int) -> float:
    if args.p is not None and args.np is not None:
        raise InputError("give --p or --np, not both")
    if args.np is not None:
        return parse_scale(args.np, n) / n
    if args.p is not None:
        return parse_scale(args.p, n)
    raise InputError("missing --p or --np")


# ----------------------------------------------------------------------------
# reports


def exponent_dict(rep: ExponentReport, verbose: bool = False) -> dict:
    out = {
        "n": rep.n,
        "p": rep.p,
        "np": rep.n * rep.p,
        "eps": rep.eps,
        "mu_H_ln": num(rep.log_mu_H),
        "phi_ln": num(rep.phi_ln),
        "M_ln": num(rep.M_ln),
        "M_branch": rep.M_branch,
        "M_log_term_ln": num(rep.M_log_term_ln),
        "zeta_term_ln": num(rep.zeta_term_ln),
        "zeta_note": rep.zeta_note,
        "conjectured_min_ln": num(rep.conjectured_min_ln),
        "mechanism": rep.mechanism,
        "variance_estimate_ln": num(rep.variance_estimate_ln),
        "omega_ln": num(rep.omega_ln),
        "approximate": rep.approximate,
        "phi_witness": [list(e) for e in rep.phi_witness.edges] if rep.phi_witness else None,
    }
    if verbose:
        out["M_witness"] = [list(e) for e in rep.M_witness.edges] if rep.M_witness else None
        out["M_alt_ln"] = num(rep.M_alt_ln)
    return out


def analysis_report(g: Graph, exps: ExponentReport | None = None, verbose: bool = False) -> dict:
    dens = m_density(g)
    has_edges = g.edge_count > 0
    report: dict = {
        "schema": SCHEMA,
        "graph": {
            "order": g.order,
            "edges": g.edge_count,
            "max_degree": g.max_degree,
            "m": rat(dens.value),
            "m_witness": _labels(dens.witness, g),
            "balanced": is_balanced(g) if has_edges else None,
            "strictly_balanced": is_strictly_balanced(g) if has_edges else None,
            "edge_list": [list(e) for e in g.labeled_edges()],
        },
        "alpha_star": rat(fractional_independence(g)),
    }
    if not has_edges:
        return report
    fam = primal_family(g)
    report["primal_family"] = {
        "members": fam.labels(),
        "cover_edges": [[_labels(fam.members[a], g), _labels(fam.members[b], g)] for a, b in fam.cover_edges],
        "v0": fam.v0,
    }
    try:
        z = zeta(g)
    except GraphError:
        z = None
    try:
        chain = grading(g)
        report["grading"] = {
            "chain": [_labels(s, g) for s in chain],
            "zeta_values": {_labels(s, g): rat(z.per_g.get(s)) if z else None for s in chain},
        }
    except GraphError as exc:
        report["grading"] = {"chain": None, "error": str(exc)}
    if z is not None:
        report["zeta"] = {
            "zeta": rat(z.zeta),
            "witness_g": _labels(z.witness_g, g),
            "witness_covers": [_labels(s, g) for s in z.witness_covers],
            "per_g": {_labels(s, g): rat(v) for s, v in z.per_g.items()},
        }
    else:
        report["zeta"] = None
    claims = claim_suite(g)
    report["claims"] = {
        "passed": claims.passed,
        "union_closed": claims.union_closed,
        "cover_complements_connected": claims.cover_complements_connected,
        "cover_complements_disjoint": claims.cover_complements_disjoint,
        "failures": [{"claim": f.claim, "sets": [_labels(s, g) for s in f.sets]} for f in claims.failures],
    }
    v = counterexample_check(g)
    report["verdict"] = {
        "is_counterexample": v.is_counterexample,
        "v0": v.v0,
        "ratio": rat(v.zeta),
        "witness": None
        if v.witness_g is None or not v.is_counterexample
        else {
            "g": _labels(v.witness_g, g),
            "covers": [_labels(s, g) for s in v.witness_covers],
            "k": _labels(v.k_mask, g),
        },
    }
    if exps is not None:
        report["exponents"] = exponent_dict(exps, verbose)
    return report


def plan_dict(plan: PlantPlan) -> dict:
    h = plan.host
    out = {
        "kind": plan.kind,
        "n": plan.n,
        "p": plan.p,
        "np": plan.n * plan.p,
        "eps": plan.eps,
        "rounds": list(plan.rounds),
        "z": plan.z,
        "z_minimal": plan.z_minimal,
        "z_star": plan.z_star,
        "U_size": plan.u_size,
        "delta": plan.delta,
        "certificate_copies": str(plan.certificate_copies),
        "certificate_target": str(plan.certificate_target),
        "certificate_ok": plan.certificate_ok,
        "cost_ln": num(math.log(plan.log_cost)) if plan.log_cost > 0 else None,
        "log_cost": num(plan.log_cost),
        "cost_parts": {k: num(v) for k, v in plan.cost_parts.items()},
        "mu_H_ln": num(plan.log_mu_H),
        "constants": {k: rat(v) if isinstance(v, Fraction) else v for k, v in plan.constants.items()},
    }
    if plan.kind == "general":
        out["g"] = _labels(plan.g_mask, h)
        out["covers"] = [_labels(s, h) for s in plan.cover_masks]
        out["dropped"] = [_labels(s, h) for s in plan.dropped]
    if plan.kind == "mixed":
        out["omega_ln"] = plan.extra["omega_ln"]
        out["in_window"] = plan.extra["in_window"]
    return out


def _dump(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


# ----------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    g = load_graph(args)
    exps = None
    if args.n is not None:
        n = parse_count(args.n)
        p = _probability(args, n)
        exps = conjecture_report(g, n, p, args.eps)
    report = analysis_report(g, exps, args.verbose)
    _dump(report)
    if args.assert_counterexample and not report.get("verdict", {}).get("is_counterexample", False):
        return 3
    return 0


def log_grid(start: float, stop: float, points: int) -> list[float]:
    if points < 1 or start <= 0 or stop <= 0:
        raise InputError("grid needs positive bounds and at least one point")
    if points == 1:
        if start != stop:
            raise InputError("a one-point grid needs start == stop")
        return [start]
    if stop <= start:
        raise InputError("grid stop must exceed start")
    a, b = math.log(start), math.log(stop)
    return [math.exp(a + (b - a) * i / (points - 1)) for i in range(points)]


def parse_grid(text: str, n: int) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError("grids are written start:stop:points")
    return log_grid(parse_scale(parts[0], n), parse_scale(parts[1], n), parse_count(parts[2]))


SWEEP_COLUMNS = ("n", "p", "np", "phi_ln", "M_log_term_ln", "zeta_term_ln", "pendant_cost_ln", "mixed_cost_ln", "mechanism")


def sweep_rows(g: Graph, n: int, nps: list[float], eps: float, family: str | None = None, l=None, r=None):
    """One row per ``np`` value with every exponent term and plan cost (log of the positive exponent)."""
    for x in nps:
        p = x / n
        rep = conjecture_report(g, n, p, eps)
        pend = mixed = None
        if family == "cycle-pendant":
            try:
                pend = math.log(plan_pendant(l, r, n, p, eps).log_cost)
            except FeasibilityError:
                pend = None
        if family == "badnews" and r is not None and r >= 7:
            try:
                mixed = math.log(plan_mixed(r, n, p, eps).log_cost)
            except FeasibilityError:
                mixed = None
        yield {
            "n": n,
            "p": p,
            "np": x,
            "phi_ln": rep.phi_ln,
            "M_log_term_ln": rep.M_log_term_ln,
            "zeta_term_ln": rep.zeta_term_ln,
            "pendant_cost_ln": pend,
            "mixed_cost_ln": mixed,
            "mechanism": rep.mechanism,
        }


def cmd_sweep(args) -> int:
    g = load_graph(args)
    n = parse_count(args.n)
    if (args.np_grid is None) == (args.omega_grid is None):
        raise InputError("give exactly one of --np-grid or --omega-grid")
    if args.np_grid is not None:
        nps = parse_grid(args.np_grid, n)
    else:
        m = float(m_density(g).value)
        nps = [w ** (1 / m) * n ** (1 - 1 / m) for w in parse_grid(args.omega_grid, n)]
    writer = csv.DictWriter(sys.stdout, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in sweep_rows(g, n, nps, args.eps, args.family, args.l, args.r):
        writer.writerow({k: "" if v is None else (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return 0


def cmd_simulate(args) -> int:
    g = load_graph(args)
    n = parse_count(args.n)
    p = _probability(args, n)
    est = tail_estimate(g, n, p, args.eps, args.trials, args.seed)
    out = {
        "schema": SCHEMA,
        "n": est.n,
        "p": est.p,
        "eps": est.eps,
        "trials": est.trials,
        "seed": est.seed,
        "hit_count": est.hit_count,
        "p_hat": est.p_hat,
        "interval": list(est.interval),
        "mean_X": est.mean_X,
        "var_X": est.var_X,
        "mu": est.mu,
        "threshold": est.threshold,
        "phi": est.phi,
        "variance_ratio": est.variance_ratio,
        "z_score": num(est.z_score),
    }
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fh:
            for t, x in enumerate(est.counts):
                fh.write(json.dumps({"trial": t, "X": x, "hit": x >= math.ceil(est.threshold)}) + "\n")
    _dump(out)
    return 0


def cmd_plant(args) -> int:
    n = parse_count(args.n)
    p = _probability(args, n)
    if args.kind == "mixed":
        if not args.dry_run:
            raise InputError("mixed plans are analytic only; pass --dry-run")
        if args.r is None:
            raise InputError("--kind mixed needs --r")
        plan = plan_mixed(args.r, n, p, args.eps)
    elif args.kind == "pendant":
        if args.l is None or args.r is None:
            raise InputError("--kind pendant needs --l and --r")
        plan = plan_pendant(args.l, args.r, n, p, args.eps)
    else:
        g = load_graph(args)
        if args.base:
            base = parse_label_string(args.base)
            covers_ = [parse_label_string(s) for s in (args.covers or "").split(",") if s]
        else:
            z = zeta(g)
            base, covers_ = z.witness_g, list(z.witness_covers)
        plan = plan_general(g, base, covers_, n, p, args.eps, args.C_H, args.c_H)
    out = {"schema": SCHEMA, "plan": plan_dict(plan)}
    if not args.dry_run:
        outcomes = []
        for s in range(args.seed, args.seed + args.repeat):
            if plan.kind == "pendant":
                o = execute_pendant(plan, s)
                outcomes.append({"seed": s, "cycle_found": o.cycle_found, "planted": o.planted, "X_H": o.x_h, "hit": o.hit})
            else:
                o = execute_general(plan, s)
                outcomes.append(
                    {
                        "seed": s,
                        "g_found": o.g_found,
                        "planted": o.planted,
                        "extension_counts": list(o.extension_counts),
                        "K_copies": o.k_copies,
                        "X_H": o.x_h,
                        "hit": o.hit,
                        "Y_H": o.y_h,
                        "Y_expected": o.y_expected,
                    }
                )
        out["outcomes"] = outcomes
    _dump(out)
    return 0


def cmd_generate(args) -> int:
    g = load_graph(args)
    sys.stdout.write(g.to_edge_list())
    return 0


# ----------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uppertail", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def numeric(p, need_n=True):
        p.add_argument("--n", required=need_n, help="host size; scientific notation allowed")
        p.add_argument("--p", help="edge probability")
        p.add_argument("--np", help="expected degree n*p; accepts '(log n)^x'")
        p.add_argument("--eps", type=float, default=1.0)

    a = sub.add_parser("analyze", help="full structural report, optionally with exponents at (n, p)")
    add_graph_source(a)
    numeric(a, need_n=False)
    a.add_argument("--verbose", action="store_true")
    a.add_argument("--assert-counterexample", action="store_true")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="CSV of exponent terms over a log-spaced grid")
    add_graph_source(s)
    s.add_argument("--n", required=True)
    s.add_argument("--np-grid", help="start:stop:points over n*p")
    s.add_argument("--omega-grid", help="start:stop:points over n*p^m")
    s.add_argument("--eps", type=float, default=1.0)
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("simulate", help="Monte Carlo upper-tail estimate")
    add_graph_source(m)
    numeric(m)
    m.add_argument("--trials", type=int, required=True)
    m.add_argument("--seed", type=int, required=True)
    m.add_argument("--records", help="write one JSON line per trial to this file")
    m.set_defaults(func=cmd_simulate)

    pl = sub.add_parser("plant", help="plan and run a planted construction")
    pl.add_argument("--kind", choices=("pendant", "general", "mixed"), required=True)
    add_graph_source(pl)
    numeric(pl)
    pl.add_argument("--base", help="primal base G for general plans (default: zeta witness)")
    pl.add_argument("--covers", help="comma-separated covers of the base")
    pl.add_argument("--C-H", dest="C_H", type=float, default=DEFAULT_C_H)
    pl.add_argument("--c-H", dest="c_H", type=float, default=DEFAULT_SMALL_C_H)
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--repeat", type=int, default=1, help="run seeds seed..seed+repeat-1")
    pl.add_argument("--dry-run", action="store_true")
    pl.set_defaults(func=cmd_plant)

    gen = sub.add_parser("generate", help="print a family member as an edge list")
    add_graph_source(gen, positional=False)
    gen.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GraphError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FeasibilityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
