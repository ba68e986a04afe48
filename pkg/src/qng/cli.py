"""Command-line front end.

State specs use ``family[:p1[,p2]][:seed=S]``, e.g. ``fock:1``, ``evencat:1.2``,
``coherent:0.5,0.3``, ``pnes:0.7``, ``randpure:5:seed=7``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__, benchmark, entanglement, gaussian, measures, states
from .errors import NoThreshold, QNGError, SpecParseError
from .quadrature import DEFAULT_POINTS

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_FAIL = 0, 2, 3, 4

SCAN_QUANTITIES = ("nkl", "nqr", "nhs_exact", "nhs_lower", "genoni", "j_kmax", "j_kmin", "mean_photon")

FAMILY_HELP = ", ".join(f"{k}({','.join(v[1])})" for k, v in states.FAMILIES.items())


class UsageError(Exception):
    pass


def _env(name: str, default, cast):
    raw = os.environ.get(f"QNG_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise UsageError(f"bad QNG_{name}={raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cutoff", type=int, default=None, help="Fock cutoff per mode (default: per state)")
    common.add_argument("--grid-points", type=int, default=None, help=f"quadrature grid intervals ({DEFAULT_POINTS})")
    common.add_argument("--seed", type=int, default=None, help="master seed for random draws (0)")
    common.add_argument("--tol", type=float, default=None, help="bound-check tolerance (1e-6)")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    p = argparse.ArgumentParser(
        prog="qng",
        description="Quadrature-based non-Gaussianity measures.",
        epilog=f"State spec grammar: family[:p1[,p2]][:seed=S]. Families: {FAMILY_HELP}. "
        "Environment variables QNG_CUTOFF, QNG_GRID_POINTS, QNG_SEED, QNG_TOL, QNG_FORMAT "
        "supply defaults for the matching flags.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common], help="all measures for one state")
    m.add_argument("spec")

    s = sub.add_parser("scan", parents=[common], help="sweep the first parameter of a family")
    s.add_argument("family")
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--num", type=int, default=11)
    s.add_argument("--fixed", default="", help="comma list of the remaining parameters")
    s.add_argument("--quantities", default="nkl,nqr", help=f"comma list from {','.join(SCAN_QUANTITIES)}")
    s.add_argument("--x-axis", choices=("param", "mean-photon"), default="param")

    r = sub.add_parser("random-bench", parents=[common], help="kurtosis-candidate benchmark")
    r.add_argument("--n-max", type=int, default=5)
    r.add_argument("--samples", type=int, default=1000)
    r.add_argument("--mixed", action="store_true")
    r.add_argument("--augmented", action="store_true", help="also report variance candidates")

    b = sub.add_parser("bounds-check", parents=[common], help="verify inequalities on the catalog")
    b.add_argument("--suite", default="all", choices=("all", "ordering", "hs", "overlap", "uncertainty", "gap"))

    w = sub.add_parser("witness", parents=[common], help="entangled coherent state witness sweep")
    w.add_argument("--gamma-min", type=float, default=0.5)
    w.add_argument("--gamma-max", type=float, default=1.2)
    w.add_argument("--points", type=int, default=15)
    return p


def _config(args) -> dict:
    cfg = {
        "command": args.command,
        "cutoff": args.cutoff if args.cutoff is not None else _env("CUTOFF", None, int),
        "grid_points": args.grid_points if args.grid_points is not None else _env("GRID_POINTS", DEFAULT_POINTS, int),
        "seed": args.seed if args.seed is not None else _env("SEED", 0, int),
        "tol": args.tol if args.tol is not None else _env("TOL", 1e-6, float),
        "format": args.format or _env("FORMAT", "json", str),
    }
    if cfg["format"] not in ("json", "csv"):
        raise UsageError(f"unknown format {cfg['format']!r}")
    return cfg


def _provenance(cfg: dict, extra: dict | None = None) -> dict:
    out = {"version": __version__, **cfg, "optimizer": asdict(_opts(cfg))}
    out.update(extra or {})
    return out


def _opts(cfg) -> measures.OptimizerOptions:
    return measures.OptimizerOptions(grid_points=cfg["grid_points"])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=measures._jsonable) + "\n"


def _build(spec: states.StateSpec, cfg):
    return states.build(spec, cfg["cutoff"])


# ------------------------------------------------------------------ commands


def cmd_measure(args, cfg) -> tuple[str, int]:
    spec = states.parse_spec(args.spec)
    st = _build(spec, cfg)
    rep = measures.measure(st, str(spec), _opts(cfg), _provenance(cfg, {"cutoff": st.cutoff, "spec": str(spec)}))
    if cfg["format"] == "csv":
        return _csv(measures.MeasureReport.CSV_FIELDS, [rep.csv_row()]), EXIT_OK
    return _json(rep.to_dict()), EXIT_OK


def _scan_row(st, quantities, opts):
    res = measures.n_kl(st, opts)
    row = {"nkl": res.value}
    if {"nqr", "genoni", "nhs_exact", "nhs_lower"} & set(quantities):
        row["nqr"] = measures.n_qr(st)
        row["genoni"] = measures.genoni_lower(st)
        hs = measures.n_hs(st, res.value)
        row["nhs_exact"], row["nhs_lower"] = hs.exact, hs.lower
    if {"j_kmax", "j_kmin"} & set(quantities):
        k = measures.kurtosis_strategy(st, grid_points=opts.grid_points)
        row["j_kmax"], row["j_kmin"] = k.j_at_kmax, k.j_at_kmin
    row["mean_photon"] = sum(st.mean_photon(m) for m in range(st.modes))
    return [row[q] for q in quantities], row["mean_photon"]


def cmd_scan(args, cfg) -> tuple[str, int]:
    fam = states.ALIASES.get(args.family.lower(), args.family.lower())
    if fam not in states.FAMILIES or not states.FAMILIES[fam][1]:
        raise UsageError(f"family {args.family!r} has no parameter to scan")
    quantities = [q.strip() for q in args.quantities.split(",") if q.strip()]
    bad = [q for q in quantities if q not in SCAN_QUANTITIES]
    if bad:
        raise UsageError(f"unsupported quantities {bad}; choose from {SCAN_QUANTITIES}")
    fixed = tuple(float(v) for v in args.fixed.split(",") if v.strip())
    opts = _opts(cfg)
    rows = []
    for p in np.linspace(args.start, args.stop, args.num):
        spec = states.StateSpec(fam, (float(p),) + fixed, cfg["seed"] if fam.startswith("rand") else None)
        vals, mean_n = _scan_row(_build(spec, cfg), quantities, opts)
        rows.append([mean_n if args.x_axis == "mean-photon" else float(p)] + vals)
    xname = "mean_photon" if args.x_axis == "mean-photon" else states.FAMILIES[fam][1][0]
    header = [xname] + quantities
    if cfg["format"] == "csv":
        return _csv(header, rows), EXIT_OK
    return _json({"columns": header, "rows": rows, "provenance": _provenance(cfg, {"family": fam})}), EXIT_OK


def cmd_random_bench(args, cfg) -> tuple[str, int]:
    if args.samples < 100:
        raise UsageError("random-bench needs at least 100 samples")
    res = benchmark.random_bench(args.n_max, args.samples, cfg["seed"], args.mixed, _opts(cfg))
    summary = res.summary()
    if not args.augmented:
        summary.pop("mean_augmented_ratio")
    if cfg["format"] == "csv":
        header = ["index", "nkl", "ratio", "delta", "hit_kmax", "hit_kmin"] + (["augmented_ratio"] if args.augmented else [])
        rows = [[s.index, s.nkl, s.ratio, s.delta, s.hit_kmax, s.hit_kmin] + ([s.augmented_ratio] if args.augmented else [])
                for s in res.samples]
        return _csv(header, rows), EXIT_OK
    dc, de = res.delta_histogram()
    rc, re_ = res.ratio_histogram()
    out = {
        "summary": summary,
        "delta_histogram": {"counts": dc, "edges": de},
        "ratio_histogram": {"counts": rc, "edges": re_},
        "provenance": _provenance(cfg, {"n_max": args.n_max, "samples": args.samples, "mixed": args.mixed}),
    }
    return _json(out), EXIT_OK


BOUNDS_CATALOG = (
    "vacuum", "coherent:0.8,0.3", "squeezed:0.5", "thermal:1",
    "fock:1", "fock:2", "fock:3", "pac:1", "evencat:1", "oddcat:1", "evencat:1.8",
    "noisy1:0.3", "noisy1:0.8", "randpure:5:seed=1", "randmixed:3:seed=2",
    "pnes:0.4", "tmsv:0.5", "pstmsv:0.4",
)


def bounds_rows(suite: str = "all", tol: float = 1e-6, cutoff: int | None = None,
                opts: measures.OptimizerOptions = measures.OptimizerOptions()):
    """(suite, state, check, lhs, rhs, margin, ok) rows; margin >= -tol passes."""
    rows = []

    def add(name, label, check, small, big, tolerance=tol):
        margin = big - small
        rows.append([name, label, check, small, big, margin, margin >= -tolerance])

    if suite in ("all", "ordering", "hs", "overlap", "uncertainty"):
        for text in BOUNDS_CATALOG:
            spec = states.parse_spec(text)
            st = states.build(spec, cutoff)
            nkl = measures.n_kl(st, opts).value
            single = st.modes == 1
            if suite in ("all", "ordering"):
                nqr = measures.n_qr(st)
                add("ordering", text, "nkl <= nqr", nkl, nqr)
                add("ordering", text, "genoni <= nqr", measures.genoni_lower(st), nqr)
            if not single:
                continue
            if suite in ("all", "hs"):
                hs = measures.n_hs(st, nkl)
                add("hs", text, "nhs_lower <= nhs_exact", hs.lower, hs.exact, 1e-9)
            if suite in ("all", "overlap"):
                ratio, bound = measures.overlap_bound(st)
                add("overlap", text, "overlap ratio <= bound", ratio, bound)
            if suite in ("all", "uncertainty"):
                lhs, rhs = measures.uncertainty_check(st, nkl)
                add("uncertainty", text, "h_inv(nkl + S1) <= sqrt det", rhs, lhs)
    if suite in ("all", "gap"):
        grid = np.logspace(-3, 3, 40)
        gaps = [gaussian.entropy_gap_thermal(n) for n in grid]
        for n, g in zip(grid, gaps):
            add("gap", f"thermal:{n:.6g}", "ln(2/e) <= S2 - S1", math.log(2 / math.e), -g, 0.0)
        for (n0, g0), (n1, g1) in zip(zip(grid, gaps), zip(grid[1:], gaps[1:])):
            rows.append(["gap", f"thermal:{n1:.6g}", "D increasing", g0, g1, g1 - g0, g1 > g0])
    return rows


def cmd_bounds_check(args, cfg) -> tuple[str, int]:
    rows = bounds_rows(args.suite, cfg["tol"], cfg["cutoff"], _opts(cfg))
    code = EXIT_OK if all(r[-1] for r in rows) else EXIT_FAIL
    header = ["suite", "state", "check", "lhs", "rhs", "margin", "status"]
    table = [r[:-1] + ["PASS" if r[-1] else "FAIL"] for r in rows]
    if cfg["format"] == "csv":
        return _csv(header, table), code
    return _json({"columns": header, "rows": table, "provenance": _provenance(cfg, {"suite": args.suite})}), code


def cmd_witness(args, cfg) -> tuple[str, int]:
    gammas = np.linspace(args.gamma_min, args.gamma_max, args.points)
    opts = _opts(cfg)
    evaluate = lambda g: entanglement.ecs_witness(g, opts)
    try:
        res = entanglement.witness_sweep(gammas, evaluate)
        threshold, reports, detects = res.threshold, res.reports, None
    except NoThreshold as exc:
        threshold, reports, detects = None, [evaluate(g) for g in gammas], exc.detects
    if cfg["format"] == "csv":
        return _csv(entanglement.WitnessReport.CSV_FIELDS,
                    [[r.gamma_parameter, r.lhs, r.rhs, r.gaussian_ppt_detects, r.enhanced_detects] for r in reports]), EXIT_OK
    out = {
        "threshold": threshold,
        "detects_everywhere": detects,
        "points": [{"gamma": r.gamma_parameter, "lhs": r.lhs, "rhs": r.rhs,
                    "gaussian_ppt_detects": r.gaussian_ppt_detects, "enhanced_detects": r.enhanced_detects}
                   for r in reports],
        "provenance": _provenance(cfg),
    }
    return _json(out), EXIT_OK


COMMANDS = {
    "measure": cmd_measure,
    "scan": cmd_scan,
    "random-bench": cmd_random_bench,
    "bounds-check": cmd_bounds_check,
    "witness": cmd_witness,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        text, code = COMMANDS[args.command](args, cfg)
    except (UsageError, SpecParseError) as exc:
        parser.print_usage(sys.stderr)
        print(f"qng: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QNGError as exc:
        print(f"qng: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
