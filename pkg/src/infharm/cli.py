"""Command-line front end: ``infharm {check,classify,reduce,conformal,catalog}``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for usage or input errors.  JSON output has sorted keys and a
``schema_version`` field, so a fixed configuration gives identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import reductions
from .catalog import catalog_entries, catalog_get, catalog_list, witness_residual
from .conformal import hyperbolic_equation_residual, sphere_equation_residual, sphere_restriction_residual
from .errors import InfeasibleConstantError, InfharmError
from .expr import parse
from .inflap import DEFAULT_TOL, VERDICT_ORDER, classify, energy_density
from .mapdesc import load_map_description_file

SCHEMA_VERSION = 1
ENERGY_RTOL = 1e-10
WITNESS_THRESHOLD = 1e-3
REDUCTION_TOL = 1e-6
INVARIANT_TOL = 1e-8
RANDOM_POINTS = 64


@dataclass
class RunConfig:
    command: str
    entries: list = field(default_factory=list)
    path: str | None = None
    tol: float = DEFAULT_TOL
    grid: int | None = None
    fmt: str = "json"
    seed: int | None = None
    out: str | None = None


class UsageError(InfharmError):
    pass


# -- helpers -----------------------------------------------------------------------


def _float(v):
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _dump_json(payload):
    payload = dict(payload, schema_version=SCHEMA_VERSION)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _flags_dict(verdict):
    return {name: name in verdict for name in VERDICT_ORDER}


def _sample_points(region_grid, region_random, config):
    pts = region_grid(config.grid)
    if config.seed is not None:
        pts = np.concatenate([pts, region_random(RANDOM_POINTS, config.seed)])
    return pts


# -- check ---------------------------------------------------------------------------


def check_entry(entry, config):
    region = entry.sample_region
    pts = _sample_points(region.grid, lambda n, s: region.random(n, s), config)
    result = classify(entry.map, entry.source_metric, entry.target_metric, pts, tol=config.tol)
    flags_ok = result.verdict == entry.expected_flags
    energy_err = None
    if entry.expected_energy is not None:
        E = energy_density(entry.map, entry.source_metric, entry.target_metric, pts).value
        ref = entry.expected_energy(pts)
        energy_err = float(np.max(np.abs(E - ref) / np.maximum(np.abs(ref), 1e-300)))
    witness = None
    witness_ok = True
    if entry.witness is not None:
        value = witness_residual(entry)
        witness_ok = value > WITNESS_THRESHOLD
        witness = {"point": list(entry.witness), "criterion": entry.witness_check, "residual": _float(value)}
    passed = flags_ok and witness_ok and (energy_err is None or energy_err < ENERGY_RTOL)
    return {
        "id": entry.id,
        "description": entry.provenance,
        "negative_control": entry.negative,
        "expected_verdict": sorted(entry.expected_flags),
        "verdict": sorted(result.verdict),
        "flags": _flags_dict(result.verdict),
        "worst_residuals": {k: _float(v) for k, v in sorted(result.worst_residuals.items())},
        "sample_count": result.sample_count,
        "near_degenerate_count": result.near_degenerate_count,
        "energy_max_rel_error": None if energy_err is None else _float(energy_err),
        "witness": witness,
        "pass": bool(passed),
    }


def cmd_check(config):
    ids = config.entries or catalog_list()
    entries = [catalog_get(i) for i in ids]
    reports = [check_entry(e, config) for e in sorted(entries, key=lambda e: e.id)]
    ok = all(r["pass"] for r in reports)
    payload = {
        "command": "check",
        "tolerance": config.tol,
        "grid": config.grid,
        "seed": config.seed,
        "entries": reports,
        "pass": ok,
    }
    if config.fmt == "csv":
        header = ["id", "pass", "verdict", "infinity_harmonic", "verticality", "conformality", "homothety",
                  "energy_max_rel_error"]
        rows = [[r["id"], r["pass"], " ".join(r["verdict"])]
                + [r["worst_residuals"][k] for k in header[3:7]] + [r["energy_max_rel_error"]] for r in reports]
        text = _csv_text(header, rows)
    elif config.fmt == "human":
        lines = [f"{'entry':28s} {'result':6s} verdict"]
        for r in reports:
            lines.append(f"{r['id']:28s} {'PASS' if r['pass'] else 'FAIL':6s} {', '.join(r['verdict'])}")
        lines.append(f"{sum(r['pass'] for r in reports)}/{len(reports)} entries pass")
        text = "\n".join(lines) + "\n"
    else:
        text = _dump_json(payload)
    return (0 if ok else 1), text


# -- classify ------------------------------------------------------------------------


def cmd_classify(config):
    desc = load_map_description_file(config.path)
    pts = _sample_points(desc.grid, desc.random, config)
    if len(pts) == 0:
        raise UsageError("the sample region is empty after exclusions")
    result = classify(desc.map, desc.source_metric, desc.target_metric, pts, tol=config.tol)
    payload = {
        "command": "classify",
        "file": config.path,
        "verdict": sorted(result.verdict),
        "flags": _flags_dict(result.verdict),
        "tolerance": config.tol,
        "sample_count": result.sample_count,
        "worst_residuals": {k: _float(v) for k, v in sorted(result.worst_residuals.items())},
        "worst_points": {k: [_float(c) for c in v] for k, v in sorted(result.worst_points.items())},
        "near_degenerate_count": result.near_degenerate_count,
        "critical_count": result.critical_count,
    }
    if config.fmt == "csv":
        text = _csv_text(["criterion", "worst_residual", "passes"],
                         [[k, v, v < config.tol] for k, v in payload["worst_residuals"].items()])
    elif config.fmt == "human":
        lines = [f"verdict: {', '.join(payload['verdict'])}  ({result.sample_count} points, tol {config.tol:g})"]
        for k, v in payload["worst_residuals"].items():
            lines.append(f"  {k:18s} {v:.3e}  {'ok' if v < config.tol else 'fails'}")
        text = "\n".join(lines) + "\n"
    else:
        text = _dump_json(payload)
    return 0, text


# -- reduce --------------------------------------------------------------------------


def _solve(args):
    branch = args.branch
    if branch == "kink":
        return reductions.cylinder_kink(args.k, args.A, (args.s_min, args.s_max), args.step or 0.01)
    if branch == "pendulum":
        return reductions.cylinder_pendulum(args.k, args.C, args.alpha0, step=args.step or 1e-3)
    if branch == "ball":
        try:
            return reductions.solve_ball_profile(args.n, args.C, (args.r0, 1.0), step=args.step or 1e-4)
        except InfeasibleConstantError as err:
            raise InfeasibleConstantError(
                f"{err}. The ball branch needs C >= n - 1; the constant profile rho = pi/2 is 'reduce equator'."
            ) from None
    if branch == "constant":
        return reductions.cylinder_constant(args.k, args.alpha)
    return reductions.equator(args.n, (args.r0, 1.0))


def cmd_reduce(config, args):
    sol = _solve(args)
    summary = reductions.reconstruct_and_verify(sol)
    inv = float(np.max(sol.invariant_residual()))
    ok = (
        summary.max_inf_laplacian < REDUCTION_TOL
        and summary.max_energy_error < REDUCTION_TOL
        and inv < INVARIANT_TOL
    )
    csv_text = sol.to_csv()
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(csv_text)
    payload = {
        "command": "reduce",
        "kind": sol.kind,
        "params": {k: v for k, v in sorted(sol.params.items())},
        "conserved_constant": sol.conserved_constant,
        "sample_count": len(sol.parameter),
        "max_invariant_residual": _float(inv),
        "events": list(sol.events),
        "period": sol.period,
        "verification": {k: (_float(v) if isinstance(v, float) else v) for k, v in summary.as_dict().items()},
        "csv": config.out,
        "pass": bool(ok),
    }
    if config.fmt == "csv":
        text = csv_text
    elif config.fmt == "human":
        text = (
            f"{sol.kind}: {len(sol.parameter)} samples, invariant residual {inv:.2e}\n"
            f"  max |Delta_inf| {summary.max_inf_laplacian:.2e}, energy error {summary.max_energy_error:.2e}"
            f" ({summary.energy_reference})\n"
            + "".join(f"  event: {e}\n" for e in sol.events)
            + (f"  period: {sol.period:.10g}\n" if sol.period else "")
            + f"  {'PASS' if ok else 'FAIL'}\n"
        )
    else:
        text = _dump_json(payload)
    return (0 if ok else 1), text


# -- conformal -----------------------------------------------------------------------


_MODELS = {
    "sphere": sphere_equation_residual,
    "hyperbolic": hyperbolic_equation_residual,
    "restriction": sphere_restriction_residual,
}


def _model_points(model, dim, count, seed):
    rng = np.random.default_rng(seed)
    if model == "restriction":
        p = rng.normal(size=(count, dim))
        return p / np.linalg.norm(p, axis=1)[:, None]
    if model == "hyperbolic":
        p = rng.normal(size=(count, dim))
        radius = 0.95 * rng.uniform(size=count) ** (1.0 / dim)
        return p / np.linalg.norm(p, axis=1)[:, None] * radius[:, None]
    return rng.uniform(-2.0, 2.0, size=(count, dim))


def cmd_conformal(config, args):
    u = parse(args.u, args.dim)
    pts = _model_points(args.model, args.dim, args.points, 0 if config.seed is None else config.seed)
    res = np.abs(_MODELS[args.model](u, pts))
    worst = int(np.argmax(res))
    ok = bool(res[worst] < config.tol)
    payload = {
        "command": "conformal",
        "model": args.model,
        "u": args.u,
        "dim": args.dim,
        "sample_count": len(pts),
        "max_residual": _float(res[worst]),
        "worst_point": [_float(c) for c in pts[worst]],
        "tolerance": config.tol,
        "pass": ok,
    }
    if config.fmt == "human":
        text = f"{args.model}: max residual {res[worst]:.3e} over {len(pts)} points  {'PASS' if ok else 'FAIL'}\n"
    elif config.fmt == "csv":
        text = _csv_text([f"x{i + 1}" for i in range(args.dim)] + ["residual"],
                         [[repr(float(c)) for c in p] + [repr(float(r))] for p, r in zip(pts, res)])
    else:
        text = _dump_json(payload)
    return (0 if ok else 1), text


# -- catalog -------------------------------------------------------------------------


def cmd_catalog(config):
    rows = [
        {
            "id": e.id,
            "description": e.provenance,
            "source_dim": e.map.source.dim,
            "target_dim": e.map.target.dim,
            "expected_verdict": sorted(e.expected_flags),
            "closed_form_energy": e.expected_energy is not None,
            "negative_control": e.negative,
        }
        for e in catalog_entries()
    ]
    if config.fmt == "human":
        text = "".join(f"{r['id']:28s} {r['description']}\n" for r in rows)
    elif config.fmt == "csv":
        text = _csv_text(["id", "description", "expected_verdict", "negative_control"],
                         [[r["id"], r["description"], " ".join(r["expected_verdict"]), r["negative_control"]]
                          for r in rows])
    else:
        text = _dump_json({"command": "catalog", "entries": rows})
    return 0, text


# -- argument parsing ------------------------------------------------------------------


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL, help="residual tolerance")
    common.add_argument("--grid", type=_positive_int, default=None, help="points per axis (overrides shipped grids)")
    common.add_argument("--seed", type=int, default=None, help="add seeded random sample points")
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "human"), default="json")
    common.add_argument("--out", default=None, help="write the report (CSV data for 'reduce') to a file")

    p = argparse.ArgumentParser(prog="infharm", description="Infinity harmonic map checks.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="verify catalog entries")
    c.add_argument("--entry", action="append", default=[], help="catalog id (repeatable)")

    c = sub.add_parser("classify", parents=[common], help="classify a map from a YAML description")
    c.add_argument("file")

    c = sub.add_parser("reduce", parents=[common], help="solve a symmetric reduction")
    c.add_argument("branch", choices=("kink", "pendulum", "ball", "constant", "equator"))
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--A", type=float, default=0.0)
    c.add_argument("--C", type=float, default=2.0)
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--alpha", type=float, default=math.pi / 3, help="constant profile value")
    c.add_argument("--alpha0", type=float, default=0.0, help="pendulum initial profile value")
    c.add_argument("--step", type=_positive_float, default=None)
    c.add_argument("--r0", type=_positive_float, default=0.5)
    c.add_argument("--s-min", dest="s_min", type=float, default=-5.0)
    c.add_argument("--s-max", dest="s_max", type=float, default=5.0)

    c = sub.add_parser("conformal", parents=[common], help="model-space equation residuals")
    c.add_argument("--model", choices=sorted(_MODELS), default="sphere")
    c.add_argument("--u", required=True, help="expression in x1..xd")
    c.add_argument("--dim", type=_positive_int, default=2)
    c.add_argument("--points", type=_positive_int, default=100)

    sub.add_parser("catalog", parents=[common], help="list catalog entries")
    return p


def run(argv=None):
    """Parse and dispatch; returns (exit code, output text, report path or None)."""
    args = build_parser().parse_args(argv)
    config = RunConfig(args.command, getattr(args, "entry", []), getattr(args, "file", None),
                       args.tol, args.grid, args.fmt, args.seed, args.out)
    # for 'reduce', --out names the CSV file and the report still goes to stdout
    report_path = None if args.command == "reduce" else args.out
    if args.command == "check":
        code, text = cmd_check(config)
    elif args.command == "classify":
        code, text = cmd_classify(config)
    elif args.command == "reduce":
        code, text = cmd_reduce(config, args)
    elif args.command == "conformal":
        code, text = cmd_conformal(config, args)
    else:
        code, text = cmd_catalog(config)
    return code, text, report_path


def main(argv=None):
    try:
        code, text, report_path = run(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    except InfharmError as err:
        print(f"infharm: error: {err}", file=sys.stderr)
        return 2
    if report_path:
        with open(report_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code
