"""Command-line front end: ``spinordeform <subcommand> [scenario] [flags]``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on
scenario or argument errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .scenario import BUILTIN_SCENARIOS, ScenarioError, load_scenario
from .spin_algebra import constants_json
from .suites import SUITES, run_suite

__all__ = ["build_parser", "format_constants", "format_report", "main"]

SIG_DIGITS = 10


def _clean(v):
    """JSON-ready copy with floats rounded to ``SIG_DIGITS`` significant digits."""
    if isinstance(v, (bool, np.bool_)) or v is None or isinstance(v, str):
        return bool(v) if isinstance(v, np.bool_) else v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_clean(v.real), _clean(v.imag)]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not np.isfinite(v):
            return str(v)
        return float(f"{v:.{SIG_DIGITS}g}") + 0.0
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _record_dict(r) -> dict:
    out = {
        "name": r.name,
        "point_index": r.point_index,
        "point": _clean(r.point),
        "value": _clean(r.value),
        "residual": _clean(r.residual),
        "tolerance": _clean(r.tolerance),
        "bound": r.bound,
        "pass": r.passed,
    }
    if r.error is not None:
        out["error"] = r.error
    return out


def format_report(subcommand: str, scenario, records, output: str = "json") -> str:
    rows = [_record_dict(r) for r in records]
    if output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point_index", "name", "x0", "x1", "x2", "x3", "value", "residual", "tolerance", "bound", "pass"])
        for row in rows:
            w.writerow(
                [row["point_index"], row["name"], *row["point"], json.dumps(row["value"], separators=(",", ":")), json.dumps(row["residual"]), row["tolerance"], row["bound"], str(row["pass"]).lower()]
            )
        return buf.getvalue()
    report = {
        "subcommand": subcommand,
        "scenario": scenario.name,
        "seed": scenario.seed,
        "constants": {"hbar": scenario.constants.hbar, "c": scenario.constants.c, "mass": scenario.constants.mass},
        "eps": list(scenario.eps_ladder),
        "pass": all(row["pass"] for row in rows),
        "records": rows,
    }
    return json.dumps(_clean(report), indent=1) + "\n"


def format_constants(tables: dict) -> str:
    """One table per line, compact separators, keys in table order."""
    lines = [f' "{name}": {json.dumps(value, separators=(",", ":"))}' for name, value in tables.items()]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def _eps_list(text: str):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid eps list {text!r}") from exc
    return values


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinordeform", description="Spinor-geometry check suites on scenario files.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("dump-constants", help="print the constant tables as JSON")
    for name in SUITES:
        p = sub.add_parser(name)
        p.add_argument("scenario", help=f"scenario file or builtin name ({', '.join(BUILTIN_SCENARIOS)})")
        p.add_argument("--output", choices=("json", "csv"), default="json")
        p.add_argument("--tolerance-scale", type=_positive, default=1.0)
        p.add_argument("--natural-units", action="store_true")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--eps", type=_eps_list, default=None, help="comma-separated eps ladder")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.subcommand == "dump-constants":
        sys.stdout.write(format_constants(constants_json()))
        return 0
    try:
        sc = load_scenario(args.scenario, seed=args.seed, natural_units=args.natural_units, eps=args.eps)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.subcommand in ("stress-tensor", "dirac-residual") and sc.psi is None:
        print(f"error: scenario {sc.name!r} has no psi block", file=sys.stderr)
        return 2
    if args.subcommand == "deform" and sc.h is None:
        print(f"error: scenario {sc.name!r} has no perturbation block", file=sys.stderr)
        return 2
    records = run_suite(args.subcommand, sc, args.tolerance_scale)
    sys.stdout.write(format_report(args.subcommand, sc, records, args.output))
    failed = [r for r in records if not r.passed]
    for r in failed:
        print(f"FAIL point {r.point_index} {r.name}: residual={r.residual} tolerance={r.tolerance} {r.error or ''}".rstrip(), file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
