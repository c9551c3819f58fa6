"""Command-line front end.

    fe-stab residual   --config cfg.json
    fe-stab identities --config cfg.json --format md
    fe-stab stabilize  --config cfg.json --out report.json
    fe-stab bounds     --config cfg.json
    fe-stab reproduce  corollary-3.6

Exit codes: 0 pass, 1 assertion failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import scenarios
from .bounds import (
    closed_form_bound,
    combined_bound,
    control_from_json,
    convergence_precheck,
    cubic_series_bound,
    quartic_series_bound,
    select_direction,
)
from .diffop import DEFAULT_MAX_PAIRS, sup_residual, symbolic_residual
from .errors import ConfigError, Diverged, FEStabError, InadmissibleControl, NotAnchored
from .funcmodel import Polynomial, dyadic_grid, model_from_json
from .hyers import ConvergenceCriteria, stabilize
from .identities import check_chain
from .scalar import parse_scalar, scalar_to_json

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

PASS, FAIL, ERROR = "Pass", "Fail", "Error"

CONFIG_KEYS = {
    "residual": {"model", "grid", "threshold", "max_pairs", "seed"},
    "identities": {"model", "parity", "grid", "tol"},
    "stabilize": {"model", "grid", "phi", "direction", "tol", "max_iterations", "stall_window", "max_pairs", "seed"},
    "bounds": {"phi", "x", "direction", "tol"},
    "reproduce": {"scenario", "seed"},
}
REQUIRED_KEYS = {
    "residual": {"model", "grid"},
    "identities": {"model"},
    "stabilize": {"model", "grid", "phi"},
    "bounds": {"phi"},
    "reproduce": {"scenario"},
}


def _config_error(message):
    raise ConfigError(message)


def _validate(command, config):
    if not isinstance(config, dict):
        _config_error("config must be a JSON object")
    unknown = set(config) - CONFIG_KEYS[command]
    if unknown:
        _config_error(f"unknown config keys for {command}: {sorted(unknown)}")
    missing = REQUIRED_KEYS[command] - set(config)
    if missing:
        _config_error(f"missing config keys for {command}: {sorted(missing)}")


def _grid(desc):
    if not isinstance(desc, dict) or set(desc) - {"lo", "hi", "depth"} or not {"lo", "hi", "depth"} <= set(desc):
        _config_error("grid must be an object with exactly lo, hi, depth")
    return dyadic_grid(parse_scalar(desc["lo"]), parse_scalar(desc["hi"]), int(desc["depth"]))


def _direction(value):
    if value in (None, "auto"):
        return "auto"
    if value in (1, -1, "1", "-1", "+1"):
        return int(value)
    _config_error(f"direction must be 'auto', 1 or -1, got {value!r}")


def cmd_residual(config, args):
    model = model_from_json(config["model"])
    grid = _grid(config["grid"])
    threshold = parse_scalar(config.get("threshold", 0))
    max_pairs = int(config.get("max_pairs", args.max_pairs or DEFAULT_MAX_PAIRS))
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    report = sup_residual(model, grid, max_pairs, seed, args.threads)
    results = {"residual": report.to_json(), "threshold": scalar_to_json(threshold)}
    if isinstance(model, Polynomial):
        results["symbolic_residual"] = str(symbolic_residual(model))
    ok = report.sup <= threshold
    return (PASS if ok else FAIL), results, None if ok else f"sup |D_f| = {report.sup} exceeds threshold {threshold}"


def cmd_identities(config, args):
    model = model_from_json(config["model"])
    parity = config.get("parity", "all")
    if parity not in ("all", "even", "odd"):
        _config_error(f"parity must be all, even or odd, got {parity!r}")
    grid = _grid(config["grid"]) if "grid" in config else None
    if grid is None and not isinstance(model, Polynomial):
        _config_error("a grid is required for non-polynomial models")
    tol = float(parse_scalar(config["tol"])) if "tol" in config else None
    reports = check_chain(model, parity, grid, tol)
    failed = [r.label for r in reports if not r.passed]
    results = {"checks": [r.to_json() for r in reports], "count": len(reports), "failed": failed}
    return (FAIL if failed else PASS), results, (f"identities failed: {failed}" if failed else None)


def cmd_stabilize(config, args):
    model = model_from_json(config["model"])
    grid = _grid(config["grid"])
    phi = control_from_json(config["phi"])
    direction = _direction(config.get("direction", "auto"))
    if direction == "auto":
        select_direction(phi)
    crit = ConvergenceCriteria(
        max_iterations=int(config.get("max_iterations", 60)),
        tol=float(parse_scalar(config.get("tol", 1e-12))),
        stall_window=int(config.get("stall_window", 4)),
    )
    max_pairs = int(config.get("max_pairs", args.max_pairs or DEFAULT_MAX_PAIRS))
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    try:
        report = stabilize(model, phi, grid, direction, crit, max_pairs, seed, args.threads)
    except (Diverged, NotAnchored) as exc:
        results = {"error_kind": type(exc).__name__, "message": str(exc)}
        diag = getattr(exc, "diagnostics", None)
        if diag is not None:
            results["diagnostics"] = diag.to_json()
        return FAIL, results, str(exc)
    results = report.to_json()
    if report.passed:
        return PASS, results, None
    reason = f"margin {report.margin} < -tol" if report.margin < -report.tol else "a component did not converge"
    return FAIL, results, reason


def cmd_bounds(config, args):
    phi = control_from_json(config["phi"])
    x = parse_scalar(config.get("x", "1"))
    direction = _direction(config.get("direction", "auto"))
    s = select_direction(phi) if direction == "auto" else direction
    tol = float(parse_scalar(config.get("tol", 1e-12)))
    results = {
        "direction": s,
        "precheck": {"quartic": convergence_precheck(phi, s, (4,)), "cubic": convergence_precheck(phi, s, (3,)),
                     "combined": convergence_precheck(phi, s)},
        "quartic": quartic_series_bound(phi, x, s, tol).to_json(),
        "cubic": cubic_series_bound(phi, x, s, tol).to_json(),
    }
    combined = combined_bound(phi, x, s, tol)
    results["combined"] = combined.to_json()
    try:
        results["closed_form"] = scalar_to_json(closed_form_bound(phi, x))
    except InadmissibleControl:
        results["closed_form"] = None
    if combined.discrepancy:
        return FAIL, results, "summed series and closed form disagree"
    return PASS, results, None


def cmd_reproduce(config, args):
    name = config["scenario"]
    if name not in scenarios.SCENARIOS:
        _config_error(f"unknown scenario {name!r}; known: {sorted(scenarios.SCENARIOS)}")
    seed = args.seed if args.seed is not None else config.get("seed")
    outcome = scenarios.run(name, seed)
    return (PASS if outcome["passed"] else FAIL), outcome, None if outcome["passed"] else f"scenario {name} failed"


COMMANDS = {
    "residual": cmd_residual,
    "identities": cmd_identities,
    "stabilize": cmd_stabilize,
    "bounds": cmd_bounds,
    "reproduce": cmd_reproduce,
}


def to_markdown(report: dict) -> str:
    """Render a run report; reads only the JSON payload."""
    lines = [f"# {report['command']}", "", f"**Status: {report['status']}**", ""]
    if report.get("failure"):
        lines += [f"Failure: {report['failure']}", ""]
    results = report.get("results") or {}
    if report["command"] == "identities" and "checks" in results:
        lines += ["| label | parity | status | residual size |", "|---|---|---|---|"]
        for check in results["checks"]:
            size = check.get("residual", check.get("max_abs", ""))
            lines.append(f"| {check['label']} | {check['parity']} | {check['status']} | {size} |")
        return "\n".join(lines) + "\n"
    if report["command"] == "stabilize" and "margin" in results:
        lines += [
            f"- quartic coefficient a = {results['a_quartic']}",
            f"- cubic coefficient b = {results['b_cubic']}",
            f"- direction s = {results['direction']:+d}",
            f"- iterations: {_pairs(results['iterations_used'])}",
            f"- converged: {_pairs(results['converged'])}",
            f"- grid error sup|f - Q - C| = {results['grid_error']}",
            f"- bound = {results['bound']}",
            f"- **margin = {results['margin']}**",
        ]
        lines += [f"- warning: {w}" for w in results.get("warnings", [])]
        return "\n".join(lines) + "\n"
    lines.append("```json")
    lines.append(json.dumps(results, indent=2, sort_keys=True))
    lines.append("```")
    return "\n".join(lines) + "\n"


def _pairs(mapping):
    return ", ".join(f"{k} {v}" for k, v in sorted(mapping.items()))


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(value):
    if isinstance(value, Fraction):
        return str(value)
    if hasattr(value, "item"):
        return value.item()
    raise TypeError(f"not JSON serialisable: {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fe-stab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "reproduce":
            p.add_argument("scenario", nargs="?", help=f"one of: {', '.join(scenarios.SCENARIOS)}")
            p.add_argument("--config")
        else:
            p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "md", "both"), default="json")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--max-pairs", type=int, default=None)
    return parser


def _load_config(args) -> dict:
    if args.command == "reproduce" and args.config is None:
        if not args.scenario:
            _config_error("reproduce needs a scenario name or --config")
        return {"scenario": args.scenario}
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except OSError as exc:
        _config_error(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        _config_error(f"config is not valid JSON: {exc}")
    if args.command == "reproduce" and args.scenario:
        config = dict(config, scenario=args.scenario)
    return config


def _emit(report: dict, args):
    text_json = _dump(report)
    text_md = to_markdown(json.loads(text_json))
    if args.out:
        base, ext = os.path.splitext(args.out)
        if args.format in ("json", "both"):
            with open(args.out if args.format == "json" or ext == ".json" else base + ".json", "w") as fh:
                fh.write(text_json)
        if args.format in ("md", "both"):
            with open(args.out if args.format == "md" else base + ".md", "w") as fh:
                fh.write(text_md)
        return
    if args.format in ("json", "both"):
        sys.stdout.write(text_json)
    if args.format in ("md", "both"):
        sys.stdout.write(text_md)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None and os.environ.get("FE_STAB_THREADS"):
        args.threads = int(os.environ["FE_STAB_THREADS"])
    start = time.perf_counter()
    config = None
    try:
        config = _load_config(args)
        _validate(args.command, config)
        status, results, failure = COMMANDS[args.command](config, args)
    except (ConfigError, InadmissibleControl, ValueError, KeyError, TypeError, FEStabError) as exc:
        status, results, failure = ERROR, {"error_kind": type(exc).__name__}, str(exc)
        print(f"fe-stab: error: {exc}", file=sys.stderr)
    report = {
        "command": args.command,
        "config": config,
        "results": results,
        "status": status,
        "failure": failure,
        "wall_time": round(time.perf_counter() - start, 6),
    }
    _emit(report, args)
    return {PASS: EXIT_PASS, FAIL: EXIT_FAIL, ERROR: EXIT_ERROR}[status]


if __name__ == "__main__":
    sys.exit(main())
