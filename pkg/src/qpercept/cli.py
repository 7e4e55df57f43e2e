"""Command-line interface: reproduce the reference-constant battery and run
parameterized analyses, emitting machine-readable JSON (default) or CSV.

Output is deterministic: identical invocations with identical seeds produce
byte-identical bytes (numbers are rounded to 12 significant digits and no
timestamps are emitted).  Exit codes: 0 success, 1 computation or battery
failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Optional

from . import inference, manyworlds, reproduce, toymodels
from .errors import QPerceptError, ValidationError
from .operators import State

SEED_ENV_VAR = "QPERCEPT_SEED"
DEFAULT_SEED = reproduce.DEFAULT_SEED


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _flatten(prefix: str, obj: Any, rows: list[tuple[str, Any]]) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj))


def _emit(report: dict, fmt: str, output: Optional[str]) -> None:
    report = _round_floats(report)
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if report.get("command") == "reproduce":
            writer.writerow(["name", "expected", "observed", "tolerance", "pass"])
            for check in report["results"]["checks"]:
                writer.writerow(
                    [check["name"], check["expected"], check["observed"], check["tolerance"], check["pass"]]
                )
        else:
            rows: list[tuple[str, Any]] = []
            _flatten("", report, rows)
            writer.writerow(["key", "value"])
            writer.writerows(rows)
        text = buf.getvalue()
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValidationError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpercept",
        description="Perception-measure statistics for finite-dimensional quantum states.",
    )
    parser.add_argument("--config", help="JSON file of default option values")

    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=["json", "csv"], default=None)
        p.add_argument("--output", default=None, help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("reproduce", help="run the full reference-constant battery")
    common(p)
    p.add_argument("--only", default=None, help="restrict to checks whose name contains this")

    p = sub.add_parser("typicality", help="toy-model densities and typicalities")
    common(p)
    p.add_argument("--model", choices=["circle", "sphere", "ball"], required=True)
    p.add_argument("--theta", type=float, help="state polar angle")
    p.add_argument("--phi", type=float, help="perception azimuth")
    p.add_argument("--vartheta", type=float, help="perception polar angle (sphere model)")
    p.add_argument("--u", type=float)
    p.add_argument("--v", type=float)
    p.add_argument("--w", type=float)
    p.add_argument("--grid", type=int, default=None, help="also cross-check on an n-point grid (circle)")

    p = sub.add_parser("sqmn", help="power-law exponent statistics")
    common(p)
    p.add_argument("sub", choices=["posterior", "moments", "band", "experiment"])
    p.add_argument("--p", type=float, default=None, help="observed deviation")
    p.add_argument("--n", type=float, default=None, help="exponent")
    p.add_argument("--k", type=int, default=None, help="digit count")
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--floor", type=float, default=None, help="dual-typicality floor for the band")

    p = sub.add_parser("epr", help="paired-spin and divided-cat measures")
    common(p)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--parts", type=int, default=None)

    p = sub.add_parser("flag", help="sample a projector decomposition")
    common(p)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--ranks", required=True, help="comma-separated ranks, e.g. 2,1,1")

    p = sub.add_parser("twostep", help="two-step history decoherence diagnostics")
    common(p)
    p.add_argument("--theta0", type=float)
    p.add_argument("--phi0", type=float)
    p.add_argument("--theta1", type=float)
    p.add_argument("--phi1", type=float)
    p.add_argument("--theta2", type=float)
    p.add_argument("--phi2", type=float)
    p.add_argument("--mc", type=int, default=None, help="Monte Carlo sample count")
    p.add_argument("--shards", type=int, default=None)
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if not args.config:
        return
    with open(args.config) as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise ValidationError("config file must hold a JSON object of option values")
    for key, value in values.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValidationError(f"missing required options: {', '.join('--' + m for m in missing)}")


def _cmd_reproduce(args) -> tuple[dict, int]:
    seed = _resolve_seed(args)
    checks = reproduce.run_all(seed=seed, only=args.only)
    if not checks:
        raise ValidationError(f"no checks match --only {args.only!r}")
    failed = [c.name for c in checks if not c.passed]
    report = {
        "command": "reproduce",
        "params": {"only": args.only},
        "results": {
            "checks": [c.to_json() for c in checks],
            "passed": len(checks) - len(failed),
            "failed": failed,
        },
        "provenance": {"seed": seed},
    }
    return report, (1 if failed else 0)


def _cmd_typicality(args) -> tuple[dict, int]:
    if args.model == "circle":
        _require(args, "theta", "phi")
        res = toymodels.circle_model(args.theta, args.phi)
        results = {
            "density": res.density,
            "typicality": res.typicality,
            "reversed_typicality": res.reversed_typicality,
            "dual_typicality": res.dual_typicality,
        }
        if args.grid:
            results["grid_typicality"] = reproduce.circle_grid_typicality(
                args.theta, args.phi, points=args.grid
            )
        params = {"model": "circle", "theta": args.theta, "phi": args.phi}
    elif args.model == "sphere":
        _require(args, "theta", "vartheta", "phi")
        res = toymodels.sphere_model(args.theta, args.vartheta, args.phi)
        results = {
            "density": res.density,
            "typicality": res.typicality,
            "cold_probability": res.cold_probability,
        }
        params = {
            "model": "sphere",
            "theta": args.theta,
            "vartheta": args.vartheta,
            "phi": args.phi,
        }
    else:
        _require(args, "u", "v", "w")
        state = State.pure([1.0, 0.0])
        density = toymodels.ball_model_density(state, args.u, args.v, args.w)
        results = {
            "density": density,
            "prior_weight": toymodels.ball_prior_weight(args.u, args.v, args.w),
        }
        params = {"model": "ball", "u": args.u, "v": args.v, "w": args.w}
    return {"command": "typicality", "params": params, "results": results}, 0


def _cmd_sqmn(args) -> tuple[dict, int]:
    if args.sub == "posterior":
        _require(args, "p", "n")
        results = {
            "posterior_density": inference.posterior_density(args.p, args.n),
            "dual_posterior_density": inference.dual_posterior(args.p, args.n),
            "typicality": inference.gaussian_typicality(args.n, args.p),
            "reversed_typicality": inference.gaussian_reversed(args.n, args.p),
            "dual_typicality": inference.gaussian_dual(args.n, args.p),
        }
        params = {"sub": "posterior", "p": args.p, "n": args.n}
    elif args.sub == "moments":
        _require(args, "p")
        mean = inference.posterior_moment(args.p, 1)
        second = inference.posterior_moment(args.p, 2)
        dual_mean = inference.dual_posterior_moment(args.p, 1)
        dual_second = inference.dual_posterior_moment(args.p, 2)
        results = {
            "mean": mean,
            "std": math.sqrt(second - mean * mean),
            "dual_mean": dual_mean,
            "dual_std": math.sqrt(dual_second - dual_mean * dual_mean),
        }
        params = {"sub": "moments", "p": args.p}
    elif args.sub == "band":
        floor = 0.01 if args.floor is None else args.floor
        low, high = inference.gaussian_99_band(floor)
        results = {"low": low, "high": high, "dual_floor": floor}
        params = {"sub": "band", "floor": floor}
    else:
        _require(args, "k")
        n = 1.0 if args.n is None else args.n
        level = 0.99 if args.level is None else args.level
        results = {
            "probability": inference.canonical_digit_experiment(args.k, n),
            "confidence_bound": inference.confidence_bound(args.k, level),
            "level": level,
        }
        params = {"sub": "experiment", "k": args.k, "n": n}
    return {"command": "sqmn", "params": params, "results": results}, 0


def _cmd_epr(args) -> tuple[dict, int]:
    parts = 2 if args.parts is None else args.parts
    rep = toymodels.epr_cat_model(args.theta)
    results = {
        "mu_up_a": rep.mu_up_a,
        "mu_down_a": rep.mu_down_a,
        "mu_up_up": rep.mu_up_up,
        "mu_up_down": rep.mu_up_down,
        "mu_down_up": rep.mu_down_up,
        "mu_down_down": rep.mu_down_down,
        "confused_original": rep.confused_original,
        "unconfused_fraction_alternative": rep.unconfused_fraction_alternative(parts),
        "parts": parts,
    }
    return {"command": "epr", "params": {"theta": args.theta, "parts": parts}, "results": results}, 0


def _cmd_flag(args) -> tuple[dict, int]:
    try:
        ranks = tuple(int(r) for r in args.ranks.split(","))
    except ValueError as exc:
        raise ValidationError(f"could not parse ranks {args.ranks!r}") from exc
    seed = _resolve_seed(args)
    decomposition = manyworlds.sample_decomposition(args.dim, ranks, seed)
    densities = manyworlds.density_at(decomposition, State.maximally_mixed(args.dim))
    results = {
        "manifold_dimension": manyworlds.manifold_dimension(args.dim, ranks),
        "decomposition": decomposition.to_json(),
        "maximally_mixed_densities": [float(d) for d in densities],
    }
    report = {
        "command": "flag",
        "params": {"dim": args.dim, "ranks": list(ranks)},
        "results": results,
        "provenance": {"seed": seed},
    }
    return report, 0


def _cmd_twostep(args) -> tuple[dict, int]:
    if args.mc is not None:
        seed = _resolve_seed(args)
        shards = 1 if args.shards is None else args.shards
        mc = toymodels.linear_positivity_fraction(args.mc, seed, shards=shards)
        report = {
            "command": "twostep",
            "params": {"mc": args.mc},
            "results": {"linear_positivity_fraction": mc.fraction, "hits": mc.hits},
            "provenance": mc.provenance(),
        }
        return report, 0
    _require(args, "theta0", "phi0", "theta1", "phi1", "theta2", "phi2")
    rep = toymodels.two_step_analysis(
        toymodels.Direction(args.theta0, args.phi0),
        toymodels.Direction(args.theta1, args.phi1),
        toymodels.Direction(args.theta2, args.phi2),
    )
    tri = toymodels.triangle_equivalence(
        toymodels.Direction(args.theta0, args.phi0),
        toymodels.Direction(args.theta1, args.phi1),
        toymodels.Direction(args.theta2, args.phi2),
    )
    results = {
        "weak_residual": rep.weak_residual,
        "medium_residual": rep.medium_residual,
        "linearly_positive": rep.linearly_positive,
        "measures": list(rep.measures),
        "triangle_status": tri.status,
        "all_triangles_sub_pi": tri.all_triangles_sub_pi,
    }
    params = {
        "theta0": args.theta0,
        "phi0": args.phi0,
        "theta1": args.theta1,
        "phi1": args.phi1,
        "theta2": args.theta2,
        "phi2": args.phi2,
    }
    return {"command": "twostep", "params": params, "results": results}, 0


_HANDLERS = {
    "reproduce": _cmd_reproduce,
    "typicality": _cmd_typicality,
    "sqmn": _cmd_sqmn,
    "epr": _cmd_epr,
    "flag": _cmd_flag,
    "twostep": _cmd_twostep,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        report, code = _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"qpercept: invalid input: {exc}", file=sys.stderr)
        return 2
    except QPerceptError as exc:
        print(f"qpercept: computation failed: {exc}", file=sys.stderr)
        return 1
    fmt = args.format or "json"
    _emit(report, fmt, args.output)
    if code != 0 and args.command == "reproduce":
        failed = ", ".join(report["results"]["failed"])
        print(f"qpercept: failing checks: {failed}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
