"""Command-line front end: single-point analysis, sweeps, simulation, validation.

Exit codes: 0 success, 1 validation failure, 2 invalid input / unstable point.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import validation
from .age import age_lower_bound, system_time_lb, virtual_service_moments
from .analytic import (
    check_stability,
    expected_queue_length,
    peak_age_ordinary,
    priority_age,
    reference_mm1_age,
)
from .params import InvalidConfig, InvalidRate, ModelParams, UnstableSystem
from .sim import SimConfig, mix64, run

CSV_COLUMNS = [
    "swept_value", "margin", "pi0", "e_n", "peak_age_1", "age_lb_1", "age_u2",
    "age_ref", "sim_age_1", "sim_peak_1", "sim_age_2", "sim_e_n", "seed",
    "deliveries", "stable",
]


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfig(f"config line without '=': {raw.rstrip()}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Fill arguments still at their defaults from the config file; flags win."""
    if not getattr(args, "config", None):
        return
    file_vals = _read_config_file(args.config)
    defaults = {a.dest: a.default for a in parser._actions}
    for key, raw in file_vals.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) != defaults.get(key):
            continue  # explicitly given on the command line
        current = defaults.get(key)
        if isinstance(current, bool):
            val = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            val = int(raw)
        elif isinstance(current, float) or current is None:
            try:
                val = float(raw)
            except ValueError:
                val = raw
        else:
            val = raw
        setattr(args, key, val)


def _params_from_args(args) -> ModelParams:
    missing = [n for n, v in (("--l1", args.l1), ("--l2", args.l2),
                              ("--m1", args.m1), ("--m2", args.m2)) if v is None]
    if missing:
        raise InvalidRate(f"missing rate flags: {', '.join(missing)}")
    return ModelParams(lambda1=args.l1, lambda2=args.l2, mu1=args.m1, mu2=args.m2)


def _analysis_fields(params: ModelParams) -> dict:
    rep = check_stability(params)
    out = {
        "lambda1": params.lambda1, "lambda2": params.lambda2,
        "mu1": params.mu1, "mu2": params.mu2,
        "margin": rep.margin, "stable": rep.is_stable,
    }
    if not rep.is_stable:
        return out
    law = virtual_service_moments(params)
    lb = system_time_lb(params)
    out.update({
        "pi0": rep.pi0,
        "e_n": expected_queue_length(params),
        "peak_age_1": peak_age_ordinary(params),
        "age_lb_1": age_lower_bound(params),
        "age_u2": priority_age(params) if params.lambda2 > 0 else None,
        "age_ref": reference_mm1_age(params.lambda1, params.mu1),
        "e_z": law.mean_Z,
        "rho": lb.rho,
        "alpha1": lb.alpha1,
        "alpha2": lb.alpha2,
    })
    return out


def cmd_analyze(args) -> int:
    try:
        params = _params_from_args(args)
    except InvalidRate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fields = _analysis_fields(params)
    if args.format == "json":
        print(json.dumps(fields, indent=2))
    else:
        for key, val in fields.items():
            print(f"{key} = {val!r}")
    return 0 if fields["stable"] else 2


def cmd_simulate(args) -> int:
    try:
        params = _params_from_args(args)
        config = SimConfig(
            seed=args.seed, target_deliveries=args.deliveries,
            warmup_deliveries=args.warmup, mode=args.mode,
        )
    except (InvalidRate, InvalidConfig) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    res = run(params, config)
    out = {
        "avg_age_1": res.avg_age_1,
        "avg_peak_1": res.avg_peak_1,
        "avg_age_2": res.avg_age_2,
        "time_avg_n": res.time_avg_n,
        "z_mean": res.z_mean,
        "z_m2": res.z_m2,
        "mean_system_time_1": res.mean_system_time_1,
        "deliveries_observed": res.deliveries_observed,
        "sim_time": res.sim_time,
        "race_freqs": list(res.race_freqs),
        "seed": config.seed,
        "mode": config.mode,
    }
    print(json.dumps(out, indent=2))
    return 0


def sweep_rows(args) -> list[dict]:
    fixed = {"l1": args.l1, "l2": args.l2, "m1": args.m1, "m2": args.m2}
    name = args.sweep
    if name not in fixed:
        raise InvalidRate(f"unknown sweep parameter {name!r}")
    if args.points < 1 or args.to < args.frm:
        raise InvalidRate("sweep grid must be increasing with at least one point")
    deliveries = args.deliveries
    if args.quick:
        deliveries = min(deliveries, 100_000)
    rows = []
    for idx in range(args.points):
        if args.points == 1:
            val = args.frm
        else:
            val = args.frm + (args.to - args.frm) * idx / (args.points - 1)
        rates = dict(fixed)
        rates[name] = val
        if any(v is None for v in rates.values()):
            raise InvalidRate("all four rates are needed (three fixed + swept)")
        params = ModelParams(lambda1=rates["l1"], lambda2=rates["l2"],
                             mu1=rates["m1"], mu2=rates["m2"])
        rep = check_stability(params)
        seed = mix64(args.seed, idx)
        row = {c: "" for c in CSV_COLUMNS}
        row["swept_value"] = val
        row["seed"] = seed
        row["deliveries"] = deliveries if not args.no_sim else ""
        row["stable"] = rep.is_stable
        row["margin"] = rep.margin
        if rep.is_stable:
            row["pi0"] = rep.pi0
            row["e_n"] = expected_queue_length(params)
            row["peak_age_1"] = peak_age_ordinary(params)
            row["age_lb_1"] = age_lower_bound(params)
            row["age_ref"] = reference_mm1_age(params.lambda1, params.mu1)
        if params.lambda2 > 0:
            row["age_u2"] = priority_age(params)
        if not args.no_sim and rep.is_stable:
            config = SimConfig(seed=seed, target_deliveries=deliveries,
                               warmup_deliveries=args.warmup, mode=args.mode)
            res = run(params, config)
            row["sim_age_1"] = res.avg_age_1
            row["sim_peak_1"] = res.avg_peak_1
            row["sim_age_2"] = res.avg_age_2
            row["sim_e_n"] = res.time_avg_n
        rows.append(row)
    return rows


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_sweep(args) -> int:
    try:
        rows = sweep_rows(args)
    except (InvalidRate, InvalidConfig) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lines = [",".join(CSV_COLUMNS)]
    lines += [",".join(_format_cell(row[c]) for c in CSV_COLUMNS) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    checks = validation.run_all(quick=args.quick)
    failed = validation.print_report(checks)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aoiq")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_rates(p):
        p.add_argument("--l1", type=float, default=None, help="ordinary arrival rate")
        p.add_argument("--l2", type=float, default=None, help="priority arrival rate")
        p.add_argument("--m1", type=float, default=None, help="ordinary service rate")
        p.add_argument("--m2", type=float, default=None, help="priority service rate")
        p.add_argument("--config", default=None, help="key = value file; flags win")

    def add_sim_flags(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--deliveries", type=int, default=1_000_000)
        p.add_argument("--warmup", type=int, default=1_000)
        p.add_argument("--mode", choices=["true", "fictitious"], default="true")

    p = sub.add_parser("analyze", help="closed-form report for one parameter point")
    add_rates(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="one simulation run, JSON summary")
    add_rates(p)
    add_sim_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="parameter sweep, CSV output")
    add_rates(p)
    add_sim_flags(p)
    p.add_argument("--sweep", default="l2", help="swept parameter name")
    p.add_argument("--from", dest="frm", type=float, default=0.5)
    p.add_argument("--to", type=float, default=19.0)
    p.add_argument("--points", type=int, default=38)
    p.add_argument("--no-sim", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--quick", action="store_true",
                   help="cap simulation at 1e5 deliveries per point")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the full cross-validation suite")
    p.add_argument("--quick", action="store_true", help="reduced run lengths")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args, parser)
    except (InvalidConfig, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UnstableSystem as exc:
        print(f"error: unstable system: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
