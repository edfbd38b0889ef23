"""Command-line front end: simulate / sweep / find-min-ebn0 / selftest."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, load_config, preset, validate, with_ebn0

OUT_DIR_ENV = "URASPREAD_OUT_DIR"


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ka", type=int, help="number of active users (with --preset)")
    p.add_argument("--preset", action="store_true",
                   help="use the built-in parameter table row covering --ka")
    p.add_argument("--config", type=Path, help="key=value parameter file")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-noise", action="store_true")
    p.add_argument("--list-size", type=int)
    p.add_argument("--k-delta", type=int)
    p.add_argument("--group-size", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _build_params(args, ebn0_db: float):
    import dataclasses

    if args.config:
        params = load_config(args.config)
        params = with_ebn0(params, ebn0_db) if ebn0_db is not None else params
    elif args.ka is not None:
        params = preset(args.ka, ebn0_db if ebn0_db is not None else 0.0)
    else:
        raise ConfigError("need --config FILE or --ka N (table preset)")
    override = {}
    if args.list_size is not None:
        override["list_size"] = args.list_size
    if args.k_delta is not None:
        override["K_delta"] = args.k_delta
    if args.group_size is not None:
        override["g"] = args.group_size
    if override:
        params = dataclasses.replace(params, **override)
    problems = validate(params)
    if problems:
        raise ConfigError("; ".join(problems))
    return params


def _out_path(args, default_name: str) -> Path:
    if args.out:
        return args.out
    base = Path(os.environ.get(OUT_DIR_ENV, "."))
    base.mkdir(parents=True, exist_ok=True)
    return base / default_name


def _cmd_simulate(args) -> int:
    params = _build_params(args, args.ebn0_db)
    code = harness.build_code(params)
    results = harness.run_trials(params, code, args.seed, args.trials,
                                 jobs=args.jobs, zero_noise=args.zero_noise)
    r = harness.aggregate(params, results)
    out = _out_path(args, f"simulate_ka{params.K_a}.{args.format}")
    harness.emit_results([r], args.format, out, params=params)
    print(f"ka={r.K_a} ebn0={r.ebn0_db:g} dB trials={r.trials} "
          f"pupe={r.pupe_mean:.5f} +-{r.pupe_ci95_halfwidth:.5f} "
          f"iters={r.mean_iterations:.2f} -> {out}")
    if args.bootstrap:
        lo, hi = harness.bootstrap_ci(results, n_boot=args.bootstrap,
                                      seed=args.seed)
        print(f"bootstrap 95% CI (trial-level, {args.bootstrap} resamples): "
              f"[{lo:.5f}, {hi:.5f}]")
    return 0


def _cmd_sweep(args) -> int:
    params = _build_params(args, args.ebn0_db[0])
    out = _out_path(args, f"sweep_ka{params.K_a}.csv")
    rows = harness.sweep(params, args.ebn0_db, args.trials,
                         master_seed=args.seed, jobs=args.jobs, out=out,
                         zero_noise=args.zero_noise)
    if args.format == "json":
        harness.emit_results(rows, "json", out.with_suffix(".json"), params=params)
    harness.write_reference_curves(out.parent / "reference_curves.json")
    for r in rows:
        print(f"ebn0={r.ebn0_db:g} pupe={r.pupe_mean:.5f} "
              f"+-{r.pupe_ci95_halfwidth:.5f}")
    print(f"rows -> {out}")
    return 0


def _cmd_find_min(args) -> int:
    params = _build_params(args, args.lo_db)
    out = _out_path(args, f"find_min_ka{params.K_a}.csv")
    res = harness.find_min_ebn0(params, args.target_pe, args.lo_db, args.hi_db,
                                step_db=args.step_db, trials=args.trials,
                                master_seed=args.seed, jobs=args.jobs, out=out)
    if res.warning:
        print(f"warning: {res.warning}", file=sys.stderr)
    if res.ebn0_db is None:
        print("not found: no grid point meets the target within its CI")
    else:
        print(f"minimum Eb/N0 meeting PUPE <= {args.target_pe}: "
              f"{res.ebn0_db:.2f} dB")
    return 0


def _cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run(verbose=True)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="uraspread",
        description="Unsourced random-access link-level simulator "
                    "(random spreading + CRC-aided polar + MMSE + SIC)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo at one Eb/N0 point")
    _add_common(p)
    p.add_argument("--ebn0-db", type=float, required=True)
    p.add_argument("--bootstrap", type=int, metavar="N", default=0,
                   help="also report a trial-level bootstrap CI (N resamples)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="Monte Carlo over an Eb/N0 grid")
    _add_common(p)
    p.add_argument("--ebn0-db", type=float, nargs="+", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("find-min-ebn0",
                       help="smallest grid Eb/N0 meeting the PUPE target")
    _add_common(p)
    p.add_argument("--target-pe", type=float, default=0.05)
    p.add_argument("--lo-db", type=float, required=True)
    p.add_argument("--hi-db", type=float, required=True)
    p.add_argument("--step-db", type=float, default=0.05)
    p.set_defaults(func=_cmd_find_min)

    p = sub.add_parser("selftest", help="run the fast oracle/property checks")
    p.set_defaults(func=_cmd_selftest)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
