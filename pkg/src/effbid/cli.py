"""Command-line entry point.

Subcommands: simulate, analyze, optimize, markov, botgame, serve. Every run
writes its outputs plus a manifest.json describing the invocation; rerunning
with the same arguments and seed reproduces the output files byte for byte.
Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, game, markov, stats
from .errors import InsufficientDataError
from .market import ModelParams, Trajectory, simulate
from .efficiency import compare_profiles
from .rooms import replay_metrics


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems with exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(out_dir: Path, subcommand: str, params: dict, seed: int | None,
                    output_paths: list[Path], started: str) -> None:
    manifest = {
        "subcommand": subcommand,
        "params": {k: v for k, v in params.items() if k not in ("func", "subcommand")},
        "seed": seed,
        "output_paths": [str(p) for p in output_paths],
        "started": started,
        "finished": _utcnow(),
        "version": __version__,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("EFFBID_OUT_DIR", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_two_columns(path: Path, header: str, xs, ys) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for x, y in zip(xs, ys):
            fh.write(f"{float(x)!r},{float(y)!r}\n")


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    started = _utcnow()
    params = ModelParams(
        n_speculators=args.ns,
        n_random=args.nr,
        boundary_mode="reset_rule" if args.reset else "clamp",
        seed=args.seed,
        speculator_rule=args.rule,
    )
    initial = "center" if args.initial == "center" else int(args.initial)
    trajectory = simulate(params, args.steps, initial_demand=initial)
    traj_path = out / "trajectory.csv"
    params_path = out / "params.cfg"
    trajectory.to_csv(traj_path)
    params.to_config(params_path)
    _write_manifest(out, "simulate", vars(args) | {"initial": str(initial)},
                    args.seed, [traj_path, params_path], started)
    print(f"wrote {traj_path} ({len(trajectory)} states)")
    return 0


def _load_trajectory(args) -> Trajectory:
    traj_path = Path(args.infile)
    if args.params:
        params = ModelParams.from_config(args.params)
    else:
        sidecar = traj_path.parent / "params.cfg"
        if not sidecar.exists():
            raise FileNotFoundError(
                f"no params file: pass --params or place params.cfg next to {traj_path}"
            )
        params = ModelParams.from_config(sidecar)
    return Trajectory.from_csv(traj_path, params)


def _cmd_analyze(args) -> int:
    started = _utcnow()
    trajectory = _load_trajectory(args)
    out = Path(args.out) if args.out else Path(args.infile).parent
    out.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []

    returns = stats.log_returns(trajectory)
    magnitudes = np.abs(returns.values)

    fit = stats.hill_tail_exponent(magnitudes, tail_fraction=args.tail_fraction)
    tail_path = out / "tailfit.json"
    with open(tail_path, "w") as fh:
        json.dump(
            {
                "xi": fit.xi,
                "density_exponent": fit.density_exponent,
                "tail_fraction": fit.tail_fraction,
                "n_tail": fit.n_tail,
                "standard_error": fit.standard_error,
                "n_returns": len(returns),
                "skipped_steps": returns.skipped,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    outputs.append(tail_path)

    curve = stats.ccdf(magnitudes)
    ccdf_path = out / "ccdf.csv"
    _write_two_columns(ccdf_path, "magnitude,ccdf", curve.thresholds, curve.probabilities)
    outputs.append(ccdf_path)

    acf_r = stats.autocorrelation(returns.values, args.max_lag)
    acf_abs = stats.autocorrelation(magnitudes, args.max_lag)
    acf_path = out / "acf.csv"
    with open(acf_path, "w") as fh:
        fh.write("lag,acf_return,acf_magnitude\n")
        for lag in range(args.max_lag + 1):
            fh.write(f"{lag},{float(acf_r[lag])!r},{float(acf_abs[lag])!r}\n")
    outputs.append(acf_path)

    # Occupancy-hungry statistics are skipped (with a notice) on short runs.
    try:
        bins = stats.conditional_return_variance(trajectory, n_bins=args.bins)
    except InsufficientDataError as exc:
        print(f"skipping conditional variance: {exc}", file=sys.stderr)
    else:
        cond_path = out / "conditional_variance.csv"
        with open(cond_path, "w") as fh:
            fh.write("d_mean,mean_r2,count\n")
            for b in bins:
                fh.write(f"{float(b.d_mean)!r},{float(b.mean_r2)!r},{b.count}\n")
        outputs.append(cond_path)

    try:
        uni = stats.uniformity_test(
            trajectory.demands, trajectory.n_total, edge_exclusion=args.edge_exclusion
        )
    except InsufficientDataError as exc:
        print(f"skipping uniformity test: {exc}", file=sys.stderr)
    else:
        uni_path = out / "uniformity.json"
        with open(uni_path, "w") as fh:
            json.dump(
                {
                    "statistic": uni.statistic,
                    "passed": uni.passed,
                    "max_rel_deviation": uni.max_rel_deviation,
                    "edge_exclusion": args.edge_exclusion,
                },
                fh,
                indent=2,
            )
            fh.write("\n")
        outputs.append(uni_path)

    _write_manifest(out, "analyze", vars(args), trajectory.params.seed, outputs, started)
    print(f"xi = {fit.xi:.4f} (tail {fit.n_tail} points); outputs in {out}")
    return 0


def _cmd_optimize(args) -> int:
    out = _out_dir(args)
    started = _utcnow()
    params = ModelParams(n_speculators=args.ns, n_random=args.nr, seed=args.seed)
    profile = compare_profiles(params, tol=args.tol)
    profile_path = out / "profile.csv"
    profile.to_csv(profile_path)
    summary_path = out / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(
            {
                "n_total": params.n_total,
                "max_abs_difference": profile.max_abs_difference,
                "regularization": profile.regularization,
                "tol": args.tol,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    _write_manifest(out, "optimize", vars(args), args.seed, [profile_path, summary_path], started)
    print(f"max |q_price - q_demand| = {profile.max_abs_difference:.6g}")
    return 0


def _cmd_markov(args) -> int:
    out = _out_dir(args)
    started = _utcnow()
    mode = "reset_rule" if args.reset else "absorbing"
    outputs: list[Path] = []
    result = markov.stationary_distribution_for(
        args.n, mode, tol=args.tol, max_iter=args.max_iter
    )
    stationary_path = out / "stationary.csv"
    result.to_csv(stationary_path)
    outputs.append(stationary_path)
    if args.matrix_csv:
        if args.n > 200:
            raise ValueError("matrix export is limited to n <= 200")
        matrix = markov.transition_matrix(args.n, mode)
        matrix_path = out / "matrix.csv"
        matrix.to_csv(matrix_path)
        outputs.append(matrix_path)
    _write_manifest(out, "markov", vars(args), None, outputs, started)
    if result.warning:
        print(f"warning: {result.warning}", file=sys.stderr)
    print(
        f"stationary residual {result.residual:.3e} after {result.iterations} iterations; "
        f"wrote {stationary_path}"
    )
    return 0


def _cmd_botgame(args) -> int:
    out = _out_dir(args)
    started = _utcnow()
    payoff = {"minority": "minority_point", "return": "return_proportional"}[args.payoff]
    config = game.GameConfig(
        n_players=args.players,
        rounds=args.rounds,
        payoff_mode=payoff,
        skip_prob=args.skip_prob,
        seed=args.seed,
    )
    records = game.run_bot_game(config, args.bot)
    rounds_path = out / "rounds.jsonl"
    game.write_round_log(records, rounds_path)
    report = game.metrics(records)
    metrics_path = out / "metrics.json"
    with open(metrics_path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")
    _write_manifest(out, "botgame", vars(args), args.seed, [rounds_path, metrics_path], started)
    print(
        f"{args.bot} bots: variance={report.outcome_variance:.4f} "
        f"bubble_fraction={report.bubble_fraction:.4f}"
    )
    return 0


def _cmd_replay(args) -> int:
    report = replay_metrics(args.log)
    json.dump(report.to_json_dict(), sys.stdout, indent=2)
    print()
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    serve(args.config, host=args.host, port=args.port, log_dir=args.log_dir)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="effbid", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="run a seeded market simulation")
    p.add_argument("--ns", type=int, required=True, help="number of speculators")
    p.add_argument("--nr", type=int, default=0, help="number of random traders")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reset", action="store_true", help="use the boundary reset rule")
    p.add_argument("--rule", choices=["martingale", "fraction"], default="martingale")
    p.add_argument("--initial", default="center", help='"center" or an integer demand')
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="statistics of a trajectory CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--params", default=None, help="params.cfg (default: sidecar of --in)")
    p.add_argument("--tail-fraction", type=float, default=0.01)
    p.add_argument("--edge-exclusion", type=float, default=0.02)
    p.add_argument("--max-lag", type=int, default=100)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("optimize", help="price- vs demand-efficient probabilities")
    p.add_argument("--ns", type=int, required=True)
    p.add_argument("--nr", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("markov", help="stationary distribution of the idealized chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reset", action="store_true", help="reset-rule boundary (else absorbing)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=10**6)
    p.add_argument("--matrix-csv", action="store_true", help="also export the matrix (small n)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_markov)

    p = sub.add_parser("botgame", help="seeded bot game with metrics")
    p.add_argument("--players", type=int, default=11)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--skip-prob", type=float, default=0.0)
    p.add_argument("--bot", choices=["coin", "efficient"], default="coin")
    p.add_argument("--payoff", choices=["minority", "return"], default="minority")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_botgame)

    p = sub.add_parser("replay", help="metrics from a stored round log")
    p.add_argument("--log", required=True)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="run the live game service")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--log-dir", default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except Exception as exc:  # runtime failures map to exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
