"""Command-line entry point.

Subcommands: solve (one instance, one method), sweep (Monte Carlo harness,
CSV + JSON summary + optional figures), fit (performance-model calibration),
oracle (brute-force grid verification), link (channel-statistics check), and
report (figures from an existing sweep CSV).

Exit codes: 0 success, 2 config validation error, 3 infeasible problem,
4 oracle-size refusal. Diagnostics go to stderr; results go to --out or
stdout only.
"""

import argparse
import json
import sys
from pathlib import Path

from . import ao, configio
from .baselines import OracleGrid, era_allocation, oracle_solve, pbwf_allocation
from .errors import ConfigError, InfeasibleProblemError, OracleSizeError
from .linksim import LinkConfig, run_reconstruction_trials
from .perf import fit
from .scenario import run_sweep, summarize_records, write_records_csv
from .system import latency, rate, total_cost

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_ORACLE_SIZE = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="toklink",
        description="Joint bandwidth/power/token-length allocation and "
                    "link-level token transmission simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem instance")
    p_solve.add_argument("--config", required=True, help="problem config JSON")
    p_solve.add_argument("--method", default="proposed",
                         choices=["proposed", "era", "pbwf"])
    p_solve.add_argument("--out", default=None, help="output JSON path (default stdout)")

    p_sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep")
    p_sweep.add_argument("--scenario", required=True, help="scenario JSON")
    p_sweep.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p_sweep.add_argument("--summary-out", default=None,
                         help="JSON summary path (default: <out>.summary.json)")
    p_sweep.add_argument("--plot-dir", default=None,
                         help="also render figures into this directory")

    p_fit = sub.add_parser("fit", help="calibrate a performance model")
    p_fit.add_argument("--data", required=True, help="calibration data JSON")
    p_fit.add_argument("--out", default=None, help="output JSON path (default stdout)")

    p_oracle = sub.add_parser("oracle", help="brute-force grid search")
    p_oracle.add_argument("--config", required=True, help="problem config JSON")
    p_oracle.add_argument("--grid", type=int, default=16,
                          help="grid resolution per budget axis (default 16)")
    p_oracle.add_argument("--out", default=None, help="output JSON path (default stdout)")

    p_link = sub.add_parser("link", help="link-level reconstruction statistics")
    p_link.add_argument("--snr-db", type=float, required=True)
    p_link.add_argument("--trials", type=int, required=True)
    p_link.add_argument("--rows", type=int, default=16)
    p_link.add_argument("--cols", type=int, default=32)
    p_link.add_argument("--window", type=int, default=1)
    p_link.add_argument("--seed", type=int, default=0,
                        help="RNG seed (default 0; never implicit entropy)")
    p_link.add_argument("--out", default=None, help="output JSON path (default stdout)")

    p_report = sub.add_parser("report", help="render figures from a sweep CSV")
    p_report.add_argument("--csv", required=True, help="sweep CSV path")
    p_report.add_argument("--outdir", required=True, help="figure output directory")
    p_report.add_argument("--formats", default="png",
                          help="comma-separated image formats (default png)")

    return parser


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out_path, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _allocation_payload(method, alloc, devices, cfg, converged=None, half_steps=None):
    cost = total_cost(alloc, devices, cfg)
    device_rows = []
    for i, dev in enumerate(devices):
        r = rate(alloc.bandwidth[i], alloc.power[i], dev.channel_gain, cfg.noise_psd)
        device_rows.append({
            "id": dev.id,
            "channel_gain": dev.channel_gain,
            "rate_bps": r,
            "latency_s": latency(alloc.tokens[i], cfg.bits_per_token, r),
        })
    return {
        "method": method,
        "allocation": alloc.as_dict(),
        "cost": {
            "total": cost.total,
            "latency_term": cost.latency_term,
            "perf_term": cost.perf_term,
            "per_device_latency_s": [float(v) for v in cost.per_device_latency],
        },
        "devices": device_rows,
        "converged": converged,
        "half_steps": half_steps,
    }


def _cmd_solve(args):
    devices, cfg = configio.load_config(args.config)
    if args.method == "proposed":
        trace = ao.solve_multistart(devices, cfg)
        payload = _allocation_payload("proposed", trace.final, devices, cfg,
                                      converged=trace.converged,
                                      half_steps=len(trace.iterations) - 1)
    elif args.method == "era":
        payload = _allocation_payload("era", era_allocation(devices, cfg), devices, cfg)
    else:
        payload = _allocation_payload("pbwf", pbwf_allocation(devices, cfg), devices, cfg)
    _emit(json.dumps(payload, indent=2), args.out)
    return EXIT_OK


def _cmd_sweep(args):
    scenario = configio.load_scenario(args.scenario)
    records = run_sweep(scenario)
    if args.out is None:
        from .scenario import records_csv_text
        _emit(records_csv_text(records, scenario.num_devices), None)
    else:
        write_records_csv(records, args.out, scenario.num_devices)
    summary_path = args.summary_out
    if summary_path is None and args.out is not None:
        summary_path = str(Path(args.out).with_suffix("")) + ".summary.json"
    if summary_path is not None:
        summary = summarize_records(records, scenario)
        with open(summary_path, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    if args.plot_dir is not None:
        if args.out is None:
            raise ConfigError("--plot-dir requires --out (figures are rendered from the CSV)")
        from .report import render_sweep_report
        written = render_sweep_report(args.out, args.plot_dir)
        print(f"wrote {len(written)} figure file(s) to {args.plot_dir}", file=sys.stderr)
    return EXIT_OK


def _cmd_fit(args):
    data = configio.load_fit_data(args.data)
    result = fit(data)
    payload = {
        "alpha": result.model.alpha,
        "beta": result.model.beta,
        "gamma": result.model.gamma,
        "sse": result.sse,
        "degenerate": result.degenerate,
    }
    _emit(json.dumps(payload, indent=2), args.out)
    return EXIT_OK


def _cmd_oracle(args):
    devices, cfg = configio.load_config(args.config)
    try:
        grid = OracleGrid(bandwidth_points=args.grid, power_points=args.grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    alloc = oracle_solve(devices, cfg, grid)
    payload = _allocation_payload("oracle", alloc, devices, cfg)
    payload["grid"] = {"bandwidth_points": args.grid, "power_points": args.grid}
    _emit(json.dumps(payload, indent=2), args.out)
    return EXIT_OK


def _cmd_link(args):
    for name in ("trials", "rows", "cols", "window"):
        if getattr(args, name) < 1:
            raise ConfigError(f"--{name} must be >= 1, got {getattr(args, name)}")
    link = LinkConfig(window=args.window)
    result = run_reconstruction_trials(args.rows, args.cols, args.snr_db,
                                       args.trials, link=link, seed=args.seed)
    _emit(json.dumps(result, indent=2), args.out)
    return EXIT_OK


def _cmd_report(args):
    from .report import render_sweep_report
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    if not formats:
        raise ConfigError("--formats must name at least one image format")
    try:
        written = render_sweep_report(args.csv, args.outdir, formats)
    except FileNotFoundError:
        raise ConfigError(f"sweep CSV not found: {args.csv}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"wrote {len(written)} figure file(s) to {args.outdir}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "fit": _cmd_fit,
    "oracle": _cmd_oracle,
    "link": _cmd_link,
    "report": _cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleProblemError as exc:
        print(f"infeasible problem: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OracleSizeError as exc:
        print(f"oracle size refusal: {exc}", file=sys.stderr)
        return EXIT_ORACLE_SIZE


if __name__ == "__main__":
    sys.exit(main())
