"""Figure rendering for sweep results.

Consumes the delimited sweep output and writes per-method mean curves to
image files: total cost versus the swept parameter, and the latency/
performance decomposition. Kept separate from the solver and harness so
the library core stays free of plotting dependencies.
"""

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = ["read_sweep_csv", "render_sweep_report"]

_AXIS_LABEL = {
    "bandwidth": "total bandwidth budget (Hz)",
    "power": "total power budget (W)",
    "lambda": "performance weight",
}

_METHOD_STYLE = {
    "proposed": dict(color="tab:blue", marker="o"),
    "pbwf": dict(color="tab:orange", marker="s"),
    "era": dict(color="tab:green", marker="^"),
    "oracle": dict(color="tab:red", marker="x"),
}


def read_sweep_csv(path):
    """Parse a sweep CSV into (sweep_param, {method: {value: rows}})."""
    grouped = defaultdict(lambda: defaultdict(list))
    sweep_param = None
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            sweep_param = row["sweep_param"]
            grouped[row["method"]][float(row["sweep_value"])].append({
                "total_cost": float(row["total_cost"]),
                "latency_term": float(row["latency_term"]),
                "perf_term": float(row["perf_term"]),
            })
    if sweep_param is None:
        raise ValueError(f"no records in {path}")
    return sweep_param, grouped


def _mean_curve(by_value, field):
    values = sorted(by_value)
    means = [sum(r[field] for r in by_value[v]) / len(by_value[v]) for v in values]
    return values, means


def _save(fig, outdir, stem, formats):
    paths = []
    for fmt in formats:
        path = Path(outdir) / f"{stem}.{fmt}"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        paths.append(path)
    plt.close(fig)
    return paths


def render_sweep_report(csv_path, outdir, formats=("png",)):
    """Render mean-cost and decomposition figures for a sweep CSV.

    Returns the list of files written.
    """
    sweep_param, grouped = read_sweep_csv(csv_path)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    xlabel = _AXIS_LABEL.get(sweep_param, sweep_param)
    written = []

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for method in sorted(grouped):
        values, means = _mean_curve(grouped[method], "total_cost")
        ax.plot(values, means, label=method,
                **_METHOD_STYLE.get(method, {}))
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mean total cost")
    ax.grid(True, alpha=0.3)
    ax.legend()
    written += _save(fig, outdir, f"cost_vs_{sweep_param}", formats)

    fig, (ax_lat, ax_perf) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    for method in sorted(grouped):
        values, lat = _mean_curve(grouped[method], "latency_term")
        _, perf = _mean_curve(grouped[method], "perf_term")
        style = _METHOD_STYLE.get(method, {})
        ax_lat.plot(values, lat, label=method, **style)
        ax_perf.plot(values, perf, label=method, **style)
    ax_lat.set_xlabel(xlabel)
    ax_lat.set_ylabel("mean max latency (s)")
    ax_lat.grid(True, alpha=0.3)
    ax_perf.set_xlabel(xlabel)
    ax_perf.set_ylabel("mean performance term")
    ax_perf.grid(True, alpha=0.3)
    ax_lat.legend()
    fig.tight_layout()
    written += _save(fig, outdir, f"terms_vs_{sweep_param}", formats)
    return written
