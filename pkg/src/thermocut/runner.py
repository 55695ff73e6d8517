"""Matrix execution and CSV/plot emission.

Trials are independent, so the matrix can fan out over worker processes;
results are always written in the deterministic (controller, phantom,
seed) order, making repeated runs byte-identical. All CSVs use one
header line, a fixed column order, SI units, and 9 significant digits.
"""

from __future__ import annotations

import csv
import multiprocessing as mp
import os
from pathlib import Path

import numpy as np

from .config import SuiteConfig
from .metrics import success_rate, summarize_trial
from .trial import TRACE_COLUMNS, TrialConfig, TrialResult, run_trial

SUMMARY_COLUMNS = (
    "controller", "phantom", "trials", "success_rate", "mean_peak_deflection",
    "max_peak_deflection", "mean_deflection", "mean_width", "mean_velocity",
    "d_deflection", "d_width",
)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def _run_task(cfg: TrialConfig) -> TrialResult:
    return run_trial(cfg)


def _pool_init() -> None:
    # workers handle one trial at a time; keep numba single-threaded so
    # two workers do not fight over the two cores
    try:
        import numba
        numba.set_num_threads(1)
    except ImportError:
        pass


def trial_filename(cell_name: str, phantom: str, seed: int) -> str:
    return f"trial_{cell_name}_{phantom}_seed{seed}.csv"


def write_trace_csv(result: TrialResult, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        columns = [result.traces[name] for name in TRACE_COLUMNS]
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])


def run_matrix(suite: SuiteConfig, out_dir, jobs: int | None = None
               ) -> list[dict]:
    """Run every (controller, phantom, seed) cell and write outputs.

    Returns the per-cell summary rows. Trial failures are data, not
    errors; only I/O problems raise.
    """
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    tasks = []
    labels = []
    for cell in suite.cells:
        for phantom in suite.phantoms:
            for seed in suite.seeds:
                tasks.append(suite.trial_config(cell, phantom, seed))
                labels.append((cell.name, phantom, seed))
    if jobs is None:
        jobs = min(os.cpu_count() or 1, len(tasks))
    if jobs > 1:
        ctx = mp.get_context("fork")
        with ctx.Pool(processes=jobs, initializer=_pool_init) as pool:
            results = pool.map(_run_task, tasks, chunksize=1)
    else:
        results = [_run_task(cfg) for cfg in tasks]

    by_cell: dict[tuple[str, str], list[tuple[int, TrialResult]]] = {}
    for (cell_name, phantom, seed), result in zip(labels, results):
        write_trace_csv(result,
                        out_path / trial_filename(cell_name, phantom, seed))
        by_cell.setdefault((cell_name, phantom), []).append((seed, result))

    summary_rows = []
    for cell in suite.cells:
        for phantom in suite.phantoms:
            entries = by_cell.get((cell.name, phantom), [])
            cell_results = [r for _, r in entries]
            profile = suite.calibration.phantom(phantom)
            per_trial = [summarize_trial(r, profile) for r in cell_results]
            row = {
                "controller": cell.name,
                "phantom": phantom,
                "trials": len(cell_results),
                "success_rate": success_rate(cell_results),
                "mean_peak_deflection": float(np.mean(
                    [m["peak_deflection"] for m in per_trial])),
                "max_peak_deflection": float(np.max(
                    [m["peak_deflection"] for m in per_trial])),
                "mean_deflection": float(np.mean(
                    [m["mean_deflection"] for m in per_trial])),
                "mean_width": float(np.mean(
                    [m["mean_width"] for m in per_trial])),
                "mean_velocity": float(np.mean(
                    [m["mean_velocity"] for m in per_trial])),
                "d_deflection": float(np.nanmean(
                    [m["d_deflection"] for m in per_trial]))
                if per_trial else float("nan"),
                "d_width": float(np.nanmean(
                    [m["d_width"] for m in per_trial]))
                if per_trial else float("nan"),
            }
            summary_rows.append(row)
    write_summary_csv(summary_rows, out_path / "summary.csv")
    return summary_rows


def write_summary_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            out = []
            for key in SUMMARY_COLUMNS:
                value = row[key]
                out.append(value if isinstance(value, str)
                           else _fmt(float(value)))
            writer.writerow(out)


def read_trace_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    arr = np.asarray(rows, dtype=float) if rows else np.empty((0,
                                                               len(header)))
    return {name: arr[:, i] for i, name in enumerate(header)}


def report(in_dir, make_plots: bool = True) -> Path:
    """Rebuild a summary from trace CSVs; optionally render SVG plots.

    Groups traces by (controller, phantom) from their filenames and
    writes report.csv plus one SVG per group showing velocity,
    deflection, and width against cut position.
    """
    in_path = Path(in_dir)
    traces = sorted(in_path.glob("trial_*.csv"))
    if not traces:
        raise FileNotFoundError(f"no trial traces found in {in_path}")
    groups: dict[tuple[str, str], list[tuple[int, dict]]] = {}
    for path in traces:
        stem = path.stem[len("trial_"):]
        cell_name, phantom, seed_part = stem.rsplit("_", 2)
        seed = int(seed_part.removeprefix("seed"))
        groups.setdefault((cell_name, phantom), []).append(
            (seed, read_trace_csv(path)))

    rows = []
    for (cell_name, phantom), entries in sorted(groups.items()):
        entries.sort()
        peaks = [t["deflection_true"].max() if t["t"].size else 0.0
                 for _, t in entries]
        widths = [t["width_meas"].mean() if t["t"].size else 0.0
                  for _, t in entries]
        vels = [t["v_cmd"].mean() if t["t"].size else 0.0
                for _, t in entries]
        rows.append({
            "controller": cell_name, "phantom": phantom,
            "trials": len(entries),
            "mean_peak_deflection": float(np.mean(peaks)),
            "max_peak_deflection": float(np.max(peaks)),
            "mean_width": float(np.mean(widths)),
            "mean_velocity": float(np.mean(vels)),
        })
        if make_plots:
            _plot_group(in_path, cell_name, phantom, entries)

    out = in_path / "report.csv"
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ("controller", "phantom", "trials", "mean_peak_deflection",
                  "max_peak_deflection", "mean_width", "mean_velocity")
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[h] if isinstance(row[h], str)
                             else _fmt(float(row[h])) for h in header])
    return out


def _plot_group(out_dir: Path, cell_name: str, phantom: str,
                entries: list[tuple[int, dict]]) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    panels = (("v_cmd", 1e3, "velocity [mm/s]"),
              ("deflection_true", 1e3, "deflection [mm]"),
              ("width_meas", 1e3, "width [mm]"))
    for ax, (column, scale, label) in zip(axes, panels):
        for seed, trace in entries:
            ax.plot(trace["position"] * 1e3, trace[column] * scale,
                    lw=0.8, label=f"seed {seed}")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend(fontsize=7, ncol=3)
    axes[-1].set_xlabel("cut position [mm]")
    fig.suptitle(f"{cell_name} on {phantom}")
    fig.tight_layout()
    fig.savefig(out_dir / f"plot_{cell_name}_{phantom}.svg")
    plt.close(fig)
