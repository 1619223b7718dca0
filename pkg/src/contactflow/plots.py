"""Deterministic SVG plots from run, analysis and sweep CSVs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import read_csv  # noqa: E402


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "contactflow", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _series_plot(rows, xkey, ykey, title, ylabel, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    x = [float(r[xkey]) for r in rows]
    y = [float(r[ykey]) for r in rows]
    if x:
        ax.plot(x, y, color="C0", lw=1.5)
    ax.set_xlabel(xkey)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)


def plot_run(run_dir, out=None) -> list[Path]:
    """``energy.svg`` and ``discrepancy.svg`` from ``series.csv``; ``monotonicity.svg`` if analysed."""
    run_dir = Path(run_dir)
    out = Path(out) if out is not None else run_dir / "plots"
    _, rows = read_csv(run_dir / "series.csv")
    made = [
        _series_plot(rows, "time", "energy", "Total energy", "energy", out / "energy.svg"),
        _series_plot(rows, "time", "abs_discrepancy", "Discrepancy", "integral of |xi|",
                     out / "discrepancy.svg"),
    ]
    mono = run_dir / "analysis" / "monotonicity.csv"
    if mono.exists():
        made.append(plot_monotonicity(mono, out / "monotonicity.svg"))
    return made


def plot_monotonicity(csv_path, path, spec: int | None = None) -> Path:
    """Difference quotient of ``G`` against the right-hand side at the fitted constants."""
    _, rows = read_csv(csv_path)
    if rows and spec is None:
        spec = int(rows[0]["spec"])
    sel = [r for r in rows if int(r["spec"]) == spec] if rows else []
    fig, ax = plt.subplots(figsize=(6, 4))
    if sel:
        t = [float(r["t_mid"]) for r in sel]
        ax.plot(t, [float(r["rhs"]) for r in sel], color="C1", lw=1.5, label="right-hand side")
        ax.plot(t, [float(r["lhs"]) for r in sel], color="C0", lw=1.5, label="dG/dt")
        ax.set_title(f"{sel[0]['variant']} kernel at ({sel[0]['center']}), s = {float(sel[0]['s']):.4g}; "
                     f"C1 = {float(sel[0]['C1']):.3g}, C2 = {float(sel[0]['C2']):.3g}", fontsize=8)
        ax.legend()
    ax.set_xlabel("time")
    return _save(fig, Path(path))


def plot_sweep(sweep_dir, out=None) -> list[Path]:
    """``angle_vs_eps.svg`` from ``sweep_summary.csv`` plus each run's plots."""
    sweep_dir = Path(sweep_dir)
    out = Path(out) if out is not None else sweep_dir / "plots"
    _, rows = read_csv(sweep_dir / "sweep_summary.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    if rows:
        eps = [float(r["epsilon"]) for r in rows]
        err = [float(r["angle_error_deg"]) for r in rows]
        ax.plot(eps, err, "o-", color="C0")
        ax.set_xscale("log")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("contact angle error (deg)")
    made = [_save(fig, out / "angle_vs_eps.svg")]
    for run_dir in sorted(sweep_dir.glob("eps_*")):
        made += plot_run(run_dir, out / run_dir.name)
    return made


def emit_plots(target, out=None) -> list[Path]:
    """Plot a sweep directory or a run directory.

    Raises
    ------
    FileNotFoundError
        If neither ``sweep_summary.csv`` nor ``series.csv`` is present.
    """
    target = Path(target)
    if (target / "sweep_summary.csv").exists():
        return plot_sweep(target, out)
    if (target / "series.csv").exists():
        return plot_run(target, out)
    raise FileNotFoundError(f"{target}: no series.csv or sweep_summary.csv to plot")
