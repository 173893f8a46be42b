"""Figure rendering for experiment reports.

Every figure is derived from the report's tables, rendered headlessly and
written next to the CSVs.  Figures are a convenience view; the CSVs stay the
quantitative interface.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import ExperimentReport

_DPI = 150


def _column(table, name):
    idx = table.columns.index(name)
    return np.array([row[idx] for row in table.rows])


def _save(fig, out_dir: Path, name: str) -> Path:
    path = out_dir / f"{name}.png"
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_figures(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "spectrum" in report.tables and report.tables["spectrum"].rows:
        written.append(_plot_spectrum(report, out))
    if "edge_spectrum" in report.tables and report.tables["edge_spectrum"].rows:
        written.append(_plot_gap_fill(report, out))
    if "chern_sweep" in report.tables and report.tables["chern_sweep"].rows:
        written.append(_plot_chern_sweep(report, out))
    plateau_names = [n for n in report.tables if n.startswith("plateau_") and report.tables[n].rows]
    if plateau_names:
        written.append(_plot_plateaus(report, out, plateau_names))
    if "disorder" in report.tables and report.tables["disorder"].rows:
        written.append(_plot_disorder(report, out))
    return written


def _plot_spectrum(report, out):
    t = report.tables["spectrum"]
    idx = _column(t, "index")
    ev = _column(t, "eigenvalue")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(idx, ev, ".", ms=2, color="tab:blue")
    gap = report.results.get("gap")
    if gap:
        ax.axhspan(gap[0], gap[1], color="tab:orange", alpha=0.2, label="spectral gap")
        ax.legend(loc="upper left")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("energy")
    ax.set_title(f"{report.experiment}: spectrum")
    return _save(fig, out, "spectrum")


def _plot_gap_fill(report, out):
    t = report.tables["edge_spectrum"]
    idx = _column(t, "index")
    ev = _column(t, "eigenvalue")
    loc = _column(t, "localization")
    fig, ax = plt.subplots(figsize=(6, 4))
    sc = ax.scatter(idx, ev, c=loc, s=4, cmap="viridis", vmin=0, vmax=1)
    fig.colorbar(sc, ax=ax, label="boundary localization fraction")
    gap = report.results.get("gap")
    if gap:
        for g in gap:
            ax.axhline(g, color="tab:red", lw=0.8, ls="--")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("energy")
    ax.set_title("boundary spectrum and localization")
    return _save(fig, out, "gap_fill")


def _plot_chern_sweep(report, out):
    t = report.tables["chern_sweep"]
    masses = _column(t, "mass")
    cherns = np.array(
        [row[t.columns.index("chern")] if row[t.columns.index("status")] == "ok" else np.nan
         for row in t.rows],
        dtype=float,
    )
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(masses, cherns, "o-", color="tab:blue")
    ax.set_xlabel("mass")
    ax.set_ylabel("Chern number")
    ax.set_title("Chern number vs mass")
    ax.grid(alpha=0.3)
    return _save(fig, out, "chern_sweep")


def _plot_plateaus(report, out, names):
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in sorted(names):
        t = report.tables[name]
        r = _column(t, "radius")
        v = _column(t, "value_re")
        ax.plot(r, v, "o-", label=name.removeprefix("plateau_"))
    ax.set_xlabel("window radius")
    ax.set_ylabel("windowed trace")
    ax.set_title("window-radius plateaus")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, out, "plateaus")


def _plot_disorder(report, out):
    t = report.tables["disorder"]
    seeds = [str(row[t.columns.index("label")]) for row in t.rows]
    rs = _column(t, "real_space_chern")
    ku = _column(t, "edge_index")
    x = np.arange(len(seeds))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, rs, "s-", label="real-space Chern")
    ax.plot(x, ku, "o-", label="edge index")
    ax.set_xticks(x, seeds, rotation=45)
    ax.set_ylabel("value")
    ax.set_title("disorder ensemble")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, out, "disorder")
