"""Experiment orchestration: one config in, one report plus files out.

Each experiment assembles a report with provenance (config echo, seeds,
tolerances), per-table CSV data and stage timings, then writes JSON, CSVs
and figures.  Physics-level failures (closed gap, non-converged estimator)
are recorded in the report and surface as exit code 2; config problems never
get this far.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import NotAnInsulatorError, PhysicsError, GridTooCoarseError
from .lattice import ball, edge_frame, three_sectors
from .models import ModelSpec, TOY_DIRAC, build_hamiltonian
from .operators import LocalOperator
from .pipeline import EdgePipeline, bulk_eigenvalues
from .report import ExperimentReport, emit_plot_data
from .spectral import eigh, fermi_projection, gap_interval
from .indices import (
    KUBO_CHERN_SIGN,
    WindowedTraceResult,
    fhs_chern,
    real_space_chern,
)


def _parallel_map(fn, items, threads: int):
    """Map preserving input order; thread pool only when threads != 1."""
    items = list(items)
    if threads == 0:
        import os

        threads = min(len(items), os.cpu_count() or 1)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class _Stopwatch:
    def __init__(self, report: ExperimentReport):
        self.report = report
        self.t0 = time.perf_counter()

    def lap(self, stage: str):
        t1 = time.perf_counter()
        self.report.timings[stage] = round(t1 - self.t0, 3)
        self.t0 = t1


def run(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    threads: int = 1,
) -> tuple[ExperimentReport, int]:
    """Execute the configured experiment; write report, CSVs and figures.

    Returns (report, exit_code) with exit code 0 on success and 2 when the
    model failed a physics-level requirement; the partial report is still
    written in the failure case.
    """
    from .plots import render_figures

    config.validate()
    report = ExperimentReport(experiment=config.experiment, config=dict(config.raw))
    report.results["effective"] = {
        "fermi_energy": config.fermi_energy,
        "plateau_threshold": config.plateau_threshold,
        "seed": config.model.seed,
        "seeds": list(config.seeds),
        "disorder": config.model.disorder,
    }
    runner = _RUNNERS[config.experiment]
    code = 0
    try:
        runner(config, report, threads)
    except PhysicsError as exc:
        report.results["error"] = str(exc)
        report.results["error_kind"] = type(exc).__name__
        code = 2
    if out_dir is not None:
        out = Path(out_dir)
        report.write_json(out)
        emit_plot_data(report, out)
        render_figures(report, out)
    return report, code


# ---------------------------------------------------------------------------


def _spectrum_table(report: ExperimentReport, name: str, eigenvalues: np.ndarray):
    t = report.table(name, ["index", "eigenvalue"])
    for i, ev in enumerate(eigenvalues):
        t.add(i, float(ev))


def _plateau_table(
    report: ExperimentReport, name: str, result: WindowedTraceResult, mass: float
):
    t = report.table(name, ["mass", "radius", "value_re", "value_im", "converged"])
    for r, v in zip(result.radii, result.table):
        t.add(mass, r, v.real, v.imag, result.converged)


def _result_entry(result: WindowedTraceResult) -> dict:
    return {
        "value": None if not result.converged else result.value.real,
        "imag_residual": None if not result.converged else abs(result.value.imag),
        "converged": result.converged,
        "plateau_mean": result.plateau_mean.real,
        "center": list(result.center),
        "radii": list(result.radii),
    }


def _run_spectrum(config: ExperimentConfig, report: ExperimentReport, threads: int):
    watch = _Stopwatch(report)
    h = build_hamiltonian(config.model)
    watch.lap("build")
    dec = eigh(h)
    watch.lap("diagonalize")
    _spectrum_table(report, "spectrum", dec.eigenvalues)
    report.results["hilbert_dimension"] = dec.dim
    if "fermi_energy" in config.raw:
        try:
            gap = gap_interval(dec.eigenvalues, config.fermi_energy)
            report.results["gap"] = list(gap)
            report.results["insulator"] = True
        except NotAnInsulatorError:
            report.results["gap"] = None
            report.results["insulator"] = False
            raise
    watch.lap("report")


def _run_chern_sweep(config: ExperimentConfig, report: ExperimentReport, threads: int):
    watch = _Stopwatch(report)
    t = report.table("chern_sweep", ["mass", "chern", "residual", "status"])

    def one(mass: float):
        spec = ModelSpec(
            family=TOY_DIRAC,
            extents=config.model.extents,
            boundaries=config.model.boundaries,
            mass=mass,
        )
        try:
            r = fhs_chern(spec, config.fermi_energy, config.n_k)
            return (mass, r.chern, r.residual, "ok")
        except NotAnInsulatorError:
            return (mass, "", "", "gapless")
        except GridTooCoarseError:
            return (mass, "", "", "grid-too-coarse")

    rows = _parallel_map(one, config.masses, threads)
    values = {}
    for row in rows:
        t.add(*row)
        if row[3] == "ok":
            values[str(row[0])] = row[1]
    report.results["chern"] = values
    report.results["n_k"] = config.n_k
    watch.lap("sweep")
    if not values:
        raise PhysicsError("no mass in the sweep produced a gapped model")


def _localization_fractions(dec, strip_mask: np.ndarray) -> np.ndarray:
    weight = np.abs(dec.eigenvectors) ** 2
    return weight[strip_mask].sum(axis=0) / weight.sum(axis=0)


def _run_gap_fill(config: ExperimentConfig, report: ExperimentReport, threads: int):
    from .lattice import thicken
    from .indices import gap_filling_report

    watch = _Stopwatch(report)
    box = config.model
    torus = box.with_boundaries(("periodic",) * box.dimension)
    bulk_dec = eigh(build_hamiltonian(torus))
    watch.lap("bulk_diagonalize")
    gap = gap_interval(bulk_dec.eigenvalues, config.fermi_energy)
    edge_dec = eigh(build_hamiltonian(box))
    watch.lap("edge_diagonalize")
    boundary = edge_frame(box.lattice, config.boundary_width)
    rep = gap_filling_report(bulk_dec, edge_dec, gap, boundary, config.r_loc)
    _spectrum_table(report, "spectrum", bulk_dec.eigenvalues)
    strip_mask = thicken(boundary, config.r_loc).hilbert_mask()
    fractions = _localization_fractions(edge_dec, strip_mask)
    t = report.table("edge_spectrum", ["index", "eigenvalue", "localization", "in_gap"])
    a, b = gap
    for i, (ev, frac) in enumerate(zip(edge_dec.eigenvalues, fractions)):
        t.add(i, float(ev), float(frac), bool(a < ev < b))
    report.results.update(
        {
            "gap": list(gap),
            "in_gap_count": rep.in_gap_count,
            "min_localization": rep.min_localization,
            "max_in_gap_spacing": rep.max_in_gap_spacing,
            "bulk_in_gap_count": rep.bulk_in_gap_count,
            "r_loc": rep.r_loc,
        }
    )
    watch.lap("report")


def _build_pipeline(config: ExperimentConfig, spec: ModelSpec) -> EdgePipeline:
    sweep = config.resolve_window(spec.lattice)
    w_spec = config.regions.get("W", {})
    cut = int(w_spec["cut"]) if w_spec.get("type") == "half_space" else None
    return EdgePipeline.build(
        spec,
        fermi_energy=config.fermi_energy,
        cut=cut,
        radii=sweep.radii,
        plateau_threshold=config.plateau_threshold,
        gap=config.gap_override,
    )


def _run_edge_current(config: ExperimentConfig, report: ExperimentReport, threads: int):
    watch = _Stopwatch(report)
    pipe = _build_pipeline(config, config.model)
    watch.lap("pipeline_build")
    mass = config.model.mass
    kubo = pipe.kubo()
    _plateau_table(report, "plateau_kubo", kubo, mass)
    watch.lap("kubo")
    pair = pipe.pair_index(config.pair_power)
    _plateau_table(report, "plateau_pair", pair, mass)
    watch.lap("pair")
    current = pipe.current()
    _plateau_table(report, "plateau_current", current, mass)
    watch.lap("current")
    em = pipe.exp_map_pair()
    g1, g2 = pipe.global_trace_residuals()
    report.results.update(
        {
            "gap": list(pipe.bulk_gap),
            "edge_index_kubo": _result_entry(kubo),
            "pair_projection_index": _result_entry(pair),
            "edge_current": _result_entry(current),
            "exp_map_pair": list(em),
            "global_trace_residuals": [g1, g2],
            "kubo_chern_sign": KUBO_CHERN_SIGN,
        }
    )
    watch.lap("consistency")
    if not kubo.converged:
        raise PhysicsError("edge index did not reach a plateau over the radius sweep")


def _run_disorder(config: ExperimentConfig, report: ExperimentReport, threads: int):
    watch = _Stopwatch(report)
    box = config.model.with_boundaries(("open",) * config.model.dimension)
    torus = config.model.with_boundaries(("periodic",) * config.model.dimension)
    lat = torus.lattice
    center = tuple((L - 1) / 2.0 for L in lat.extents)
    sectors = three_sectors(lat, center, offset=config.rs_sector_offset)
    window = ball(lat, center, config.rs_window_radius)
    sweep = config.resolve_window(box.lattice)

    def one(item):
        label, seed = item
        from dataclasses import replace

        if seed is None:
            t_spec = replace(torus, disorder=0.0)
            b_spec = replace(box, disorder=0.0)
        else:
            t_spec = replace(torus, seed=seed)
            b_spec = replace(box, seed=seed)
        dec = eigh(build_hamiltonian(t_spec))
        p = fermi_projection(dec, config.fermi_energy)
        rs = real_space_chern(p, sectors, window)
        pipe = EdgePipeline.build(
            b_spec,
            fermi_energy=config.fermi_energy,
            radii=sweep.radii,
            plateau_threshold=config.plateau_threshold,
        )
        kubo = pipe.kubo()
        return (label, seed, rs, kubo)

    items = [("clean", None)] + [(f"seed-{s}", s) for s in config.seeds]
    rows = _parallel_map(one, items, threads)
    watch.lap("ensemble")
    t = report.table(
        "disorder",
        ["label", "seed", "real_space_chern", "rs_imag_residual", "edge_index", "edge_converged"],
    )
    clean_rs = clean_kubo = None
    max_dev_rs = max_dev_kubo = 0.0
    all_converged = True
    for label, seed, rs, kubo in rows:
        kv = kubo.plateau_mean.real
        t.add(label, seed if seed is not None else "", rs.value, rs.imag_residual, kv, kubo.converged)
        all_converged &= kubo.converged
        if label == "clean":
            clean_rs, clean_kubo = rs.value, kv
        else:
            max_dev_rs = max(max_dev_rs, abs(rs.value - clean_rs))
            max_dev_kubo = max(max_dev_kubo, abs(kv - clean_kubo))
    report.results.update(
        {
            "clean_real_space_chern": clean_rs,
            "clean_edge_index": clean_kubo,
            "max_deviation_real_space": max_dev_rs,
            "max_deviation_edge_index": max_dev_kubo,
            "disorder_amplitude": config.model.disorder,
            "seeds": list(config.seeds),
        }
    )
    watch.lap("report")
    if not all_converged:
        raise PhysicsError("an edge index in the ensemble did not reach a plateau")


def _run_cobordism(config: ExperimentConfig, report: ExperimentReport, threads: int):
    from .indices import edge_index_kubo

    watch = _Stopwatch(report)
    pipe = _build_pipeline(config, config.model)
    watch.lap("pipeline_build")
    w_prime = config.resolve_region("W_prime", pipe.lattice)
    r1 = pipe.kubo()
    r2 = edge_index_kubo(pipe.unitary, w_prime, pipe.sweep, pipe.plateau_threshold)
    _plateau_table(report, "plateau_kubo_w", r1, config.model.mass)
    _plateau_table(report, "plateau_kubo_w_prime", r2, config.model.mass)
    diff = abs(r1.plateau_mean.real - r2.plateau_mean.real)
    report.results.update(
        {
            "edge_index_w": _result_entry(r1),
            "edge_index_w_prime": _result_entry(r2),
            "cobordism_difference": diff,
        }
    )
    watch.lap("indices")
    if not (r1.converged and r2.converged):
        raise PhysicsError("edge index did not reach a plateau for one of the partitions")


_RUNNERS = {
    "spectrum": _run_spectrum,
    "chern-sweep": _run_chern_sweep,
    "gap-fill": _run_gap_fill,
    "edge-current": _run_edge_current,
    "disorder": _run_disorder,
    "cobordism": _run_cobordism,
}
