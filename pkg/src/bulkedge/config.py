"""Experiment configuration: a single JSON file, parsed and cross-checked.

The schema is versioned; ``validate`` resolves every constructor (lattice,
regions, window) without running anything heavy and reports the resolved
dimensions and a memory estimate, so a typo fails before the eigensolver
starts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, GeometryError
from .lattice import HalfSpaceRegion, Lattice, Region, edge_frame, half_space, perturbed_half_space
from .models import HOFSTADTER, TOY_DIRAC, ModelSpec
from .indices import PLATEAU_THRESHOLD, WindowSweep
from .pipeline import default_radii

SCHEMA_VERSION = 1

EXPERIMENTS = ("spectrum", "chern-sweep", "gap-fill", "edge-current", "disorder", "cobordism")

OUT_DIR_ENV = "BULKEDGE_OUT"


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"{context}: missing required field {key!r}")
    return mapping[key]


@dataclass
class ExperimentConfig:
    """Typed view of one experiment configuration."""

    experiment: str
    model: ModelSpec
    fermi_energy: float = 0.0
    n_k: int = 32
    masses: tuple[float, ...] = ()
    seeds: tuple[int, ...] = ()
    window: dict | None = None
    regions: dict = field(default_factory=dict)
    gap_override: tuple[float, float] | None = None
    r_loc: float = 3.0
    boundary_width: float = 1.0
    rs_window_radius: float = 12.0
    rs_sector_offset: float = 0.1
    pair_power: int = 1
    plateau_threshold: float = PLATEAU_THRESHOLD
    out_dir: str | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config {path} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
            ) from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        version = raw.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}; this build reads {SCHEMA_VERSION}")
        experiment = _require(raw, "experiment", "config")
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
        model_raw = _require(raw, "model", "config")
        _require(model_raw, "family", "config.model")
        if "axes" in model_raw:
            # alternative axis form: a list of {extent, boundary} records
            try:
                extents = tuple(int(ax["extent"]) for ax in model_raw["axes"])
                boundaries = tuple(str(ax["boundary"]) for ax in model_raw["axes"])
            except (KeyError, TypeError) as exc:
                raise ConfigError(
                    "config.model.axes: each record needs 'extent' and 'boundary'"
                ) from exc
        else:
            extents = tuple(_require(model_raw, "extents", "config.model"))
            boundaries = tuple(_require(model_raw, "boundaries", "config.model"))
        try:
            model = ModelSpec(
                family=model_raw["family"],
                extents=extents,
                boundaries=boundaries,
                mass=float(model_raw.get("mass", 0.0)),
                flux=float(model_raw.get("flux", 0.0)),
                disorder=float(model_raw.get("disorder", 0.0)),
                seed=int(model_raw.get("seed", 0)),
            )
        except (GeometryError, Exception) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"config.model: {exc}") from exc
        tol = raw.get("tolerances", {})
        seeds = tuple(int(s) for s in raw.get("seeds", ()))
        if len(seeds) != len(set(seeds)):
            raise ConfigError("config.seeds: seeds must be unique")
        threshold = float(tol.get("plateau_threshold", PLATEAU_THRESHOLD))
        if threshold <= 0:
            raise ConfigError("config.tolerances.plateau_threshold must be positive")
        loc = raw.get("localization", {})
        rs = raw.get("real_space", {})
        sf = raw.get("spectral_function", {})
        gap_override = sf.get("gap")
        if gap_override is not None:
            gap_override = (float(gap_override[0]), float(gap_override[1]))
            if not gap_override[0] < gap_override[1]:
                raise ConfigError("config.spectral_function.gap must satisfy a < b")
        return cls(
            experiment=experiment,
            model=model,
            fermi_energy=float(raw.get("fermi_energy", 0.0)),
            n_k=int(raw.get("n_k", 32)),
            masses=tuple(float(m) for m in raw.get("masses", ())),
            seeds=seeds,
            window=raw.get("window"),
            regions=raw.get("regions", {}),
            gap_override=gap_override,
            r_loc=float(loc.get("r_loc", 3.0)),
            boundary_width=float(loc.get("boundary_width", 1.0)),
            rs_window_radius=float(rs.get("window_radius", 12.0)),
            rs_sector_offset=float(rs.get("sector_offset", 0.1)),
            pair_power=int(raw.get("pair_power", 1)),
            plateau_threshold=threshold,
            out_dir=raw.get("out_dir"),
            raw=raw,
        )

    # ------------------------------------------------------------------
    # resolution helpers

    def lattice(self) -> Lattice:
        return self.model.lattice

    def resolve_region(self, name: str, lattice: Lattice | None = None) -> Region:
        lattice = lattice or self.lattice()
        spec = self.regions.get(name)
        if spec is None:
            if name in ("W", "W_prime"):
                return half_space(lattice, axis=0, cut=lattice.extents[0] // 2, side="+")
            raise ConfigError(f"config.regions: no constructor for {name!r}")
        kind = _require(spec, "type", f"config.regions.{name}")
        try:
            if kind == "half_space":
                return half_space(
                    lattice,
                    axis=int(_require(spec, "axis", name)),
                    cut=int(_require(spec, "cut", name)),
                    side=spec.get("side", "+"),
                )
            if kind == "perturbed_half_space":
                base = half_space(
                    lattice,
                    axis=int(_require(spec, "axis", name)),
                    cut=int(_require(spec, "cut", name)),
                    side=spec.get("side", "+"),
                )
                return perturbed_half_space(
                    base,
                    profile=_require(spec, "profile", name),
                    amplitude=int(_require(spec, "amplitude", name)),
                )
            if kind == "edge_frame":
                return edge_frame(lattice, float(spec.get("width", 1.0)))
            if kind == "full":
                return Region.full(lattice)
        except GeometryError as exc:
            raise ConfigError(f"config.regions.{name}: {exc}") from exc
        raise ConfigError(f"config.regions.{name}: unknown constructor {kind!r}")

    def resolve_window(self, lattice: Lattice | None = None) -> WindowSweep:
        lattice = lattice or self.lattice()
        if self.window is None:
            cut = lattice.extents[0] // 2
            w = self.regions.get("W")
            if w and w.get("type") == "half_space":
                cut = int(w["cut"])
            return WindowSweep(center=(cut, 0), radii=default_radii(lattice.extents))
        center = tuple(int(c) for c in _require(self.window, "center", "config.window"))
        radii = tuple(float(r) for r in _require(self.window, "radii", "config.window"))
        try:
            return WindowSweep(center=center, radii=radii)
        except Exception as exc:
            raise ConfigError(f"config.window: {exc}") from exc

    def resolve_out_dir(self, cli_out: str | None = None) -> Path:
        if cli_out:
            return Path(cli_out)
        if self.out_dir:
            return Path(self.out_dir)
        return Path(os.environ.get(OUT_DIR_ENV, "runs"))

    # ------------------------------------------------------------------

    def validate(self) -> list[str]:
        """Cross-check without running; returns human-readable diagnostics."""
        lines = []
        lat = self.lattice()
        lines.append(
            f"experiment: {self.experiment}; model {self.model.family} on "
            f"{'x'.join(map(str, lat.extents))} ({', '.join(lat.boundaries)}), "
            f"{lat.n_orb} orbital(s), Hilbert dimension {lat.dim_hilbert}"
        )
        mem = 6 * (lat.dim_hilbert**2) * 16 / 1e9
        lines.append(f"estimated peak memory for dense pipeline: {mem:.2f} GB")
        if self.experiment == "chern-sweep":
            if not self.masses:
                raise ConfigError("chern-sweep requires a nonempty config.masses list")
            if self.model.family != TOY_DIRAC:
                raise ConfigError("chern-sweep sweeps the mass of the toy-dirac family")
            if not self.model.is_translation_invariant():
                raise ConfigError("chern-sweep requires a translation-invariant (clean) model")
            lines.append(f"masses: {list(self.masses)}; k-grid {self.n_k}x{self.n_k}")
        if self.experiment in ("gap-fill", "edge-current", "cobordism"):
            if any(b != "open" for b in self.model.boundaries):
                raise ConfigError(f"{self.experiment} requires a fully open (Dirichlet box) lattice")
        if self.experiment in ("edge-current", "cobordism", "disorder"):
            sweep = self.resolve_window(lat)
            lines.append(f"window: center {sweep.center}, radii {list(sweep.radii)}")
            w = self.resolve_region("W", lat)
            lines.append(f"region W: {len(w)} sites")
        if self.experiment == "cobordism":
            if "W_prime" not in self.regions:
                raise ConfigError("cobordism requires config.regions.W_prime")
            wp = self.resolve_region("W_prime", lat)
            lines.append(f"region W_prime: {len(wp)} sites")
        if self.experiment == "disorder":
            if not self.seeds:
                raise ConfigError("disorder requires a nonempty config.seeds list")
            if self.model.disorder <= 0:
                raise ConfigError("disorder experiment requires model.disorder > 0")
            lines.append(f"seeds: {list(self.seeds)}; amplitude w = {self.model.disorder}")
        lines.append("ok")
        return lines
