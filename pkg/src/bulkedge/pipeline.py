"""Shared orchestration for boundary experiments.

Building the boundary unitary costs one full eigendecomposition of the
Dirichlet box plus a handful of dense products, so every estimator that
needs it (edge index, pair index, current, consistency and cobordism checks)
runs off one cached :class:`EdgePipeline`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import UnsupportedGeometryError
from .lattice import (
    HalfSpaceRegion,
    Lattice,
    Region,
    edge_frame,
    half_space,
    perturbed_half_space,
)
from .models import ModelSpec, build_hamiltonian, bulk_spectrum_from_symbol, PERIODIC, OPEN
from .operators import LocalOperator
from .spectral import (
    EigenDecomposition,
    SpectralFunction,
    bump,
    eigh,
    gap_interval,
    smooth_step,
)
from .indices import (
    GapFillingReport,
    PLATEAU_THRESHOLD,
    WindowSweep,
    WindowedTraceResult,
    edge_current,
    edge_index_kubo,
    exp_map_consistency,
    gap_filling_report,
    kubo_global_trace,
    current_global_trace,
    pair_projection_index,
)


def bulk_eigenvalues(spec: ModelSpec) -> np.ndarray:
    """Sorted spectrum of the fully periodic (bulk) version of the model.

    Clean models go through the momentum-space symbol grid, which matches the
    torus spectrum exactly; disordered models are diagonalized in real space.
    """
    torus = spec.with_boundaries((PERIODIC,) * spec.dimension)
    if torus.is_translation_invariant():
        return bulk_spectrum_from_symbol(torus)
    dec = eigh(build_hamiltonian(torus))
    return dec.eigenvalues


def default_radii(extents: tuple[int, ...]) -> tuple[float, ...]:
    """Default radius sweep 4..12 in steps of 2, capped by the lattice size.

    The cap keeps the largest window clear of the second partition crossing
    on the opposite edge of the box.
    """
    top = int(0.4 * min(extents))
    radii = [r for r in (4, 6, 8, 10, 12) if r <= top]
    if len(radii) < 2:
        radii = sorted({max(2, top - 2), max(3, top)})
    return tuple(float(r) for r in radii)


@dataclass
class EdgePipeline:
    """Boundary experiment state: Dirichlet box, its decomposition, and the
    gap-adapted step/bump pair with the boundary unitary."""

    spec: ModelSpec
    fermi_energy: float
    bulk_gap: tuple[float, float]
    hamiltonian: LocalOperator
    dec: EigenDecomposition
    step_fn: SpectralFunction
    bump_fn: SpectralFunction
    unitary: LocalOperator
    W: HalfSpaceRegion
    sweep: WindowSweep
    plateau_threshold: float = PLATEAU_THRESHOLD

    @classmethod
    def build(
        cls,
        spec: ModelSpec,
        fermi_energy: float = 0.0,
        cut: int | None = None,
        radii: tuple[float, ...] | None = None,
        plateau_threshold: float = PLATEAU_THRESHOLD,
        gap: tuple[float, float] | None = None,
    ) -> "EdgePipeline":
        """Assemble the pipeline for a fully open (Dirichlet box) model spec.

        The bulk gap is detected from the periodic counterpart unless ``gap``
        pins the step/bump interval explicitly.
        """
        from .spectral import exp_unitary

        if any(b != OPEN for b in spec.boundaries):
            raise UnsupportedGeometryError(
                "boundary experiments need a fully open box; periodic axes model the bulk"
            )
        if spec.dimension != 2:
            raise UnsupportedGeometryError("boundary experiments are two-dimensional")
        if gap is None:
            gap = gap_interval(bulk_eigenvalues(spec), fermi_energy)
        lattice = spec.lattice
        h = build_hamiltonian(spec)
        dec = eigh(h)
        step_fn = smooth_step(gap)
        bump_fn = bump(gap)
        unitary = exp_unitary(dec, step_fn)
        cut = lattice.extents[0] // 2 if cut is None else int(cut)
        W = half_space(lattice, axis=0, cut=cut, side="+")
        sweep = WindowSweep(
            center=(cut, 0), radii=radii or default_radii(lattice.extents)
        )
        return cls(
            spec=spec,
            fermi_energy=fermi_energy,
            bulk_gap=gap,
            hamiltonian=h,
            dec=dec,
            step_fn=step_fn,
            bump_fn=bump_fn,
            unitary=unitary,
            W=W,
            sweep=sweep,
            plateau_threshold=plateau_threshold,
        )

    @property
    def lattice(self) -> Lattice:
        return self.spec.lattice

    @cached_property
    def bump_operator(self) -> LocalOperator:
        from .spectral import functional_calculus

        return functional_calculus(self.dec, self.bump_fn)

    def kubo(self) -> WindowedTraceResult:
        return edge_index_kubo(self.unitary, self.W, self.sweep, self.plateau_threshold)

    def pair_index(self, k: int = 1) -> WindowedTraceResult:
        return pair_projection_index(
            self.unitary, self.W, self.sweep, k=k, threshold=self.plateau_threshold
        )

    def current(self) -> WindowedTraceResult:
        result = edge_current(
            self.hamiltonian,
            self.bump_fn,
            self.W,
            self.sweep,
            dec=self.dec,
            bulk_gap=self.bulk_gap,
            threshold=self.plateau_threshold,
        )
        return result

    def exp_map_pair(self) -> tuple[float, float]:
        return exp_map_consistency(
            self.hamiltonian,
            self.step_fn,
            self.W,
            self.sweep,
            dec=self.dec,
            u=self.unitary,
            threshold=self.plateau_threshold,
        )

    def global_trace_residuals(self) -> tuple[float, float]:
        """(|Tr u[chi_W, u*]|, |Tr phi(H~) i[H~, chi_W]|) over the whole lattice."""
        r1 = abs(kubo_global_trace(self.unitary, self.W))
        r2 = abs(current_global_trace(self.bump_operator, self.hamiltonian, self.W))
        return (r1, r2)

    def perturbed_W(self, profile, amplitude: int) -> Region:
        return perturbed_half_space(self.W, profile, amplitude)

    def boundary_region(self, width: float = 1.0) -> Region:
        return edge_frame(self.lattice, width)

    def gap_filling(
        self, bulk_dec: EigenDecomposition, r_loc: float = 3.0, boundary_width: float = 1.0
    ) -> GapFillingReport:
        return gap_filling_report(
            bulk_dec,
            self.dec,
            self.bulk_gap,
            self.boundary_region(boundary_width),
            r_loc,
        )
