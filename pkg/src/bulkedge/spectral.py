"""Hermitian eigendecomposition and functional calculus.

Everything downstream (Fermi projections, boundary unitaries, bump-weighted
current traces) is a function of one full dense decomposition, which is
cached and reused by the experiment pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import HermiticityError, NotAnInsulatorError, DimensionError
from .lattice import Lattice
from .operators import LocalOperator

HERMITICITY_TOL = 1e-10
GAP_REL_TOL = 1e-8


@dataclass
class EigenDecomposition:
    """Ascending eigenvalues with orthonormal eigenvectors of a Hermitian operator."""

    lattice: Lattice
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_scale: float
    source_matrix: np.ndarray | None = None

    @cached_property
    def orthonormality_residual(self) -> float:
        v = self.eigenvectors
        return float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max())

    @cached_property
    def reconstruction_residual(self) -> float:
        if self.source_matrix is None:
            raise ValueError("decomposition was built without its source matrix")
        v, w = self.eigenvectors, self.eigenvalues
        return float(np.abs((v * w) @ v.conj().T - self.source_matrix).max())

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def spectral_diameter(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


def eigh(op: LocalOperator) -> EigenDecomposition:
    """Full Hermitian eigendecomposition with ascending eigenvalues.

    Refuses operators whose max-entry asymmetry exceeds ``HERMITICITY_TOL``.
    """
    defect = op.hermiticity_defect()
    if defect > HERMITICITY_TOL:
        raise HermiticityError(defect)
    h = 0.5 * (op.matrix + op.matrix.conj().T)
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(
        lattice=op.lattice,
        eigenvalues=w,
        eigenvectors=v,
        source_scale=op.max_entry(),
        source_matrix=h,
    )


def gap_interval(
    eigenvalues: np.ndarray, energy: float, tol: float | None = None
) -> tuple[float, float]:
    """Maximal open interval around ``energy`` free of the given eigenvalues.

    Raises ``NotAnInsulatorError`` when some eigenvalue lies within ``tol``
    of the requested energy (default: 1e-8 relative to the spectral
    diameter), carrying the offending eigenvalue.
    """
    w = np.sort(np.asarray(eigenvalues, dtype=float))
    if tol is None:
        tol = GAP_REL_TOL * max(float(w[-1] - w[0]), 1.0)
    if np.abs(w - energy).min() <= tol:
        offending = float(w[np.argmin(np.abs(w - energy))])
        raise NotAnInsulatorError(energy, offending)
    below = w[w < energy]
    above = w[w > energy]
    a = float(below[-1]) if len(below) else -np.inf
    b = float(above[0]) if len(above) else np.inf
    return (a, b)


def spectral_gap(
    dec: EigenDecomposition, energy: float, tol: float | None = None
) -> tuple[float, float]:
    """Maximal open interval around ``energy`` free of eigenvalues of the operator."""
    return gap_interval(dec.eigenvalues, energy, tol)


def functional_calculus(dec: EigenDecomposition, fn) -> LocalOperator:
    """Apply a scalar function to the operator through its eigenbasis."""
    weights = np.asarray(fn(dec.eigenvalues), dtype=complex)
    if weights.shape != dec.eigenvalues.shape:
        raise DimensionError("function must map the eigenvalue array elementwise")
    v = dec.eigenvectors
    return LocalOperator(dec.lattice, (v * weights) @ v.conj().T)


def fermi_projection(dec: EigenDecomposition, energy: float) -> LocalOperator:
    """Orthogonal projection onto eigenstates below a Fermi energy in a gap."""
    spectral_gap(dec, energy)
    occ = dec.eigenvectors[:, dec.eigenvalues < energy]
    return LocalOperator(dec.lattice, occ @ occ.conj().T)


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))


def _smoothstep_deriv(t: np.ndarray) -> np.ndarray:
    inside = (t > 0.0) & (t < 1.0)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 140.0 * t**3 * (1.0 - t) ** 3, 0.0)


@dataclass(frozen=True)
class SpectralFunction:
    """Real function of a real variable: smooth step, bump, or tabulated.

    The step falls C3-smoothly from 1 below the gap to 0 above it; the bump
    is its negated derivative, nonnegative with unit integral and support in
    the gap.
    """

    kind: str  # "step" | "bump" | "tabulated"
    gap: tuple[float, float] | None = None
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        if self.kind in ("step", "bump"):
            if self.gap is None or not self.gap[0] < self.gap[1]:
                raise DimensionError(f"gap interval must satisfy a < b, got {self.gap}")
        elif self.kind == "tabulated":
            if self.table is None or len(self.table[0]) != len(self.table[1]):
                raise DimensionError("tabulated function needs matching x and y tuples")
        else:
            raise DimensionError(f"unknown spectral function kind {self.kind!r}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            xs, ys = self.table
            return np.interp(x, xs, ys)
        a, b = self.gap
        t = (x - a) / (b - a)
        if self.kind == "step":
            return 1.0 - _smoothstep(t)
        return _smoothstep_deriv(t) / (b - a)

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "tabulated":
            return (self.table[0][0], self.table[0][-1])
        return self.gap


def smooth_step(gap: tuple[float, float]) -> SpectralFunction:
    """Degree-7 polynomial step: 1 on (-inf, a], 0 on [b, inf), C3 in between."""
    return SpectralFunction(kind="step", gap=(float(gap[0]), float(gap[1])))


def bump(gap: tuple[float, float]) -> SpectralFunction:
    """Negated derivative of the smooth step: unit integral, support in [a, b]."""
    return SpectralFunction(kind="bump", gap=(float(gap[0]), float(gap[1])))


def exp_unitary(dec: EigenDecomposition, step: SpectralFunction) -> LocalOperator:
    """Boundary unitary exp(2 pi i f(T)) for a smooth step f.

    Eigenstates on either side of the gap pick up trivial phase; any spectrum
    inside the gap winds, which is exactly what the edge-index estimators
    probe.
    """
    if step.kind != "step":
        raise DimensionError("exp_unitary requires a smooth-step spectral function")
    return functional_calculus(dec, lambda w: np.exp(2j * np.pi * step(w)))
