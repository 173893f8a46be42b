"""Concrete model Hamiltonians.

Two families: a Dirac-type hopping model that is gapped at zero energy for
masses away from {-d, -d+2, ..., d} and carries a nonzero Chern number in the
topological window, and a square-lattice magnetic hopping model whose
low-flux spectrum clusters into Landau-like levels with the (2n-1) spacing
pattern.  Diagonal disorder is added by a named, seeded counter-based PRNG
so ensembles are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import DimensionError, FluxQuantizationError, NoSymbolError
from .lattice import Lattice, OPEN, PERIODIC
from .operators import (
    LocalOperator,
    clifford_generators,
    identity_operator,
    shift_operator,
    tensor_with_internal,
)

RNG_NAME = "philox4x64"

TOY_DIRAC = "toy-dirac"
HOFSTADTER = "hofstadter"


@dataclass(frozen=True)
class ModelSpec:
    """Full description of a model instance, embedded verbatim in reports."""

    family: str
    extents: tuple[int, ...]
    boundaries: tuple[str, ...]
    mass: float = 0.0
    flux: float = 0.0
    disorder: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(x) for x in self.extents))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        d = len(self.extents)
        if self.family == TOY_DIRAC:
            if d % 2 != 0:
                raise DimensionError(f"{TOY_DIRAC} requires even dimension, got d={d}")
        elif self.family == HOFSTADTER:
            if d != 2:
                raise DimensionError(f"{HOFSTADTER} requires d=2, got d={d}")
            if all(b == PERIODIC for b in self.boundaries):
                _check_flux_quantization(self.flux, self.extents)
        else:
            raise DimensionError(f"unknown model family {self.family!r}")
        if self.disorder < 0:
            raise DimensionError(f"disorder amplitude must be >= 0, got {self.disorder}")

    @property
    def dimension(self) -> int:
        return len(self.extents)

    @property
    def n_orb(self) -> int:
        return 2 ** (self.dimension // 2) if self.family == TOY_DIRAC else 1

    @cached_property
    def lattice(self) -> Lattice:
        return Lattice(self.extents, self.boundaries, self.n_orb)

    def is_translation_invariant(self) -> bool:
        return self.disorder == 0.0

    def with_boundaries(self, boundaries) -> "ModelSpec":
        return replace(self, boundaries=tuple(boundaries))

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "extents": list(self.extents),
            "boundaries": list(self.boundaries),
            "mass": self.mass,
            "flux": self.flux,
            "disorder": self.disorder,
            "seed": self.seed,
        }


def _check_flux_quantization(flux: float, extents: tuple[int, ...]):
    total = flux * extents[0] * extents[1] / (2 * np.pi)
    if abs(total - round(total)) > 1e-9:
        raise FluxQuantizationError(
            f"total flux b*Lx*Ly = {total:.6g} flux quanta is not an integer; "
            "required on a fully periodic lattice"
        )


def toy_dirac(spec: ModelSpec) -> LocalOperator:
    """Dirac-type hopping model in even dimension d with mass m.

    H = (1/2i) sum_j (S_j - S_j*) (x) gamma_j
        + (m + (1/2) sum_j (S_j + S_j*)) (x) gamma_0

    on 2^(d/2) orbitals per site.  The 1/2 on the symmetric hopping makes the
    momentum-space mass term m + sum_j cos(k_j), so the gap at zero closes
    exactly for m in {-d, -d+2, ..., d}.
    """
    if spec.family != TOY_DIRAC:
        raise DimensionError(f"expected a {TOY_DIRAC} spec, got {spec.family!r}")
    scalar = Lattice(spec.extents, spec.boundaries, 1)
    gammas, gamma0 = clifford_generators(spec.dimension)
    shifts = [shift_operator(scalar, a) for a in range(spec.dimension)]
    mass_part = spec.mass * identity_operator(scalar)
    h = None
    for s, g in zip(shifts, gammas):
        term = tensor_with_internal(-0.5j * (s - s.adjoint()), g)
        h = term if h is None else h + term
        mass_part = mass_part + 0.5 * (s + s.adjoint())
    h = h + tensor_with_internal(mass_part, gamma0)
    return h


def hofstadter(spec: ModelSpec, gauge: str = "landau-x") -> LocalOperator:
    """Positive magnetic hopping model 4*I - (peierls hoppings + adjoints).

    Phases accumulate ``flux`` radians around every plaquette.  The default
    gauge puts the phase on x-hoppings; the alternate "landau-y" gauge exists
    to exercise gauge invariance of the spectrum.  On a torus the wrap
    hoppings carry the standard compensating twist, which closes every
    plaquette exactly when the total flux is an integer number of quanta.
    """
    if spec.family != HOFSTADTER:
        raise DimensionError(f"expected a {HOFSTADTER} spec, got {spec.family!r}")
    if gauge not in ("landau-x", "landau-y"):
        raise DimensionError(f"unknown gauge {gauge!r}")
    lat = spec.lattice
    b = spec.flux
    Lx, Ly = lat.extents
    n = lat.n_sites
    m = np.zeros((n, n), dtype=complex)
    x, y = lat.coords[:, 0], lat.coords[:, 1]
    x_periodic = lat.boundaries[0] == PERIODIC
    y_periodic = lat.boundaries[1] == PERIODIC

    def add_hops(axis: int, phases: np.ndarray):
        tgt = lat.coords.copy()
        tgt[:, axis] += 1
        L = lat.extents[axis]
        if lat.boundaries[axis] == PERIODIC:
            tgt[:, axis] %= L
            src = np.arange(n)
        else:
            src = np.flatnonzero(tgt[:, axis] < L)
            tgt = tgt[src]
        dst = np.ravel_multi_index(tuple(tgt.T), lat.extents)
        m[dst, src] += -np.exp(1j * phases[src])

    if gauge == "landau-x":
        # phase on x-hops; torus wrap twist on the last y-row closes every
        # plaquette to flux b once b*Lx*Ly is an integer number of quanta
        x_phase = -b * y.astype(float)
        y_phase = np.where(y_periodic & (y == Ly - 1), b * Ly * x.astype(float), 0.0)
    else:
        x_phase = np.where(x_periodic & (x == Lx - 1), -b * Lx * y.astype(float), 0.0)
        y_phase = b * x.astype(float)
    add_hops(0, x_phase)
    add_hops(1, y_phase)

    m = m + m.conj().T
    m += 4.0 * np.eye(n)
    return LocalOperator(lat, m)


def add_disorder(h: LocalOperator, w: float, seed: int) -> LocalOperator:
    """Add i.i.d. uniform on-site potential in [-w/2, w/2], identical across orbitals.

    Deterministic for a fixed seed: values come from a Philox counter-based
    generator keyed by the seed.
    """
    if w < 0:
        raise DimensionError(f"disorder amplitude must be >= 0, got {w}")
    if w == 0:
        return h
    lat = h.lattice
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    onsite = rng.uniform(-w / 2.0, w / 2.0, size=lat.n_sites)
    m = h.matrix.copy()
    m[np.diag_indices_from(m)] += np.repeat(onsite, lat.n_orb)
    return LocalOperator(lat, m)


def build_hamiltonian(spec: ModelSpec) -> LocalOperator:
    """Family dispatch plus disorder, honoring every field of the spec."""
    if spec.family == TOY_DIRAC:
        h = toy_dirac(spec)
    else:
        h = hofstadter(spec)
    if spec.disorder > 0:
        h = add_disorder(h, spec.disorder, spec.seed)
    return h


def bloch_symbol(spec: ModelSpec, k) -> np.ndarray:
    """Momentum-space symbol of a translation-invariant model at wavevector k.

    Plane waves are taken as x -> exp(-i k.x), so the unit shift acts as
    multiplication by exp(+i k_j).  For the magnetic model the symbol lives
    on the magnetic unit cell: flux 2*pi*p/q gives a q x q matrix with
    k = (k_x, k_y) ranging over the reduced zone.
    """
    if not spec.is_translation_invariant():
        raise NoSymbolError("disordered models have no momentum-space symbol")
    k = np.asarray(k, dtype=float)
    if spec.family == TOY_DIRAC:
        if k.shape != (spec.dimension,):
            raise DimensionError(f"k must have shape ({spec.dimension},)")
        gammas, gamma0 = clifford_generators(spec.dimension)
        sym = (spec.mass + np.sum(np.cos(k))) * gamma0
        for kj, g in zip(k, gammas):
            sym = sym + np.sin(kj) * g
        return sym
    # magnetic model: Harper matrix on the q-site magnetic cell
    if k.shape != (2,):
        raise DimensionError("k must have shape (2,)")
    q = _flux_denominator(spec.flux)
    b = spec.flux
    sym = np.zeros((q, q), dtype=complex)
    for l in range(q):
        sym[l, l] += 4.0 - 2.0 * np.cos(k[0] - b * l)
        lp = (l + 1) % q
        sym[lp, l] += -np.exp(1j * k[1])
        sym[l, lp] += -np.exp(-1j * k[1])
    return sym


def _flux_denominator(flux: float, max_q: int = 4096) -> int:
    ratio = flux / (2 * np.pi)
    for q in range(1, max_q + 1):
        if abs(ratio * q - round(ratio * q)) < 1e-9:
            return q
    raise NoSymbolError("flux is not a rational multiple 2*pi*p/q with small q")


def bulk_spectrum_from_symbol(spec: ModelSpec) -> np.ndarray:
    """Sorted eigenvalue multiset of the periodic model from its symbol grid.

    The grid matches the torus with the spec's extents, so the result equals
    the spectrum of the real-space Hamiltonian on the fully periodic lattice.
    Independent of the real-space route: no lattice operator is built.
    """
    if not spec.is_translation_invariant():
        raise NoSymbolError("disordered models have no symbol route to the spectrum")
    Ls = spec.extents
    if spec.family == TOY_DIRAC:
        vals = []
        for flat in range(int(np.prod(Ls))):
            idx = np.unravel_index(flat, Ls)
            k = [2 * np.pi * i / L for i, L in zip(idx, Ls)]
            vals.append(np.linalg.eigvalsh(bloch_symbol(spec, k)))
        return np.sort(np.concatenate(vals))
    q = _flux_denominator(spec.flux)
    Lx, Ly = Ls
    wraps = spec.flux * Ly / (2 * np.pi)
    if Ly % q != 0 or abs(wraps - round(wraps)) > 1e-9:
        raise NoSymbolError("magnetic symbol grid requires q to divide the y-extent")
    vals = []
    for ix in range(Lx):
        for iy in range(Ly // q):
            k = (2 * np.pi * ix / Lx, 2 * np.pi * iy / (Ly // q) / q)
            vals.append(np.linalg.eigvalsh(bloch_symbol(spec, k)))
    return np.sort(np.concatenate(vals))


def landau_cluster_means(eigenvalues: np.ndarray, spec: ModelSpec, n_levels: int) -> list[float]:
    """Means of the lowest eigenvalue clusters, one flux quantum of states each.

    At weak flux the low spectrum of the magnetic model splits into bands of
    ``b * Lx * Ly / 2pi`` states; consecutive cluster means follow the odd
    Landau pattern (2n-1)|b| up to lattice corrections.
    """
    n_phi = int(round(abs(spec.flux) * spec.extents[0] * spec.extents[1] / (2 * np.pi)))
    if n_phi < 1:
        raise DimensionError("flux too small: no states per Landau cluster")
    w = np.sort(np.asarray(eigenvalues))
    if len(w) < n_levels * n_phi:
        raise DimensionError("not enough eigenvalues for the requested cluster count")
    return [float(w[i * n_phi : (i + 1) * n_phi].mean()) for i in range(n_levels)]
