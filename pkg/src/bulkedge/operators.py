"""Operators on the lattice Hilbert space with locality metadata.

Operators are stored as dense complex matrices (desk-scale dimensions make
dense both faster and simpler than a literal sparse map) with entries below
``PRUNE_TOL`` zeroed, so "supported in" statements are testable.  All
operations are pure; instances are treated as immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DimensionError, InvalidSiteError
from .lattice import Lattice, Region

PRUNE_TOL = 1e-14

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class LocalOperator:
    """Complex square matrix indexed by (site, orbital) pairs.

    Entries with magnitude below ``PRUNE_TOL`` are zeroed at construction.
    The propagation radius (largest site distance carrying weight) is
    computed lazily and cached for the default tolerance.
    """

    lattice: Lattice
    matrix: np.ndarray
    _radius_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.lattice.dim_hilbert
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} != Hilbert dimension ({n}, {n})")
        m = m.copy()
        m[np.abs(m) < PRUNE_TOL] = 0.0
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.lattice.dim_hilbert

    def adjoint(self) -> "LocalOperator":
        return LocalOperator(self.lattice, self.matrix.conj().T)

    def __add__(self, other: "LocalOperator") -> "LocalOperator":
        self._check_same(other)
        return LocalOperator(self.lattice, self.matrix + other.matrix)

    def __sub__(self, other: "LocalOperator") -> "LocalOperator":
        self._check_same(other)
        return LocalOperator(self.lattice, self.matrix - other.matrix)

    def __matmul__(self, other: "LocalOperator") -> "LocalOperator":
        self._check_same(other)
        return LocalOperator(self.lattice, self.matrix @ other.matrix)

    def __mul__(self, scalar) -> "LocalOperator":
        return LocalOperator(self.lattice, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def _check_same(self, other: "LocalOperator"):
        if self.lattice != other.lattice:
            raise DimensionError("operators live on different lattices")

    def max_entry(self) -> float:
        return float(np.abs(self.matrix).max()) if self.matrix.size else 0.0

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_defect() <= tol

    def nonzero_site_pairs(self, tol: float = PRUNE_TOL):
        """(site_i, site_j, |entry|max) arrays over site pairs with weight > tol."""
        n_orb = self.lattice.n_orb
        a = np.abs(self.matrix)
        if n_orb > 1:
            ns = self.lattice.n_sites
            a = a.reshape(ns, n_orb, ns, n_orb).max(axis=(1, 3))
        rows, cols = np.nonzero(a > tol)
        return rows, cols, a[rows, cols]

    def to_triplets(self, tol: float = 0.0) -> str:
        """Serialize as 'row col real imag' lines, row-major, flattened indices."""
        rows, cols = np.nonzero(np.abs(self.matrix) > tol)
        order = np.lexsort((cols, rows))
        lines = [
            f"{rows[k]} {cols[k]} {self.matrix[rows[k], cols[k]].real:.17g} "
            f"{self.matrix[rows[k], cols[k]].imag:.17g}"
            for k in order
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_triplets(cls, lattice: Lattice, text: str) -> "LocalOperator":
        n = lattice.dim_hilbert
        m = np.zeros((n, n), dtype=complex)
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise InvalidSiteError(f"triplet line {lineno}: expected 4 fields, got {len(parts)}")
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidSiteError(f"triplet line {lineno}: index ({i}, {j}) out of range")
            m[i, j] = float(parts[2]) + 1j * float(parts[3])
        return cls(lattice, m)


def zero_operator(lattice: Lattice) -> LocalOperator:
    return LocalOperator(lattice, np.zeros((lattice.dim_hilbert,) * 2, dtype=complex))


def identity_operator(lattice: Lattice) -> LocalOperator:
    return LocalOperator(lattice, np.eye(lattice.dim_hilbert, dtype=complex))


def shift_operator(lattice: Lattice, axis: int) -> LocalOperator:
    """Unit translation along one axis: basis vector at c maps to c + e_axis.

    Wraps on periodic axes; on open axes, sites shifted off the lattice map
    to zero (the operator is then a partial isometry).  Acts as identity on
    orbitals.
    """
    if not 0 <= axis < lattice.ndim:
        raise DimensionError(f"axis {axis} outside lattice dimension {lattice.ndim}")
    n = lattice.dim_hilbert
    m = np.zeros((n, n), dtype=complex)
    target = lattice.coords.copy()
    target[:, axis] += 1
    L = lattice.extents[axis]
    if lattice.boundaries[axis] == "periodic":
        target[:, axis] %= L
        keep = np.ones(lattice.n_sites, dtype=bool)
    else:
        keep = target[:, axis] < L
    src = np.flatnonzero(keep)
    dst = np.ravel_multi_index(tuple(target[keep].T), lattice.extents)
    n_orb = lattice.n_orb
    for orb in range(n_orb):
        m[dst * n_orb + orb, src * n_orb + orb] = 1.0
    return LocalOperator(lattice, m)


def clifford_generators(d: int) -> tuple[list[np.ndarray], np.ndarray]:
    """Hermitian unitary generators of the complex Clifford algebra in rank d.

    Built by the Pauli doubling chain so that rank d requires internal
    dimension 2^(d/2); returns the d generators plus the chirality element
    gamma_0 = i^(d/2) * gamma_1 ... gamma_d, always computed from that
    product rather than hard-coded.
    """
    if d <= 0 or d % 2 != 0:
        raise DimensionError(f"Clifford rank must be even and positive, got {d}")
    k = d // 2
    gammas = []
    for j in range(1, k + 1):
        prefix = _PAULI_Z
        for _ in range(j - 2):
            prefix = np.kron(prefix, _PAULI_Z)
        suffix = np.eye(2 ** (k - j), dtype=complex)
        for letter in (_PAULI_X, _PAULI_Y):
            g = letter if j == 1 else np.kron(prefix, letter)
            gammas.append(np.kron(g, suffix))
    gamma0 = np.eye(2**k, dtype=complex) * (1j**k)
    for g in gammas:
        gamma0 = gamma0 @ g
    return gammas, gamma0


def tensor_with_internal(spatial: LocalOperator, internal: np.ndarray) -> LocalOperator:
    """Kronecker product of an orbital-free spatial operator with an internal matrix.

    The result lives on the same lattice geometry with ``n_orb`` equal to the
    internal dimension; entries are spatial[i, j] * internal[a, b].
    """
    if spatial.lattice.n_orb != 1:
        raise DimensionError("spatial factor must live on an orbital-free lattice")
    internal = np.asarray(internal, dtype=complex)
    if internal.ndim != 2 or internal.shape[0] != internal.shape[1]:
        raise DimensionError(f"internal matrix must be square, got shape {internal.shape}")
    target = spatial.lattice.with_orbitals(internal.shape[0])
    return LocalOperator(target, np.kron(spatial.matrix, internal))


def commutator(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    return LocalOperator(a.lattice, a.matrix @ b.matrix - b.matrix @ a.matrix)


def indicator_operator(region: Region) -> LocalOperator:
    """Diagonal 0/1 projection onto the region, identity on orbitals."""
    return LocalOperator(
        region.lattice, np.diag(region.hilbert_mask().astype(complex))
    )


def compress(op: LocalOperator, region: Region) -> LocalOperator:
    """Two-sided cut-down chi_Y T chi_Y; Hermitian whenever T is."""
    m = region.hilbert_mask()
    return LocalOperator(op.lattice, op.matrix * m[:, None] * m[None, :])


def propagation_radius(op: LocalOperator, tol: float = PRUNE_TOL) -> float:
    """Largest site distance between entry pairs with magnitude above tol."""
    key = float(tol)
    if key in op._radius_cache:
        return op._radius_cache[key]
    rows, cols, _ = op.nonzero_site_pairs(tol)
    if len(rows) == 0:
        radius = 0.0
    else:
        lat = op.lattice
        ci, cj = lat.coords[rows], lat.coords[cols]
        d = np.zeros(len(rows))
        for a in range(lat.ndim):
            d = np.maximum(d, lat.axis_deltas(ci[:, a], cj[:, a], a))
        radius = float(d.max())
    op._radius_cache[key] = radius
    return radius


def decay_profile(op: LocalOperator) -> dict[int, float]:
    """Max entry magnitude per integer distance shell, over nonzero entries."""
    rows, cols, mags = op.nonzero_site_pairs(tol=0.0)
    if len(rows) == 0:
        return {}
    lat = op.lattice
    ci, cj = lat.coords[rows], lat.coords[cols]
    d = np.zeros(len(rows))
    for a in range(lat.ndim):
        d = np.maximum(d, lat.axis_deltas(ci[:, a], cj[:, a], a))
    shells = d.astype(np.int64)
    out: dict[int, float] = {}
    profile = np.zeros(shells.max() + 1)
    np.maximum.at(profile, shells, mags)
    for s in np.unique(shells):
        out[int(s)] = float(profile[s])
    return out


def decay_away_from(op: LocalOperator, region: Region, mu: float) -> float:
    """sup |T_ij| * d(i, Z)^mu * d(j, Z)^mu with the factor at distance 0 set to 1.

    Measures how sharply the operator is pinned to the region; finite, stable
    values under lattice growth are the desk-scale reading of rapid decay
    away from a boundary.
    """
    if len(region) == 0:
        raise InvalidSiteError("decay_away_from requires a nonempty region")
    lat = op.lattice
    dsite = lat.distances_to_sites(region.site_array())
    factor = np.where(dsite > 0, np.power(np.maximum(dsite, 1.0), mu), 1.0)
    f = np.repeat(factor, lat.n_orb)
    weighted = np.abs(op.matrix) * f[:, None]
    weighted *= f[None, :]
    return float(weighted.max()) if weighted.size else 0.0
