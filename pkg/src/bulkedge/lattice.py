"""Finite lattice truncations of Z^d and their region algebra.

Sites are flat integers in ``range(n_sites)`` obtained by C-order raveling of
coordinate tuples.  The metric is l-infinity on coordinates, wrapped on
periodic axes, so nearest-neighbour hopping operators have propagation
radius exactly 1 and balls are easy to enumerate.  Regions are materialized
site sets; "supported near" statements from coarse geometry are realized as
boundary strips of an explicit half-width.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AmplitudeViolationError,
    InvalidSiteError,
    UnsupportedGeometryError,
)

OPEN = "open"
PERIODIC = "periodic"
_BOUNDARIES = (OPEN, PERIODIC)


@dataclass(frozen=True)
class Lattice:
    """Finite truncation of Z^d with per-axis extents and boundary conditions.

    ``n_orb`` counts internal degrees of freedom per site; the Hilbert space
    index of (site, orbital) is ``site * n_orb + orbital``.
    """

    extents: tuple[int, ...]
    boundaries: tuple[str, ...]
    n_orb: int = 1

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(x) for x in self.extents))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        if not self.extents or any(x < 1 for x in self.extents):
            raise InvalidSiteError(f"extents must be positive, got {self.extents}")
        if len(self.boundaries) != len(self.extents):
            raise UnsupportedGeometryError("one boundary condition per axis required")
        if any(b not in _BOUNDARIES for b in self.boundaries):
            raise UnsupportedGeometryError(f"boundary conditions must be in {_BOUNDARIES}")
        if self.n_orb < 1:
            raise InvalidSiteError(f"n_orb must be positive, got {self.n_orb}")

    @property
    def ndim(self) -> int:
        return len(self.extents)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.extents))

    @property
    def dim_hilbert(self) -> int:
        return self.n_sites * self.n_orb

    @cached_property
    def coords(self) -> np.ndarray:
        """(n_sites, d) integer coordinates, row i = coordinates of site i."""
        return np.stack(
            np.unravel_index(np.arange(self.n_sites), self.extents), axis=1
        ).astype(np.int64)

    def site_index(self, coord: Sequence[int]) -> int:
        coord = tuple(int(c) for c in coord)
        if len(coord) != self.ndim:
            raise InvalidSiteError(f"coordinate {coord} has wrong dimension")
        for c, L in zip(coord, self.extents):
            if not 0 <= c < L:
                raise InvalidSiteError(f"coordinate {coord} outside extents {self.extents}")
        return int(np.ravel_multi_index(coord, self.extents))

    def site_coords(self, site: int) -> tuple[int, ...]:
        self._check_site(site)
        return tuple(int(c) for c in np.unravel_index(site, self.extents))

    def _check_site(self, site: int):
        if not 0 <= site < self.n_sites:
            raise InvalidSiteError(f"site {site} outside range [0, {self.n_sites})")

    def axis_deltas(self, a: np.ndarray, b, axis: int) -> np.ndarray:
        """|a - b| along one axis, wrapped to the shorter way round if periodic."""
        delta = np.abs(np.asarray(a, dtype=float) - b)
        if self.boundaries[axis] == PERIODIC:
            delta = np.minimum(delta, self.extents[axis] - delta)
        return delta

    def site_distance(self, i: int, j: int) -> float:
        """l-infinity distance between two sites (torus metric on periodic axes)."""
        self._check_site(i)
        self._check_site(j)
        ci, cj = self.coords[i], self.coords[j]
        return float(
            max(self.axis_deltas(ci[a], cj[a], a) for a in range(self.ndim))
        )

    def distances_from_point(self, point: Sequence[float]) -> np.ndarray:
        """l-infinity distance from every site to an (optionally fractional) point."""
        deltas = [
            self.axis_deltas(self.coords[:, a], float(point[a]), a)
            for a in range(self.ndim)
        ]
        return np.max(np.stack(deltas, axis=1), axis=1)

    def distances_to_sites(self, sites: np.ndarray) -> np.ndarray:
        """(n_sites,) distance from every site to the nearest site in ``sites``."""
        sites = np.asarray(sites, dtype=np.int64)
        if sites.size == 0:
            return np.full(self.n_sites, np.inf)
        target = self.coords[sites]  # (m, d)
        out = np.full(self.n_sites, np.inf)
        # chunk over targets to bound the (n_sites x m) temporary
        step = max(1, int(2e6) // max(1, self.n_sites))
        for lo in range(0, len(target), step):
            block = target[lo : lo + step]
            per_axis = [
                self.axis_deltas(self.coords[:, a : a + 1], block[:, a], a)
                for a in range(self.ndim)
            ]
            d = np.max(np.stack(per_axis, axis=0), axis=0)  # (n_sites, block)
            out = np.minimum(out, d.min(axis=1))
        return out

    def hilbert_site_of(self, index: int) -> int:
        return index // self.n_orb

    def with_orbitals(self, n_orb: int) -> "Lattice":
        return Lattice(self.extents, self.boundaries, n_orb)

    def distance_to_exterior(self) -> np.ndarray:
        """Distance from each site to the nearest off-lattice position across open axes.

        Periodic axes have no exterior; a fully periodic lattice returns +inf
        everywhere.
        """
        out = np.full(self.n_sites, np.inf)
        for a, (L, bc) in enumerate(zip(self.extents, self.boundaries)):
            if bc != OPEN:
                continue
            c = self.coords[:, a]
            out = np.minimum(out, np.minimum(c + 1, L - c))
        return out


@dataclass(frozen=True)
class Region:
    """Subset of lattice sites, materialized as an explicit frozen set."""

    lattice: Lattice
    sites: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        sites = frozenset(int(s) for s in self.sites)
        for s in sites:
            self.lattice._check_site(s)
        object.__setattr__(self, "sites", sites)

    @classmethod
    def from_mask(cls, lattice: Lattice, mask: np.ndarray) -> "Region":
        return cls(lattice, frozenset(np.flatnonzero(np.asarray(mask)).tolist()))

    @classmethod
    def full(cls, lattice: Lattice) -> "Region":
        return cls(lattice, frozenset(range(lattice.n_sites)))

    @classmethod
    def empty(cls, lattice: Lattice) -> "Region":
        return cls(lattice, frozenset())

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site: int) -> bool:
        return int(site) in self.sites

    def __or__(self, other: "Region") -> "Region":
        self._check_same(other)
        return Region(self.lattice, self.sites | other.sites)

    def __and__(self, other: "Region") -> "Region":
        self._check_same(other)
        return Region(self.lattice, self.sites & other.sites)

    def __sub__(self, other: "Region") -> "Region":
        self._check_same(other)
        return Region(self.lattice, self.sites - other.sites)

    def __xor__(self, other: "Region") -> "Region":
        self._check_same(other)
        return Region(self.lattice, self.sites ^ other.sites)

    def _check_same(self, other: "Region"):
        if self.lattice != other.lattice:
            raise UnsupportedGeometryError("regions live on different lattices")

    def complement(self) -> "Region":
        return Region(self.lattice, frozenset(range(self.lattice.n_sites)) - self.sites)

    def site_array(self) -> np.ndarray:
        return np.fromiter(sorted(self.sites), dtype=np.int64, count=len(self.sites))

    def mask(self) -> np.ndarray:
        m = np.zeros(self.lattice.n_sites, dtype=bool)
        m[self.site_array()] = True
        return m

    def hilbert_mask(self) -> np.ndarray:
        return np.repeat(self.mask(), self.lattice.n_orb)

    def diameter(self) -> float:
        """Max pairwise site distance; 0 for empty or singleton regions."""
        sites = self.site_array()
        if len(sites) < 2:
            return 0.0
        c = self.lattice.coords[sites]
        best = 0.0
        for a in range(self.lattice.ndim):
            d = self.lattice.axis_deltas(c[:, a : a + 1], c[:, a], a)
            best = max(best, float(d.max()))
        return best


@dataclass(frozen=True)
class HalfSpaceRegion(Region):
    """Half-space along an open axis; remembers its defining cut."""

    axis: int = 0
    cut: int = 0
    side: str = "+"


def half_space(lattice: Lattice, axis: int, cut: int, side: str = "+") -> HalfSpaceRegion:
    """Sites with axis-coordinate >= cut (side '+') or < cut (side '-').

    Only defined along open axes: a half-space of a circle is not coarsely a
    half-space.
    """
    if not 0 <= axis < lattice.ndim:
        raise UnsupportedGeometryError(f"axis {axis} outside lattice dimension {lattice.ndim}")
    if lattice.boundaries[axis] != OPEN:
        raise UnsupportedGeometryError("half-space requires an open axis")
    if side not in ("+", "-"):
        raise UnsupportedGeometryError(f"side must be '+' or '-', got {side!r}")
    c = lattice.coords[:, axis]
    mask = c >= cut if side == "+" else c < cut
    return HalfSpaceRegion(
        lattice, frozenset(np.flatnonzero(mask).tolist()), axis=axis, cut=int(cut), side=side
    )


def perturbed_half_space(
    base: HalfSpaceRegion, profile: Sequence[int], amplitude: int
) -> Region:
    """Half-space whose cut is displaced per transverse column by ``profile``.

    ``profile`` is indexed by the flattened transverse coordinate (C order over
    the non-cut axes) and every displacement must satisfy ``|p| <= amplitude``,
    so the symmetric difference with the base stays within distance
    ``amplitude`` of the original boundary line.
    """
    if not isinstance(base, HalfSpaceRegion):
        raise UnsupportedGeometryError("base must be a half_space region")
    lat = base.lattice
    profile = np.asarray(profile, dtype=np.int64)
    if np.any(np.abs(profile) > amplitude):
        raise AmplitudeViolationError(
            f"profile exceeds amplitude bound {amplitude}: max |p| = {np.abs(profile).max()}"
        )
    other_axes = [a for a in range(lat.ndim) if a != base.axis]
    transverse_shape = tuple(lat.extents[a] for a in other_axes)
    expected = int(np.prod(transverse_shape)) if other_axes else 1
    if profile.size != expected:
        raise UnsupportedGeometryError(
            f"profile length {profile.size} != transverse column count {expected}"
        )
    if other_axes:
        tidx = np.ravel_multi_index(
            tuple(lat.coords[:, a] for a in other_axes), transverse_shape
        )
    else:
        tidx = np.zeros(lat.n_sites, dtype=np.int64)
    cuts = base.cut + profile[tidx]
    c = lat.coords[:, base.axis]
    mask = c >= cuts if base.side == "+" else c < cuts
    return Region.from_mask(lat, mask)


def thicken(region: Region, r: float) -> Region:
    """All sites within l-infinity distance ``r`` of the region.

    Exact for integer radii because the l-infinity unit ball generates all
    larger balls under repeated dilation; non-integer radii floor to the
    largest integer distance actually attainable on the lattice.
    """
    steps = int(np.floor(r))
    if steps <= 0 or len(region) == 0:
        return Region(region.lattice, region.sites)
    lat = region.lattice
    offsets = np.stack(
        np.meshgrid(*([np.array([-1, 0, 1])] * lat.ndim), indexing="ij"), axis=-1
    ).reshape(-1, lat.ndim)
    current = region.site_array()
    for _ in range(steps):
        c = lat.coords[current]  # (m, d)
        cand = c[:, None, :] + offsets[None, :, :]  # (m, 27.., d)
        cand = cand.reshape(-1, lat.ndim)
        keep = np.ones(len(cand), dtype=bool)
        for a, (L, bc) in enumerate(zip(lat.extents, lat.boundaries)):
            if bc == PERIODIC:
                cand[:, a] %= L
            else:
                keep &= (cand[:, a] >= 0) & (cand[:, a] < L)
        cand = cand[keep]
        current = np.unique(np.ravel_multi_index(tuple(cand.T), lat.extents))
    return Region(lat, frozenset(current.tolist()))


def coarse_boundary_strip(region: Region, r: float) -> Region:
    """Width-2r strip around the region's boundary: B_r(Y) intersect B_r(X \\ Y)."""
    return thicken(region, r) & thicken(region.complement(), r)


@dataclass(frozen=True)
class TransversalityResult:
    diameter: float
    empty: bool


def transversality_diameter(Y: Region, W: Region, r: float) -> TransversalityResult:
    """Diameter of the intersection of the two boundary strips at scale r.

    A small finite diameter certifies that the partition pair is transversal
    at that scale; the empty flag distinguishes a genuinely empty intersection
    from a single-point one.
    """
    cross = coarse_boundary_strip(Y, r) & coarse_boundary_strip(W, r)
    return TransversalityResult(diameter=cross.diameter(), empty=len(cross) == 0)


def edge_frame(lattice: Lattice, r: float) -> Region:
    """Sites within distance ``r`` of the off-lattice exterior across open axes.

    This is the boundary strip of the whole truncation viewed as a subset of
    Z^d; it is empty on a fully periodic lattice.  ``r = 1`` gives the
    outermost ring.
    """
    return Region.from_mask(lattice, lattice.distance_to_exterior() <= r)


def ball(lattice: Lattice, center: Sequence[float], radius: float) -> Region:
    """l-infinity ball around an (optionally fractional) center point."""
    return Region.from_mask(lattice, lattice.distances_from_point(center) <= radius + 1e-9)


def three_sectors(
    lattice: Lattice, center: Sequence[float], offset: float = 0.1
) -> tuple[Region, Region, Region]:
    """Partition of the plane into three 120-degree wedges around ``center``.

    Wedges are ordered counterclockwise starting at angle ``offset``; on
    periodic axes displacements take the shortest way around.  Only defined
    in two dimensions.
    """
    if lattice.ndim != 2:
        raise UnsupportedGeometryError("three_sectors requires a 2-d lattice")
    disp = []
    for a in range(2):
        d = lattice.coords[:, a] - float(center[a])
        if lattice.boundaries[a] == PERIODIC:
            L = lattice.extents[a]
            d = (d + L / 2.0) % L - L / 2.0
        disp.append(d)
    angles = (np.arctan2(disp[1], disp[0]) - offset) % (2 * np.pi)
    third = 2 * np.pi / 3
    sector = np.minimum((angles // third).astype(int), 2)
    return tuple(Region.from_mask(lattice, sector == s) for s in range(3))
