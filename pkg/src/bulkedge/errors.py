"""Exception hierarchy.

Two families matter for the CLI exit code: ``ConfigError`` and
``GeometryError`` are usage problems (exit 1), ``PhysicsError`` means the
model did something the experiment cannot proceed with, e.g. a closed
spectral gap (exit 2).
"""


class BulkEdgeError(Exception):
    """Base class for all package errors."""


class ConfigError(BulkEdgeError):
    """Malformed or inconsistent experiment configuration."""


class GeometryError(BulkEdgeError):
    """Invalid lattice/region construction or usage."""


class InvalidSiteError(GeometryError):
    """Site index or coordinate outside the lattice."""


class UnsupportedGeometryError(GeometryError):
    """Construction not defined for this lattice, e.g. half-space of a periodic axis."""


class AmplitudeViolationError(GeometryError):
    """Boundary-profile displacement exceeds the declared amplitude bound."""


class WindowOverlapError(GeometryError):
    """Trace window touches more than one partition crossing point."""


class FluxQuantizationError(GeometryError):
    """Total magnetic flux through a torus is not an integer number of quanta."""


class DimensionError(BulkEdgeError):
    """Mismatched dimensions (odd Clifford rank, orbital-count mismatch, ...)."""


class HermiticityError(BulkEdgeError):
    """Operator handed to the Hermitian eigensolver is not self-adjoint."""

    def __init__(self, max_asymmetry):
        self.max_asymmetry = max_asymmetry
        super().__init__(f"operator not Hermitian: max |T - T*| entry = {max_asymmetry:.3e}")


class PhysicsError(BulkEdgeError):
    """Model-level failure: the requested quantity does not exist for this input."""


class NotAnInsulatorError(PhysicsError):
    """An eigenvalue sits at (or too close to) the requested Fermi energy."""

    def __init__(self, energy, offending_eigenvalue):
        self.energy = energy
        self.offending_eigenvalue = offending_eigenvalue
        super().__init__(
            f"no spectral gap at E={energy:.6g}: eigenvalue {offending_eigenvalue:.6g} too close"
        )


class GridTooCoarseError(PhysicsError):
    """Discrete Berry-curvature sum failed to round cleanly to an integer."""


class NoSymbolError(PhysicsError):
    """Momentum-space symbol requested for a non-translation-invariant model."""
