"""bulkedge: desk-scale numerics for bulk-boundary physics of lattice insulators.

Builds finite-propagation tight-binding Hamiltonians, computes Fermi
projections and spectral gaps, constructs the boundary unitary of a gapped
bulk class, and verifies gap filling, quantized windowed edge indices, and
their stability under disorder and bounded partition changes.
"""

from .lattice import (
    Lattice,
    Region,
    HalfSpaceRegion,
    ball,
    coarse_boundary_strip,
    edge_frame,
    half_space,
    perturbed_half_space,
    thicken,
    three_sectors,
    transversality_diameter,
)
from .operators import (
    LocalOperator,
    clifford_generators,
    commutator,
    compress,
    decay_away_from,
    decay_profile,
    identity_operator,
    indicator_operator,
    propagation_radius,
    shift_operator,
    tensor_with_internal,
    zero_operator,
)
from .spectral import (
    EigenDecomposition,
    SpectralFunction,
    bump,
    eigh,
    exp_unitary,
    fermi_projection,
    functional_calculus,
    gap_interval,
    smooth_step,
    spectral_gap,
)
from .models import (
    ModelSpec,
    add_disorder,
    bloch_symbol,
    build_hamiltonian,
    bulk_spectrum_from_symbol,
    hofstadter,
    landau_cluster_means,
    toy_dirac,
)
from .indices import (
    KUBO_CHERN_SIGN,
    FhsChernResult,
    GapFillingReport,
    RealSpaceChernResult,
    WindowSweep,
    WindowedTraceResult,
    cobordism_check,
    edge_current,
    edge_index_kubo,
    exp_map_consistency,
    fhs_chern,
    gap_filling_report,
    kubo_global_trace,
    current_global_trace,
    pair_projection_index,
    real_space_chern,
)
from .pipeline import EdgePipeline, bulk_eigenvalues, default_radii

__version__ = "0.1.0"
