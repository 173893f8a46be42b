import numpy as np
import pytest

from conftest import matrix_operator, rand_hermitian

from bulkedge.errors import DimensionError, HermiticityError, NotAnInsulatorError
from bulkedge.lattice import Lattice
from bulkedge.models import ModelSpec, build_hamiltonian, toy_dirac
from bulkedge.operators import LocalOperator
from bulkedge.spectral import (
    bump,
    eigh,
    exp_unitary,
    fermi_projection,
    functional_calculus,
    gap_interval,
    smooth_step,
    spectral_gap,
)


def expm_taylor(a: np.ndarray) -> np.ndarray:
    """Independent scaled-and-squared power-series exponential."""
    norm = np.abs(a).sum(axis=1).max()
    s = max(0, int(np.ceil(np.log2(max(norm, 1e-30) / 0.5))))
    b = a / (2**s)
    term = np.eye(a.shape[0], dtype=complex)
    out = term.copy()
    for k in range(1, 30):
        term = term @ b / k
        out += term
    for _ in range(s):
        out = out @ out
    return out


def gauss_legendre_integral(fn, a: float, b: float, nodes: int = 64) -> float:
    """Independent quadrature oracle."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (b - a) * x + 0.5 * (a + b)
    return float(0.5 * (b - a) * np.sum(w * fn(t)))


# ---------------------------------------------------------------- eigh


def test_eigh_sorts_diagonal():
    dec = eigh(matrix_operator(np.diag([3.0, 1.0, 2.0]).astype(complex)))
    assert np.allclose(dec.eigenvalues, [1.0, 2.0, 3.0])
    # permutation eigenvectors up to phase
    assert np.allclose(np.abs(dec.eigenvectors), np.eye(3)[:, [1, 2, 0]])


def test_eigh_pauli_x():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    dec = eigh(matrix_operator(x))
    assert np.allclose(dec.eigenvalues, [-1.0, 1.0])
    assert dec.orthonormality_residual < 1e-12
    assert dec.reconstruction_residual < 1e-12


def test_eigh_toy_spectrum_symmetric(toy16_dec):
    _, dec = toy16_dec
    w = dec.eigenvalues
    assert np.abs(w + w[::-1]).max() < 1e-9


def test_eigh_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(HermiticityError) as err:
        eigh(matrix_operator(m))
    assert err.value.max_asymmetry == pytest.approx(1.0)


def test_eigh_invariants_on_random_input():
    dec = eigh(matrix_operator(rand_hermitian(40, seed=1)))
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert dec.orthonormality_residual <= 1e-10
    assert dec.reconstruction_residual <= 1e-9 * dec.source_scale * dec.dim


# ---------------------------------------------------------------- gaps


def test_gap_two_levels():
    dec = eigh(matrix_operator(np.diag([-1.0, 1.0]).astype(complex)))
    assert spectral_gap(dec, 0.0) == (-1.0, 1.0)


def test_gap_toy_matches_band_minimum_oracle(toy16_dec):
    spec, dec = toy16_dec
    # oracle: minimum |eigenvalue| of the momentum symbol over a fine grid
    from bulkedge.models import bloch_symbol

    ks = np.linspace(0, 2 * np.pi, 96, endpoint=False)
    band_min = min(
        np.abs(np.linalg.eigvalsh(bloch_symbol(spec, (kx, ky)))).min()
        for kx in ks
        for ky in ks
    )
    a, b = spectral_gap(dec, 0.0)
    assert b == pytest.approx(1.0, abs=0.02)
    assert -a == pytest.approx(1.0, abs=0.02)
    assert band_min == pytest.approx(1.0, abs=1e-9)


def test_gap_rejects_eigenvalue_at_energy():
    dec = eigh(matrix_operator(np.diag([-1.0, 0.0, 1.0]).astype(complex)))
    with pytest.raises(NotAnInsulatorError) as err:
        spectral_gap(dec, 0.0)
    assert err.value.offending_eigenvalue == pytest.approx(0.0)


def test_gap_interval_on_raw_array():
    assert gap_interval(np.array([-2.0, -0.5, 0.7]), 0.0) == (-0.5, 0.7)


# ---------------------------------------------------------------- functional calculus


def test_functional_calculus_identity_reconstructs():
    op = matrix_operator(rand_hermitian(12, seed=2))
    dec = eigh(op)
    back = functional_calculus(dec, lambda w: w)
    assert np.abs(back.matrix - op.matrix).max() < 1e-12


def test_functional_calculus_constant_one_is_identity():
    dec = eigh(matrix_operator(rand_hermitian(9, seed=3)))
    one = functional_calculus(dec, np.ones_like)
    assert np.abs(one.matrix - np.eye(9)).max() < 1e-12


def test_functional_calculus_exp_against_power_series():
    h = rand_hermitian(6, seed=4)
    dec = eigh(matrix_operator(h))
    via_eig = functional_calculus(dec, np.exp)
    assert np.abs(via_eig.matrix - expm_taylor(h)).max() < 1e-9


def test_functional_calculus_is_algebra_map():
    rng = np.random.default_rng(5)
    dec = eigh(matrix_operator(rand_hermitian(10, seed=6)))
    for _ in range(4):
        cf = rng.normal(size=3)
        cg = rng.normal(size=3)
        f = lambda w: cf[0] + cf[1] * w + cf[2] * w**2
        g = lambda w: cg[0] + cg[1] * w + cg[2] * w**2
        fg = functional_calculus(dec, lambda w: f(w) * g(w))
        prod = functional_calculus(dec, f) @ functional_calculus(dec, g)
        assert np.abs(fg.matrix - prod.matrix).max() < 1e-9


def test_spectral_mapping_multiset():
    dec = eigh(matrix_operator(rand_hermitian(14, seed=7)))
    f = lambda w: np.tanh(w) + 0.3 * w**2
    op = functional_calculus(dec, f)
    got = np.sort(np.linalg.eigvalsh(op.matrix))
    assert np.abs(got - np.sort(f(dec.eigenvalues))).max() < 1e-9


# ---------------------------------------------------------------- fermi projection


def test_fermi_projection_two_level():
    dec = eigh(matrix_operator(np.diag([0.0, 2.0]).astype(complex)))
    p = fermi_projection(dec, 1.0)
    assert np.allclose(p.matrix, np.diag([1.0, 0.0]))


def test_fermi_projection_idempotent_toy(toy16_dec):
    _, dec = toy16_dec
    p = fermi_projection(dec, 0.0)
    assert np.abs((p @ p).matrix - p.matrix).max() <= 1e-10
    assert p.hermiticity_defect() <= 1e-12


def test_fermi_projection_half_rank(toy16_dec):
    _, dec = toy16_dec
    p = fermi_projection(dec, 0.0)
    rank = int(round(np.trace(p.matrix).real))
    assert rank == dec.dim // 2


def test_fermi_projection_requires_gap():
    dec = eigh(matrix_operator(np.diag([0.0, 2.0]).astype(complex)))
    with pytest.raises(NotAnInsulatorError):
        fermi_projection(dec, 2.0)


def test_fermi_projection_equals_smooth_step_calculus(toy16_dec):
    _, dec = toy16_dec
    gap = spectral_gap(dec, 0.0)
    p = fermi_projection(dec, 0.0)
    via_step = functional_calculus(dec, smooth_step(gap))
    assert np.abs(p.matrix - via_step.matrix).max() <= 1e-10


# ---------------------------------------------------------------- step and bump


def test_smooth_step_endpoint_values():
    f = smooth_step((-1.0, 1.0))
    assert f(-1.0) == pytest.approx(1.0)
    assert f(1.0) == pytest.approx(0.0)
    assert f(-3.0) == pytest.approx(1.0)
    assert f(5.0) == pytest.approx(0.0)


def test_smooth_step_midpoint_half():
    f = smooth_step((0.2, 0.8))
    assert f(0.5) == pytest.approx(0.5)


def test_smooth_step_monotone_and_smooth():
    f = smooth_step((-0.7, 0.4))
    x = np.linspace(-1.0, 1.0, 4001)
    y = f(x)
    assert np.all(np.diff(y) <= 1e-15)
    assert np.all((y >= 0) & (y <= 1))


def test_bump_unit_integral_quadrature_oracle():
    phi = bump((-0.9, 0.9))
    integral = gauss_legendre_integral(phi, -0.9, 0.9)
    assert abs(integral - 1.0) < 1e-10


def test_bump_nonnegative_supported_in_gap():
    phi = bump((-0.5, 0.25))
    x = np.linspace(-2, 2, 2001)
    y = phi(x)
    assert np.all(y >= 0)
    assert np.all(y[(x < -0.5) | (x > 0.25)] == 0)


def test_bump_is_negated_step_derivative():
    gap = (-1.0, 1.0)
    f, phi = smooth_step(gap), bump(gap)
    x = np.linspace(-1.2, 1.2, 801)
    h = 1e-6
    deriv = (f(x + h) - f(x - h)) / (2 * h)
    assert np.abs(-deriv - phi(x)).max() < 1e-6


def test_spectral_function_validation():
    with pytest.raises(DimensionError):
        smooth_step((1.0, 1.0))
    with pytest.raises(DimensionError):
        bump((2.0, -2.0))


def test_tabulated_spectral_function():
    from bulkedge.spectral import SpectralFunction

    fn = SpectralFunction(kind="tabulated", table=((0.0, 1.0, 2.0), (0.0, 1.0, 4.0)))
    assert fn(0.5) == pytest.approx(0.5)
    assert fn.support == (0.0, 2.0)


# ---------------------------------------------------------------- boundary unitary


def test_exp_unitary_trivial_when_gap_empty():
    dec = eigh(matrix_operator(np.diag([-2.0, -1.5, 1.5, 2.0]).astype(complex)))
    u = exp_unitary(dec, smooth_step((-1.0, 1.0)))
    assert np.abs(u.matrix - np.eye(4)).max() < 1e-9


def test_exp_unitary_is_unitary(toy16_dec):
    _, dec = toy16_dec
    u = exp_unitary(dec, smooth_step(spectral_gap(dec, 0.0)))
    assert np.abs((u.adjoint() @ u).matrix - np.eye(dec.dim)).max() <= 1e-9


def test_exp_unitary_commutes_with_source(toy16_dec):
    spec, dec = toy16_dec
    h = build_hamiltonian(spec)
    u = exp_unitary(dec, smooth_step(spectral_gap(dec, 0.0)))
    comm = (u @ h) - (h @ u)
    assert comm.max_entry() <= 1e-9


def test_exp_unitary_far_from_identity_with_boundary():
    box = ModelSpec("toy-dirac", (16, 16), ("open", "open"), mass=1.0)
    dec = eigh(build_hamiltonian(box))
    u = exp_unitary(dec, smooth_step((-1.0, 1.0)))
    # operator norm from the spectral mapping: boundary states fill the gap
    phases = np.exp(2j * np.pi * smooth_step((-1.0, 1.0))(dec.eigenvalues))
    assert np.abs(phases - 1.0).max() >= 0.5
    assert np.abs(np.linalg.eigvals(u.matrix) ).max() == pytest.approx(1.0, abs=1e-9)


def test_exp_unitary_requires_step():
    dec = eigh(matrix_operator(rand_hermitian(4, seed=8)))
    with pytest.raises(DimensionError):
        exp_unitary(dec, bump((-1.0, 1.0)))
