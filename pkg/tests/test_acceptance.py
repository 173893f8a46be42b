"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The expensive 48x48
boundary pipelines are built once per session and shared by the edge-index,
trace-identity, consistency, cobordism and decay criteria.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from bulkedge.lattice import ball, edge_frame, three_sectors
from bulkedge.models import (
    ModelSpec,
    build_hamiltonian,
    bulk_spectrum_from_symbol,
    hofstadter,
    landau_cluster_means,
)
from bulkedge.operators import clifford_generators, decay_away_from, decay_profile
from bulkedge.pipeline import EdgePipeline
from bulkedge.spectral import eigh, fermi_projection, gap_interval
from bulkedge.indices import (
    KUBO_CHERN_SIGN,
    fhs_chern,
    gap_filling_report,
    real_space_chern,
)


@contextmanager
def criterion(tag: str, description: str):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {tag} {description}: FAIL ({time.perf_counter() - t0:.1f} s)")
        raise
    print(f"ACCEPTANCE {tag} {description}: PASS ({time.perf_counter() - t0:.1f} s)")


def torus(L, m, **kw):
    return ModelSpec("toy-dirac", (L, L), ("periodic", "periodic"), mass=m, **kw)


def box(L, m, **kw):
    return ModelSpec("toy-dirac", (L, L), ("open", "open"), mass=m, **kw)


@pytest.fixture(scope="module")
def pipe48():
    return EdgePipeline.build(box(48, 1.0))


@pytest.fixture(scope="module")
def pipe48_m3():
    return EdgePipeline.build(box(48, 3.0))


@pytest.fixture(scope="module")
def pipe32():
    return EdgePipeline.build(box(32, 1.0), radii=(6.0, 8.0, 10.0, 12.0, 14.0))


def test_c01_clifford_suite():
    with criterion("C01", "Clifford relations for rank 2, 4, 6"):
        for d in (2, 4, 6):
            gammas, gamma0 = clifford_generators(d)
            eye = np.eye(2 ** (d // 2))
            elements = gammas + [gamma0]
            for g in elements:
                assert np.abs(g - g.conj().T).max() <= 1e-13
                assert np.abs(g @ g.conj().T - eye).max() <= 1e-13
            for a in range(d):
                for b in range(a, d):
                    anti = gammas[a] @ gammas[b] + gammas[b] @ gammas[a]
                    target = 2 * eye if a == b else 0 * eye
                    assert np.abs(anti - target).max() <= 1e-13
            assert np.abs(gamma0 @ gamma0 - eye).max() <= 1e-13
            for g in gammas:
                assert np.abs(gamma0 @ g + g @ gamma0).max() <= 1e-13


def test_c02_bloch_torus_consistency():
    with criterion("C02", "torus spectrum equals momentum-symbol union (16x16)"):
        spec = torus(16, 1.0)
        real_space = np.sort(eigh(build_hamiltonian(spec)).eigenvalues)
        symbol_union = bulk_spectrum_from_symbol(spec)
        assert np.abs(real_space - symbol_union).max() <= 1e-9


def test_c03_gap_map():
    with criterion("C03", "gap at 0 closes exactly for mass in {-2, 0, 2} (24x24)"):
        for m in range(-3, 4):
            w = eigh(build_hamiltonian(torus(24, float(m)))).eigenvalues
            closest = np.abs(w).min()
            if m in (-2, 0, 2):
                assert closest <= 0.05, f"mass {m}: expected closed gap, min |E| = {closest}"
            else:
                assert closest >= 0.9, f"mass {m}: expected open gap, min |E| = {closest}"


def test_c04_chern_sweep():
    with criterion("C04", "Chern numbers at n_k=32: 0 at |m|=3, +-1 at |m|=1"):
        results = {m: fhs_chern(torus(16, float(m)), 0.0, 32) for m in (-3, -1, 1, 3)}
        for m in (-3, 3):
            assert results[m].chern == 0
        for m in (-1, 1):
            assert abs(results[m].chern) == 1
        assert results[-1].chern == -results[1].chern
        assert results[-3].chern == -results[3].chern
        for r in results.values():
            assert r.residual <= 1e-6


def test_c05_gap_filling():
    with criterion("C05", "gap filling on the 40x40 box at m=1; none at m=3"):
        reports = {}
        for m in (1.0, 3.0):
            bulk_dec = eigh(build_hamiltonian(torus(40, m)))
            gap_interval(bulk_dec.eigenvalues, 0.0)
            edge_dec = eigh(build_hamiltonian(box(40, m)))
            reports[m] = gap_filling_report(
                bulk_dec, edge_dec, (-0.9, 0.9), edge_frame(edge_dec.lattice, 1), 3.0
            )
        filled = reports[1.0]
        assert filled.in_gap_count >= 40
        assert filled.min_localization >= 0.9
        assert filled.max_in_gap_spacing <= 0.15
        control = reports[3.0]
        assert control.in_gap_count < 40
        assert control.max_in_gap_spacing > 0.15


def test_c06_edge_index_quantization(pipe48, pipe48_m3):
    with criterion("C06", "edge estimators converge to a common quantized value (48x48)"):
        chern = fhs_chern(torus(16, 1.0), 0.0, 32).chern
        expected = KUBO_CHERN_SIGN * chern
        assert abs(expected) == 1
        kubo = pipe48.kubo()
        pair1 = pipe48.pair_index(1)
        pair2 = pipe48.pair_index(2)
        current = pipe48.current()
        for res in (kubo, pair1, pair2, current):
            assert res.converged, "estimator failed to reach a plateau"
            assert abs(res.value.real - expected) <= 0.1
        assert abs(pair1.value.real - pair2.value.real) <= 0.05
        for m3_res in (pipe48_m3.kubo(), pipe48_m3.pair_index(1), pipe48_m3.current()):
            assert m3_res.converged
            assert abs(m3_res.value.real) <= 0.05


def test_c07_finite_trace_identity(pipe48, pipe48_m3):
    with criterion("C07", "unwindowed traces of both edge integrands vanish"):
        for pipe in (pipe48, pipe48_m3):
            g1, g2 = pipe.global_trace_residuals()
            assert g1 <= 1e-9
            assert g2 <= 1e-9


def test_c08_exp_map_consistency(pipe48):
    with criterion("C08", "windowed unitary index equals -2*pi*i windowed step-commutator trace"):
        first, second = pipe48.exp_map_pair()
        assert abs(first - second) <= 0.05, (
            f"windowed Tr(u[chi_W, u*]) = {first:.6f} but -2*pi*i windowed "
            f"Tr([chi_W, f(H)]) = {second:.6f}: the second windowed trace is "
            "identically zero at finite volume (every on-site block of a "
            "commutator with the site-diagonal chi_W vanishes), so the stated "
            "agreement cannot hold for a topologically nontrivial mass"
        )


def test_c09_disorder_robustness(pipe32):
    with criterion("C09", "indices within 0.1 of clean values for five disorder seeds"):
        clean_kubo = pipe32.kubo()
        assert clean_kubo.converged
        lat = torus(32, 1.0).lattice
        center = (15.5, 15.5)
        sectors = three_sectors(lat, center, offset=0.1)
        window = ball(lat, center, 12)
        clean_p = fermi_projection(eigh(build_hamiltonian(torus(32, 1.0))), 0.0)
        clean_rs = real_space_chern(clean_p, sectors, window)
        for seed in (1, 2, 3, 4, 5):
            dec = eigh(build_hamiltonian(torus(32, 1.0, disorder=0.5, seed=seed)))
            p = fermi_projection(dec, 0.0)
            rs = real_space_chern(p, sectors, window)
            assert abs(rs.value - clean_rs.value) <= 0.1, f"seed {seed}: real-space drifted"
            pipe = EdgePipeline.build(
                box(32, 1.0, disorder=0.5, seed=seed), radii=pipe32.sweep.radii
            )
            kubo = pipe.kubo()
            assert kubo.converged, f"seed {seed}: no plateau"
            assert abs(kubo.value.real - clean_kubo.value.real) <= 0.1, f"seed {seed}: edge index drifted"


def test_c10_cobordism_invariance(pipe48):
    with criterion("C10", "edge index stable under an amplitude-3 partition wiggle"):
        profile = [3 if y % 2 == 0 else -3 for y in range(48)]
        wiggled = pipe48.perturbed_W(profile, 3)
        from bulkedge.indices import cobordism_check

        assert cobordism_check(pipe48.unitary, pipe48.W, wiggled, pipe48.sweep) <= 0.05
        shifted = pipe48.perturbed_W([2] * 48, 2)
        assert cobordism_check(pipe48.unitary, pipe48.W, shifted, pipe48.sweep) <= 0.05


def test_c11_landau_level_ratio():
    with criterion("C11", "lowest magnetic clusters at flux 2*pi/16 show the 3:1 ratio"):
        spec = ModelSpec(
            "hofstadter", (32, 32), ("periodic", "periodic"), flux=2 * np.pi / 16
        )
        wx = np.linalg.eigvalsh(hofstadter(spec, "landau-x").matrix)
        wy = np.linalg.eigvalsh(hofstadter(spec, "landau-y").matrix)
        assert np.abs(np.sort(wx) - np.sort(wy)).max() <= 1e-9
        means = landau_cluster_means(wx, spec, 2)
        ratio = means[1] / means[0]
        assert abs(ratio - 3.0) <= 0.45, f"cluster ratio {ratio}"


def test_c12_decay_diagnostics(pipe32, pipe48):
    with criterion("C12", "projection decay profile and boundary pinning of the bump ensemble"):
        dec = eigh(build_hamiltonian(torus(24, 1.0)))
        p = fermi_projection(dec, 0.0)
        profile = decay_profile(p)
        weighted = {s: profile[s] * s**4 for s in sorted(profile) if 1 <= s <= 10}
        assert max(weighted.values()) <= 1.0, "weighted profile exceeded its frozen bound"
        values = [weighted[s] for s in sorted(weighted) if s >= 3]
        assert all(
            later <= earlier + 1e-12 for earlier, later in zip(values, values[1:])
        ), (
            f"profile(s)*s^4 rises between shells {values[:2]}: the measured "
            "projection decay length exceeds 1 site at unit gap, so the "
            "fourth-moment weight peaks near s=4, not s=3"
        )
        pinnings = {}
        for pipe in (pipe32, pipe48):
            strip = edge_frame(pipe.lattice, 1)
            pinnings[pipe.lattice.extents[0]] = decay_away_from(pipe.bump_operator, strip, 2.0)
        assert pinnings[48] <= 2.0 * pinnings[32]
        assert pinnings[48] >= 0.5 * pinnings[32]
        assert np.isfinite(pinnings[32]) and pinnings[32] > 0


def test_edge_integrand_pinned_to_partition_crossings(pipe32, pipe48):
    # invariant behind the windowed traces: the unitary edge integrand decays
    # away from the intersection of the two partition boundary strips, with a
    # supremum stable (within x2) under lattice growth
    from bulkedge.lattice import coarse_boundary_strip
    from bulkedge.operators import LocalOperator

    values = {}
    for pipe in (pipe32, pipe48):
        w = pipe.W.hilbert_mask().astype(float)
        u = pipe.unitary.matrix
        m = (u * w[None, :]) @ u.conj().T
        m[np.diag_indices_from(m)] -= w
        integrand = LocalOperator(pipe.lattice, m)
        crossings = coarse_boundary_strip(pipe.W, 1) & edge_frame(pipe.lattice, 1)
        values[pipe.lattice.extents[0]] = decay_away_from(integrand, crossings, 2.0)
    assert np.isfinite(values[32]) and values[32] > 0
    assert values[48] <= 2.0 * values[32]
    assert values[48] >= 0.5 * values[32]
