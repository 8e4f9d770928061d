import numpy as np
import pytest

from crmatrix import (LatticeSpec, TwoBandAngles, band_factor, build_kgrid,
                      eigenfield_from_hamiltonian, embedded_gram, kron_embed,
                      pair_inner_product, site_factor, site_factor_frame,
                      two_band_field, wannier_coefficient, wannier_inverse)
from crmatrix.presets import identity_field

from conftest import smooth_field


def random_field(n_cells, n_bands, seed):
    """Eigen-decomposed field of a smooth random Hermitian matrix family."""
    rng = np.random.default_rng(seed)
    a0 = rng.normal(size=(n_bands, n_bands)) + 1j * rng.normal(size=(n_bands, n_bands))
    a1 = rng.normal(size=(n_bands, n_bands)) + 1j * rng.normal(size=(n_bands, n_bands))
    a0 = a0 + a0.conj().T + np.diag(4.0 * np.arange(n_bands))
    a1 = 0.3 * (a1 + a1.conj().T)
    spec = LatticeSpec(n_cells=n_cells, lattice_constant=1.0, n_bands=n_bands)
    grid = build_kgrid(spec)
    return eigenfield_from_hamiltonian(lambda k: a0 + np.cos(k) * a1, grid)


def test_band_factor_identity_field():
    f = identity_field(LatticeSpec(n_cells=4, lattice_constant=1.0, n_bands=3))
    assert np.allclose(band_factor(f, 0, 2), [1, 0, 0])


def test_band_factor_equator_example():
    # theta = pi/2 and phi = pi: column 0 becomes (1, -1)/sqrt(2)
    spec = LatticeSpec(n_cells=4, lattice_constant=1.0, n_bands=2)
    grid = build_kgrid(spec)
    f = two_band_field(TwoBandAngles(theta=lambda k: np.full_like(k, np.pi / 2),
                                     phi=lambda k: np.full_like(k, np.pi)), grid)
    v = band_factor(f, 0, 1)
    assert np.allclose(v, [1 / np.sqrt(2), -1 / np.sqrt(2)], atol=1e-15)


def test_band_factors_orthonormal_random_trials():
    f = random_field(8, 3, seed=11)
    rng = np.random.default_rng(0)
    for _ in range(10):
        m, n = rng.integers(0, 3, 2)
        p = rng.integers(0, 8)
        ip = np.vdot(band_factor(f, m, p), band_factor(f, n, p))
        assert abs(ip - (1.0 if m == n else 0.0)) < 1e-12


def test_site_factor_k_zero_and_moduli():
    spec = LatticeSpec(n_cells=6, lattice_constant=1.0, n_bands=1)
    grid = build_kgrid(spec)
    v = site_factor(spec, grid, 0)
    assert np.allclose(v, 1 / np.sqrt(6))
    v3 = site_factor(spec, grid, 3)
    assert np.allclose(np.abs(v3), 1 / np.sqrt(6), atol=1e-15)
    assert abs(np.linalg.norm(v3) - 1) < 1e-15


def test_site_factor_orthonormal_all_pairs():
    spec = LatticeSpec(n_cells=8, lattice_constant=1.0, n_bands=1)
    grid = build_kgrid(spec)
    for p in range(8):
        for q in range(8):
            ip = np.vdot(site_factor(spec, grid, p), site_factor(spec, grid, q))
            assert abs(ip - (1.0 if p == q else 0.0)) < 1e-13


def test_site_factor_single_cell():
    spec = LatticeSpec(n_cells=1, lattice_constant=1.0, n_bands=1)
    grid = build_kgrid(spec)
    assert np.allclose(site_factor(spec, grid, 0), [1.0])


def test_site_factor_frame_unitary():
    spec = LatticeSpec(n_cells=12, lattice_constant=0.7, n_bands=1)
    grid = build_kgrid(spec)
    frame = site_factor_frame(spec, grid)
    assert np.max(np.abs(frame.conj().T @ frame - np.eye(12))) < 1e-12


def test_kron_embed_example_and_norms():
    out = kron_embed([1.0, 0.0], np.array([1.0, 1.0]) / np.sqrt(2))
    assert np.allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2), 0, 0])
    rng = np.random.default_rng(1)
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert abs(np.linalg.norm(kron_embed(a, b))
               - np.linalg.norm(a) * np.linalg.norm(b)) < 1e-15


def test_embedded_gram_identity_two_band():
    f = smooth_field(n_cells=6, seed=4)
    g = embedded_gram(f)
    assert np.max(np.abs(g - np.eye(12))) < 1e-12


def test_pair_inner_product_kronecker_delta():
    f = smooth_field(n_cells=8, seed=9)
    for m in range(2):
        for n in range(2):
            for p in range(8):
                for q in range(8):
                    ip = pair_inner_product(f, (m, p), (n, q))
                    want = 1.0 if (m == n and p == q) else 0.0
                    assert abs(ip - want) < 1e-12


def test_factorisation_consistency_up_to_three_bands():
    # embedded inner products match the factor-rule inner products
    for n_cells, n_bands, seed in [(8, 2, 0), (16, 3, 1)]:
        f = random_field(n_cells, n_bands, seed)
        spec = f.grid.spec
        rng = np.random.default_rng(seed + 5)
        for _ in range(40):
            m, n = rng.integers(0, n_bands, 2)
            p, q = rng.integers(0, n_cells, 2)
            lhs = np.vdot(
                kron_embed(band_factor(f, m, p), site_factor(spec, f.grid, p)),
                kron_embed(band_factor(f, n, q), site_factor(spec, f.grid, q)))
            rhs = pair_inner_product(f, (m, p), (n, q))
            assert abs(lhs - rhs) < 1e-13


def test_wannier_identity_field_phases():
    spec = LatticeSpec(n_cells=6, lattice_constant=1.0, n_bands=2)
    f = identity_field(spec)
    for p in (0, 2, 5):
        for j in (0, 3):
            w = wannier_coefficient(f, 0, p, 0, j)
            assert abs(w - np.exp(-1j * f.grid.points[p] * spec.sites[j])) < 1e-15


def test_wannier_completeness_sum():
    f = smooth_field(n_cells=8, seed=3)
    spec = f.grid.spec
    for p in (0, 5):
        total = sum(abs(wannier_coefficient(f, 1, p, i, j)) ** 2
                    for i in range(2) for j in range(8)) / spec.n_cells
        assert total == pytest.approx(1.0, abs=1e-12)


def test_wannier_round_trip():
    f = random_field(8, 2, seed=21)
    for band in range(2):
        for orbital in range(2):
            got = wannier_inverse(f, band, orbital)
            want = f.coeffs[:, orbital, band]
            assert np.max(np.abs(got - want)) < 1e-12


def test_constant_component_map_is_blind_to_k():
    # a k-independent assignment also reproduces the delta inner products,
    # but its derivative term vanishes identically: checked via the
    # position matrix of the identity field in test_rmatrix
    f = identity_field(LatticeSpec(n_cells=4, lattice_constant=1.0, n_bands=2))
    g = embedded_gram(f)
    assert np.max(np.abs(g - np.eye(8))) < 1e-12
