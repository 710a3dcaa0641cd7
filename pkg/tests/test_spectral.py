import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from isingthermo.spectral import (
    eigendecompose,
    free_energy_difference,
    gibbs_populations,
    gibbs_state,
    group_degenerate,
    partition_function_log,
    check_density_matrix,
    von_neumann_entropy,
)
from isingthermo.spin_model import SpinChainConfig, build_hamiltonian

from conftest import random_density_matrix


def two_spin_log_z(f, beta):
    r = np.sqrt(1 + f**2)
    return np.log(np.exp(-2 * beta) + np.exp(2 * beta) + 2 * np.cosh(2 * beta * r))


def test_diagonal_input():
    spec = eigendecompose(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(spec.eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(spec.eigenvectors, np.eye(3)[:, [1, 2, 0]], atol=1e-15)


def test_two_spin_spectrum_at_unit_field():
    spec = eigendecompose(build_hamiltonian(SpinChainConfig(2), 1.0))
    r8 = 2 * np.sqrt(2)
    np.testing.assert_allclose(spec.eigenvalues, [-r8, -2, 2, r8], atol=1e-12)


def test_invariants_on_ring(rng):
    for n in (3, 4, 5):
        H = build_hamiltonian(SpinChainConfig(n), rng.uniform(0, 2))
        spec = eigendecompose(H)
        V = spec.eigenvectors
        assert np.all(np.diff(spec.eigenvalues) >= 0)
        np.testing.assert_allclose(V.conj().T @ V, np.eye(2**n), atol=1e-10)
        np.testing.assert_allclose(spec.reconstruct(), H, atol=1e-10)
        flat = np.concatenate(spec.degeneracy_groups)
        np.testing.assert_array_equal(flat, np.arange(2**n))


def test_phase_convention():
    spec = eigendecompose(build_hamiltonian(SpinChainConfig(4), 0.8))
    for col in spec.eigenvectors.T:
        first = col[np.nonzero(np.abs(col) > 1e-12)[0][0]]
        assert abs(first.imag) < 1e-14 and first.real > 0


def test_degenerate_basis_is_canonical(rng):
    # same operator written with a rotated degenerate subspace -> same eigenvectors
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    H = Q @ np.diag([1.0, 1.0, 1.0, 2.0]) @ Q.conj().T
    R = np.eye(4, dtype=complex)
    R[:3, :3], _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    H2 = (Q @ R) @ np.diag([1.0, 1.0, 1.0, 2.0]) @ (Q @ R).conj().T
    a, b = eigendecompose(H), eigendecompose(H2)
    assert [len(g) for g in a.degeneracy_groups] == [3, 1]
    np.testing.assert_allclose(a.eigenvectors, b.eigenvectors, atol=1e-10)


def test_deterministic():
    H = build_hamiltonian(SpinChainConfig(5), 0.6)
    a, b = eigendecompose(H), eigendecompose(H.copy())
    np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)


def test_grouping_is_transitive():
    groups = group_degenerate([0.0, 0.6e-9, 1.2e-9, 1.0], tol=1e-9)
    assert [list(g) for g in groups] == [[0, 1, 2], [3]]


def test_level_crossing_of_four_spin_ring():
    # For N=4 the only crossing in 0 < f < 2 is the -2f doublet meeting a
    # singlet at f = 2/sqrt(3) (E = -4/sqrt(3)); at f = 1 nothing crosses.
    cfg = SpinChainConfig(4)
    fc = 2 / np.sqrt(3)
    at = eigendecompose(build_hamiltonian(cfg, fc))
    near = eigendecompose(build_hamiltonian(cfg, fc - 1e-3))
    assert len(at.degeneracy_groups) < len(near.degeneracy_groups)
    merged = [g for g in at.degeneracy_groups if len(g) == 3]
    np.testing.assert_allclose(at.eigenvalues[merged[0]], -4 / np.sqrt(3), atol=1e-9)
    unit = eigendecompose(build_hamiltonian(cfg, 1.0))
    assert len(unit.degeneracy_groups) == len(near.degeneracy_groups)


def test_log_z_simple_cases():
    assert partition_function_log(np.array([0.0, 0.0]), 3.7) == pytest.approx(np.log(2))
    spec = eigendecompose(build_hamiltonian(SpinChainConfig(5), 0.4))
    assert partition_function_log(spec, 0.0) == pytest.approx(np.log(32))


def test_log_z_two_spins():
    spec = eigendecompose(build_hamiltonian(SpinChainConfig(2), 1.0))
    assert partition_function_log(spec, 1.0) == pytest.approx(two_spin_log_z(1.0, 1.0), abs=1e-12)


def test_log_z_matches_matrix_exponential():
    H = build_hamiltonian(SpinChainConfig(4), 0.8)
    oracle = np.log(np.trace(expm(-50.0 * H)).real)
    assert partition_function_log(eigendecompose(H), 50.0) == pytest.approx(oracle, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=30),
       st.floats(0, 1e6))
def test_log_z_stable(energies, beta):
    assert np.isfinite(partition_function_log(np.array(energies), beta))


def test_gibbs_infinite_temperature():
    spec = eigendecompose(build_hamiltonian(SpinChainConfig(3), 0.9))
    np.testing.assert_allclose(gibbs_state(spec, 0.0), np.eye(8) / 8, atol=1e-14)


def test_gibbs_zero_temperature_limit():
    spec = eigendecompose(build_hamiltonian(SpinChainConfig(4), 0.8))
    assert spec.eigenvalues[1] - spec.eigenvalues[0] > 0.1
    g = spec.eigenvectors[:, 0]
    np.testing.assert_allclose(gibbs_state(spec, 1e4), np.outer(g, g.conj()), atol=1e-8)


@pytest.mark.parametrize("n,f,beta", [(4, 0.8, 50.0), (3, 1.3, 1.0), (5, 0.2, 10.0)])
def test_gibbs_state_is_valid_and_stationary(n, f, beta):
    H = build_hamiltonian(SpinChainConfig(n), f)
    rho = gibbs_state(eigendecompose(H), beta)
    check_density_matrix(rho)
    assert np.max(np.abs(rho @ H - H @ rho)) < 1e-10


def test_gibbs_matches_matrix_exponential():
    H = build_hamiltonian(SpinChainConfig(3), 0.7)
    oracle = expm(-2.0 * H)
    oracle /= np.trace(oracle)
    np.testing.assert_allclose(gibbs_state(eigendecompose(H), 2.0), oracle, atol=1e-12)


def test_gibbs_minimizes_free_energy(rng):
    beta = 1.5
    H = build_hamiltonian(SpinChainConfig(3), 0.9)
    rho_g = gibbs_state(eigendecompose(H), beta)
    f_gibbs = np.trace(H @ rho_g).real - von_neumann_entropy(rho_g) / beta
    for _ in range(20):
        rho = random_density_matrix(rng, 8, rank=rng.integers(1, 9))
        f_rho = np.trace(H @ rho).real - von_neumann_entropy(rho) / beta
        assert f_gibbs <= f_rho + 1e-9


def test_free_energy_difference_cases():
    s0 = eigendecompose(build_hamiltonian(SpinChainConfig(2), 0.0))
    s1 = eigendecompose(build_hamiltonian(SpinChainConfig(2), 1.0))
    assert free_energy_difference(s0, s0, 1.0) == 0.0
    expected = two_spin_log_z(0.0, 1.0) - two_spin_log_z(1.0, 1.0)
    assert free_energy_difference(s0, s1, 1.0) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        free_energy_difference(s0, s1, 0.0)


def test_free_energy_difference_fig1_point():
    cfg = SpinChainConfig(4, 50.0)
    H0, HT = build_hamiltonian(cfg, 0.8), build_hamiltonian(cfg, 0.9)
    oracle = -(np.log(np.trace(expm(-50 * HT)).real) - np.log(np.trace(expm(-50 * H0)).real)) / 50
    got = free_energy_difference(eigendecompose(H0), eigendecompose(HT), 50.0)
    assert got == pytest.approx(oracle, abs=1e-12)


def test_populations_sum_to_one():
    p = gibbs_populations(np.array([-1000.0, 0.0, 5.0]), 1e3)
    assert p.sum() == pytest.approx(1.0)


def test_density_matrix_checks():
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.2, -0.2]))
