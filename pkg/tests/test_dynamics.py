import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from isingthermo.dcrab import DcrabParams, optimize
from isingthermo.dynamics import (
    ControlProtocol,
    PropagationError,
    PulseLayer,
    TimeGrid,
    convergence_check,
    default_n_steps,
    linear_ramp,
    propagate,
    sudden_quench,
    total_unitary,
)
from isingthermo.spectral import eigendecompose, gibbs_state
from isingthermo.spin_model import SpinChainConfig, build_hamiltonian
from isingthermo.thermo import DrivenRing

from conftest import random_density_matrix

CFG4 = SpinChainConfig(4, 50.0)


def gibbs(cfg, f):
    return gibbs_state(eigendecompose(build_hamiltonian(cfg, f)), cfg.beta)


def random_pulse(rng, f0, fT, T, n_layers=2, n_modes=4, scale=0.1):
    p = ControlProtocol("dcrab_pulse", f0, fT, T)
    for _ in range(n_layers):
        p = p.with_layer(PulseLayer(tuple(rng.uniform(0, 40 * math.pi / T, n_modes)),
                                    tuple(rng.integers(0, 2, n_modes) * math.pi / 2),
                                    tuple(rng.normal(scale=scale, size=n_modes))))
    return p


def test_linear_ramp_midpoint():
    assert linear_ramp(0.8, 0.9, math.pi).evaluate(math.pi / 2) == pytest.approx(0.85, abs=1e-15)


def test_quench_switches_after_T():
    q = sudden_quench(0.8, 0.9, math.pi)
    assert q.evaluate(math.pi) == 0.8
    assert q.evaluate(math.pi + 1e-9) == 0.9
    np.testing.assert_array_equal(q.evaluate(np.linspace(0, math.pi, 11)), 0.8)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        linear_ramp(0.8, 0.9, 1.0).evaluate(-0.1)


def test_zero_coefficient_pulse_equals_guess():
    t = np.linspace(0, 2.0, 501)
    guess = linear_ramp(0.3, 0.4, 2.0)
    p = ControlProtocol("dcrab_pulse", 0.3, 0.4, 2.0).with_layer(
        PulseLayer((1.0, 7.0), (0.0, math.pi / 2), (0.0, 0.0)))
    np.testing.assert_array_equal(p.evaluate(t), guess.evaluate(t))


@settings(max_examples=50, deadline=None)
@given(f0=st.floats(-2, 2), df=st.floats(-1, 1), T=st.floats(0.1, 20), seed=st.integers(0, 2**32 - 1))
def test_pulse_boundary_values_exact(f0, df, T, seed):
    p = random_pulse(np.random.default_rng(seed), f0, f0 + df, T, scale=1.0)
    assert p.evaluate(0.0) == f0
    assert p.evaluate(T) == f0 + df


def test_protocol_validation():
    with pytest.raises(ValueError):
        ControlProtocol("bang_bang", 0, 1, 1)
    with pytest.raises(ValueError):
        ControlProtocol("linear_ramp", 0, 1, 0)
    with pytest.raises(ValueError):
        PulseLayer((1.0,), (0.0, 0.0), (1.0,))


def test_grid_and_default_steps():
    assert default_n_steps(math.pi) == 1000
    assert default_n_steps(math.pi / 4) == 1000
    assert default_n_steps(16 * math.pi) == 16000
    g = TimeGrid(2.0, 4)
    np.testing.assert_allclose(g.midpoints(), [0.25, 0.75, 1.25, 1.75])
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0)


def test_constant_protocol_keeps_gibbs_state():
    rho0 = gibbs(CFG4, 0.8)
    res = propagate(CFG4, linear_ramp(0.8, 0.8, math.pi), TimeGrid(math.pi, 1000), rho0)
    assert np.max(np.abs(res.rho_final - rho0)) < 1e-10


def test_numerical_quench_is_stationary():
    rho0 = gibbs(CFG4, 0.8)
    res = propagate(CFG4, sudden_quench(0.8, 0.9, math.pi), TimeGrid(math.pi, 1000), rho0)
    assert np.max(np.abs(res.rho_final - rho0)) < 1e-10


def test_slow_ramp_has_small_friction():
    ring = DrivenRing(CFG4, 0.8, 0.9)
    rep = ring.report(linear_ramp(0.8, 0.9, 50.0), TimeGrid(50.0, 5000))
    assert 0 <= rep.w_fric < 1e-3


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sector_taylor_matches_dense_eigh(rng, n):
    cfg = SpinChainConfig(n, 1.0)
    p = random_pulse(rng, 0.6, 0.7, math.pi / 4)
    ctrl = p.evaluate(TimeGrid(math.pi / 4, 400).midpoints())
    dt = math.pi / 1600
    a = total_unitary(cfg, ctrl, dt, "taylor")
    b = total_unitary(cfg, ctrl, dt, "eigh")
    assert np.max(np.abs(a - b)) < 1e-12


def test_unitary_matches_scipy_expm_product(rng):
    cfg = SpinChainConfig(3)
    ctrl = rng.uniform(-1, 2, size=25)
    dt = 0.01
    U = np.eye(8)
    for f in ctrl:
        U = expm(-1j * dt * build_hamiltonian(cfg, f)) @ U
    assert np.max(np.abs(total_unitary(cfg, ctrl, dt) - U)) < 1e-13


def test_large_steps_fall_back_to_eigh():
    cfg = SpinChainConfig(3)
    U = total_unitary(cfg, np.array([0.5, 1.5]), 1.0)
    ref = expm(-1j * build_hamiltonian(cfg, 1.5)) @ expm(-1j * build_hamiltonian(cfg, 0.5))
    assert np.max(np.abs(U - ref)) < 1e-12
    with pytest.raises(ValueError):
        total_unitary(cfg, np.array([0.5]), 1.0, method="taylor")


def test_unitary_evolution_preserves_spectrum_and_purity(rng):
    cfg = SpinChainConfig(4)
    for _ in range(5):
        rho0 = random_density_matrix(rng, 16, rank=3)
        p = random_pulse(rng, 0.5, 0.6, math.pi / 4, scale=0.5)
        rhoT = propagate(cfg, p, TimeGrid(math.pi / 4, 1000), rho0).rho_final
        np.testing.assert_allclose(np.linalg.eigvalsh(rhoT), np.linalg.eigvalsh(rho0), atol=1e-8)
        assert abs(np.trace(rhoT @ rhoT) - np.trace(rho0 @ rho0)) < 1e-9
        assert abs(np.trace(rhoT) - 1) < 1e-9
        assert np.max(np.abs(rhoT - rhoT.conj().T)) < 1e-12


def test_composition_of_half_intervals(rng):
    cfg = SpinChainConfig(3)
    rho0 = random_density_matrix(rng, 8)
    T = math.pi
    p = random_pulse(rng, 0.9, 1.0, T)
    full = propagate(cfg, p, TimeGrid(T, 1000), rho0).rho_final
    half = propagate(cfg, p, TimeGrid(T / 2, 500), rho0).rho_final
    rest = propagate(cfg, p, TimeGrid(T, 500, start=T / 2), half).rho_final
    assert np.max(np.abs(full - rest)) < 1e-9


def test_sampled_trajectory_agrees_with_fast_path(rng):
    cfg = SpinChainConfig(3)
    rho0 = random_density_matrix(rng, 8)
    p = random_pulse(rng, 0.2, 0.3, 1.0)
    grid = TimeGrid(1.0, 200)
    sampled = propagate(cfg, p, grid, rho0, sample_every=50)
    fast = propagate(cfg, p, grid, rho0)
    assert sampled.states.shape == (5, 8, 8)
    np.testing.assert_allclose(sampled.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert np.max(np.abs(sampled.rho_final - fast.rho_final)) < 1e-12


def test_non_finite_state_is_reported():
    rho0 = np.full((8, 8), np.nan, dtype=complex)
    with pytest.raises(PropagationError):
        propagate(SpinChainConfig(3), linear_ramp(0.1, 0.2, 1.0), TimeGrid(1.0, 10), rho0)


def test_convergence_constant_protocol():
    rho0 = gibbs(CFG4, 0.8)
    rep = convergence_check(CFG4, linear_ramp(0.8, 0.8, math.pi), rho0, TimeGrid(math.pi, 100))
    assert rep.max_abs_diff < 1e-12
    assert rep.n_steps_refined == 200


def test_convergence_linear_ramp():
    # midpoint exponentials are second order: each doubling cuts the gap by 4
    rho0 = gibbs(CFG4, 0.8)
    p = linear_ramp(0.8, 0.9, math.pi / 4)
    diffs = [convergence_check(CFG4, p, rho0, TimeGrid(math.pi / 4, n)).max_abs_diff
             for n in (500, 1000, 2000)]
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.05)
    assert diffs[1] / diffs[2] == pytest.approx(4.0, rel=0.05)
    assert diffs[1] < 1e-8


@pytest.fixture(scope="module")
def fig3_pulse():
    T = math.pi
    pulse, trace = optimize(CFG4, 0.9, 1.0, T, DcrabParams.with_threshold(T, 1e-5, seed=1))
    return pulse


def test_convergence_optimized_pulse(fig3_pulse):
    rho0 = gibbs(CFG4, 0.9)
    assert len(fig3_pulse.layers) >= 1
    d2k = convergence_check(CFG4, fig3_pulse, rho0, TimeGrid(math.pi, 2000)).max_abs_diff
    d8k = convergence_check(CFG4, fig3_pulse, rho0, TimeGrid(math.pi, 8000)).max_abs_diff
    assert d2k / d8k == pytest.approx(16.0, rel=0.1)
    assert d8k < 1e-7


def test_optimized_cost_insensitive_to_step_count(fig3_pulse):
    ring = DrivenRing(CFG4, 0.9, 1.0)
    coarse = ring.report(fig3_pulse, TimeGrid(math.pi, 1000)).s_irr
    fine = ring.report(fig3_pulse, TimeGrid(math.pi, 8000)).s_irr
    assert abs(coarse - fine) < 1e-7
