"""Control protocols and unitary propagation of the density matrix."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import block_propagators
from .spin_model import SpinChainConfig, build_hamiltonian, symmetry_sectors

SUDDEN_QUENCH = "sudden_quench"
LINEAR_RAMP = "linear_ramp"
DCRAB_PULSE = "dcrab_pulse"
PROTOCOL_KINDS = (SUDDEN_QUENCH, LINEAR_RAMP, DCRAB_PULSE)

STEPS_PER_PI = 1000
TRACE_DRIFT_TOL = 1e-6
# per-step Taylor truncation target; far below double rounding of a unit-norm matrix
_TAYLOR_TOL = 1e-18


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PulseLayer:
    """Sine corrections added during one dCRAB super-iteration."""

    frequencies: tuple
    phases: tuple
    coefficients: tuple

    def __post_init__(self):
        n = len(self.frequencies)
        if len(self.phases) != n or len(self.coefficients) != n:
            raise ValueError("frequencies, phases and coefficients must have equal length")

    def modes(self, t) -> np.ndarray:
        """``sum_k c_k sin(w_k t + phi_k)`` evaluated at ``t`` (array)."""
        t = np.asarray(t, dtype=float)
        w = np.asarray(self.frequencies, dtype=float)
        phi = np.asarray(self.phases, dtype=float)
        c = np.asarray(self.coefficients, dtype=float)
        return np.sin(np.multiply.outer(t, w) + phi) @ c


def boundary_window(t, T: float) -> np.ndarray:
    """``sin(pi t / T)``: zero at both ends, pins the pulse to its boundary values."""
    return np.sin(np.pi * np.asarray(t, dtype=float) / T)


@dataclass(frozen=True)
class ControlProtocol:
    """Scalar control ``f_t`` on ``[0, T]``.

    For ``dcrab_pulse`` the value is the linear ramp plus
    ``boundary_window(t) * sum_j layers[j].modes(t)``.
    """

    kind: str
    f0: float
    fT: float
    T: float
    layers: tuple = ()

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        if self.layers and self.kind != DCRAB_PULSE:
            raise ValueError("only dcrab pulses carry sine layers")

    def evaluate(self, t):
        """Control value(s) at time(s) ``t >= 0``; ``fT`` for ``t > T``."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise ValueError("protocol is undefined for t < 0")
        T = self.T
        if self.kind == SUDDEN_QUENCH:
            out = np.where(t_arr <= T, self.f0, self.fT)
        else:
            out = self.f0 + (self.fT - self.f0) * t_arr / T
            if self.layers:
                corr = sum(layer.modes(t_arr) for layer in self.layers)
                out = out + boundary_window(t_arr, T) * corr
            out = np.where(t_arr >= T, self.fT, out)
        return float(out) if out.ndim == 0 else out

    def with_layer(self, layer: PulseLayer) -> "ControlProtocol":
        return ControlProtocol(DCRAB_PULSE, self.f0, self.fT, self.T, self.layers + (layer,))


def sudden_quench(f0: float, fT: float, T: float) -> ControlProtocol:
    return ControlProtocol(SUDDEN_QUENCH, f0, fT, T)


def linear_ramp(f0: float, fT: float, T: float) -> ControlProtocol:
    return ControlProtocol(LINEAR_RAMP, f0, fT, T)


def default_n_steps(T: float) -> int:
    return max(STEPS_PER_PI, int(math.ceil(STEPS_PER_PI * T / math.pi - 1e-9)))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[start, T]``; each step uses the control at its midpoint."""

    T: float
    n_steps: int
    start: float = 0.0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not self.T > self.start:
            raise ValueError("grid must have positive duration")

    @classmethod
    def for_duration(cls, T: float, n_steps: Optional[int] = None) -> "TimeGrid":
        return cls(T, default_n_steps(T) if n_steps is None else n_steps)

    @property
    def dt(self) -> float:
        return (self.T - self.start) / self.n_steps

    def midpoints(self) -> np.ndarray:
        return self.start + (np.arange(self.n_steps) + 0.5) * self.dt

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.n_steps * factor, self.start)


@dataclass
class PropagationResult:
    rho_final: np.ndarray
    unitary: np.ndarray
    times: Optional[np.ndarray] = None
    controls: Optional[np.ndarray] = None
    states: Optional[np.ndarray] = field(default=None, repr=False)


def _taylor_order(radius: float) -> Optional[int]:
    if radius > 0.5:
        return None
    term = 1.0
    for k in range(1, 30):
        term *= radius / k
        if term * radius / (k + 1) < _TAYLOR_TOL:
            return max(k, 2)
    return None


def _padded_blocks(n_spins: int):
    sym = symmetry_sectors(n_spins)
    dmax = max(sym.dims)
    nb = len(sym.sectors)
    fb = np.zeros((nb, dmax, dmax), complex)
    cb = np.zeros((nb, dmax, dmax), complex)
    for b, d in enumerate(sym.dims):
        fb[b, :d, :d] = sym.field_blocks[b]
        cb[b, :d, :d] = sym.coupling_blocks[b]
    return sym, fb, cb, np.array(sym.dims, dtype=np.int64)


_BLOCK_CACHE: dict = {}


def total_unitary(config: SpinChainConfig, controls, dt: float, method: str = "auto") -> np.ndarray:
    """Ordered product ``prod_s exp(-i H(controls[s]) dt)`` (first step rightmost).

    ``method="eigh"`` exponentiates each step through a dense
    eigendecomposition; ``"taylor"`` uses a truncated Taylor series inside
    the translation x parity symmetry sectors, accurate to rounding;
    ``"auto"`` picks ``taylor`` whenever its truncation bound holds.
    """
    controls = np.ascontiguousarray(controls, dtype=float)
    n = config.n_spins
    order = None
    if method in ("auto", "taylor"):
        radius = abs(dt) * n * (1.0 + np.max(np.abs(controls)))
        order = _taylor_order(radius)
        if order is None and method == "taylor":
            raise ValueError(f"time step too large for the Taylor propagator (radius {radius:.3g})")
    elif method != "eigh":
        raise ValueError(f"unknown propagation method {method!r}")

    if order is None:
        U = np.eye(config.dim, dtype=complex)
        for f in controls:
            E, V = np.linalg.eigh(build_hamiltonian(config, f))
            U = ((V * np.exp(-1j * E * dt)) @ V.conj().T) @ U
        return U

    if n not in _BLOCK_CACHE:
        _BLOCK_CACHE[n] = _padded_blocks(n)
    sym, fb, cb, dims = _BLOCK_CACHE[n]
    blocks = block_propagators(fb, cb, dims, controls, float(dt), order)
    U_sym = np.zeros((config.dim, config.dim), complex)
    for b, s in enumerate(sym.sectors):
        d = len(s)
        U_sym[np.ix_(s, s)] = blocks[b, :d, :d]
    W = sym.basis
    return W @ U_sym @ W.conj().T


def propagate(config: SpinChainConfig, protocol: ControlProtocol, grid: TimeGrid, rho0,
              method: str = "auto", sample_every: Optional[int] = None) -> PropagationResult:
    """Evolve ``rho0`` with the midpoint piecewise-constant propagator.

    With ``sample_every`` set, the state is also recorded every that many
    steps (plus the initial and final state); this path always uses the
    dense eigendecomposition.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    mids = grid.midpoints()
    controls = protocol.evaluate(mids)
    times = states = sampled_controls = None
    if sample_every is None:
        U = total_unitary(config, controls, grid.dt, method)
        rho = U @ rho0 @ U.conj().T
    else:
        U = np.eye(config.dim, dtype=complex)
        rho = rho0
        times_l, states_l, ctrl_l = [grid.start], [rho0], [protocol.evaluate(grid.start)]
        for s, f in enumerate(controls):
            E, V = np.linalg.eigh(build_hamiltonian(config, f))
            step = (V * np.exp(-1j * E * grid.dt)) @ V.conj().T
            U = step @ U
            rho = step @ rho @ step.conj().T
            if (s + 1) % sample_every == 0 or s + 1 == grid.n_steps:
                t = grid.start + (s + 1) * grid.dt
                times_l.append(t)
                states_l.append(rho)
                ctrl_l.append(protocol.evaluate(t))
        times, states, sampled_controls = np.array(times_l), np.array(states_l), np.array(ctrl_l)
    rho = 0.5 * (rho + rho.conj().T)
    drift = abs(np.trace(rho) - np.trace(rho0))
    if drift > TRACE_DRIFT_TOL or not np.all(np.isfinite(rho)):
        raise PropagationError(f"propagated state is unphysical (trace drift {drift:.3e})")
    return PropagationResult(rho, U, times, sampled_controls, states)


@dataclass(frozen=True)
class ConvergenceReport:
    n_steps: int
    n_steps_refined: int
    max_abs_diff: float


def convergence_check(config: SpinChainConfig, protocol: ControlProtocol, rho0,
                      grid: TimeGrid, method: str = "auto") -> ConvergenceReport:
    """Compare ``rho(T)`` on ``grid`` against the grid with twice the steps."""
    coarse = propagate(config, protocol, grid, rho0, method).rho_final
    fine_grid = grid.refined(2)
    fine = propagate(config, protocol, fine_grid, rho0, method).rho_final
    return ConvergenceReport(grid.n_steps, fine_grid.n_steps, float(np.max(np.abs(coarse - fine))))
