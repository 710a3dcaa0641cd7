"""dCRAB optimal control of the driven ring.

Each super-iteration draws ``n_frequencies`` random sine modes, optimizes
their amplitudes with Nelder-Mead starting from zero, and folds the result
into the guess for the next round. The first guess is the linear ramp.
Random numbers come from numpy's PCG64 generator seeded with ``seed``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import ControlProtocol, PulseLayer, TimeGrid, linear_ramp
from .simplex import NelderMeadParams, nelder_mead
from .spin_model import SpinChainConfig
from .thermo import DrivenRing, IrreversibilityReport

ERROR_THRESHOLD = "error_threshold"
MAX_SUPERITERATIONS = "max_superiterations"
CHANGE_THRESHOLD = "change_threshold"
OBJECTIVES = ("s_irr", "w_fric", "s_qvol")


@dataclass(frozen=True)
class DcrabParams:
    """Optimizer settings.

    ``omega_max`` defaults to ``2 pi * 20 / T`` (angular frequency) when left
    as ``None``; ``simplex.max_evaluations`` is the per-super-iteration budget.
    """

    T: float
    n_frequencies: int = 4
    omega_max: Optional[float] = None
    eta_error: float = 1e-5
    eta_change: float = 1e-5
    max_superiterations: int = 8
    seed: int = 0
    simplex: NelderMeadParams = NelderMeadParams()

    def __post_init__(self):
        if self.n_frequencies < 1:
            raise ValueError("need at least one frequency per super-iteration")
        if self.omega_max is None:
            object.__setattr__(self, "omega_max", 2 * math.pi * 20 / self.T)
        if not self.omega_max > 0:
            raise ValueError("omega_max must be positive")
        if not (self.eta_error > 0 and self.eta_change > 0):
            raise ValueError("thresholds must be positive")
        if self.max_superiterations < 1:
            raise ValueError("max_superiterations must be >= 1")

    @classmethod
    def with_threshold(cls, T: float, eta: float, **kwargs) -> "DcrabParams":
        return cls(T=T, eta_error=eta, eta_change=eta, **kwargs)


@dataclass(frozen=True)
class PulseBasis:
    frequencies: np.ndarray
    phases: np.ndarray


@dataclass
class SuperIteration:
    basis: PulseBasis
    coefficients: np.ndarray
    best_cost: float
    n_evaluations: int


@dataclass
class OptimizationTrace:
    """Every cost evaluation in call order, plus per-super-iteration summaries.

    ``reports[nu]`` holds all quantifiers of evaluation ``nu``, so the
    non-optimized figures of merit can be followed along the run.
    """

    costs: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    superiterations: list = field(default_factory=list)
    stopping_reason: Optional[str] = None

    @property
    def n_evaluations(self) -> int:
        return len(self.costs)

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.costs, dtype=float))

    def best_reports(self) -> list:
        """Report of the incumbent (best candidate so far) after every evaluation."""
        out, best, cur = [], math.inf, None
        for cost, rep in zip(self.costs, self.reports):
            if cost < best:
                best, cur = cost, rep
            out.append(cur)
        return out


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def draw_basis(params: DcrabParams, rng: np.random.Generator) -> PulseBasis:
    """Frequencies uniform on ``[0, omega_max]``; phases uniform on ``{0, pi/2}``."""
    freqs = rng.uniform(0.0, params.omega_max, size=params.n_frequencies)
    phases = rng.integers(0, 2, size=params.n_frequencies) * (math.pi / 2)
    return PulseBasis(freqs, phases)


def assemble_pulse(guess: ControlProtocol, basis: PulseBasis, coeffs, T: Optional[float] = None
                   ) -> ControlProtocol:
    """``guess + sin(pi t / T) * sum_k c_k sin(w_k t + phi_k)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != basis.frequencies.shape:
        raise ValueError(f"expected {basis.frequencies.size} coefficients, got {coeffs.size}")
    if T is not None and T != guess.T:
        raise ValueError("pulse duration does not match the guess")
    layer = PulseLayer(tuple(map(float, basis.frequencies)), tuple(map(float, basis.phases)),
                       tuple(map(float, coeffs)))
    return guess.with_layer(layer)


def optimize(config: SpinChainConfig, f0: float, fT: float, T: float, params: DcrabParams,
             grid: Optional[TimeGrid] = None, objective: str = "s_irr",
             ring: Optional[DrivenRing] = None) -> tuple[ControlProtocol, OptimizationTrace]:
    """Minimize ``objective`` over pulses ``f0 -> fT`` of duration ``T``.

    Stops when the best cost drops below ``eta_error``, after
    ``max_superiterations`` rounds, or (from the second round on) when a
    round improves the cost by a relative amount below ``eta_change``.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    if T != params.T:
        raise ValueError("params.T does not match the requested duration")
    grid = TimeGrid.for_duration(T) if grid is None else grid
    ring = DrivenRing(config, f0, fT) if ring is None else ring
    rng = make_rng(params.seed)
    trace = OptimizationTrace()

    def evaluate(protocol: ControlProtocol) -> float:
        rep = ring.report(protocol, grid)
        value = getattr(rep, objective)
        trace.costs.append(value)
        trace.reports.append(rep)
        return value

    guess = ControlProtocol("dcrab_pulse", f0, fT, T)
    best_cost = evaluate(guess)
    if best_cost < params.eta_error:
        trace.stopping_reason = ERROR_THRESHOLD
        return guess, trace

    previous_cost = best_cost
    for j in range(1, params.max_superiterations + 1):
        basis = draw_basis(params, rng)
        start = trace.n_evaluations
        res = nelder_mead(lambda c: evaluate(assemble_pulse(guess, basis, c)),
                          np.zeros(params.n_frequencies), params.simplex, f_x0=previous_cost)
        if res.fun < previous_cost:
            guess = assemble_pulse(guess, basis, res.x)
            cost = res.fun
        else:
            # no improvement: keep the guess unchanged
            cost = previous_cost
        trace.superiterations.append(SuperIteration(basis, res.x if res.fun < previous_cost
                                                    else np.zeros_like(res.x),
                                                    cost, trace.n_evaluations - start))
        if cost < params.eta_error:
            trace.stopping_reason = ERROR_THRESHOLD
            break
        if j >= params.max_superiterations:
            trace.stopping_reason = MAX_SUPERITERATIONS
            break
        if j >= 2 and (previous_cost == 0 or 1 - cost / previous_cost < params.eta_change):
            trace.stopping_reason = CHANGE_THRESHOLD
            break
        previous_cost = cost
    return guess, trace
