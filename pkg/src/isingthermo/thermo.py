"""Work statistics and irreversibility quantifiers of a driven ring.

All energies are in units of the coupling; entropies are dimensionless.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import SUDDEN_QUENCH, ControlProtocol, TimeGrid, propagate
from .spectral import (
    SpectralDecomposition,
    eigendecompose,
    free_energy_difference,
    gibbs_populations,
    gibbs_state,
)
from .spin_model import SpinChainConfig, build_hamiltonian

IMAG_DISCARD_TOL = 1e-10
IMAG_ERROR_TOL = 1e-8
UNITARITY_TOL = 1e-9


@dataclass(frozen=True)
class IrreversibilityReport:
    avg_work: float
    delta_F: float
    s_irr: float
    w_fric: float
    s_qvol: float

    def as_dict(self) -> dict:
        return {
            "avg_work": self.avg_work,
            "delta_F": self.delta_F,
            "s_irr": self.s_irr,
            "w_fric": self.w_fric,
            "s_qvol": self.s_qvol,
        }


@dataclass(frozen=True)
class WorkDistribution:
    """Two-point-measurement statistics.

    ``work[m, n] = E_n(f_T) - E_m(f_0)`` with joint probability
    ``probabilities[m, n] = p_m * transitions[m, n]``.
    """

    work: np.ndarray
    probabilities: np.ndarray
    transitions: np.ndarray

    def mean(self) -> float:
        return float(np.sum(self.probabilities * self.work))

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (work value, probability) pairs."""
        return self.work.ravel(), self.probabilities.ravel()


def _real_trace(x, what: str) -> float:
    imag = abs(x.imag)
    if imag > IMAG_ERROR_TOL:
        raise ValueError(f"{what} has imaginary part {imag:.3e}; inputs are not Hermitian")
    return float(x.real)


def average_work(H0, HT, rho0, rhoT) -> float:
    """``Tr[H_T rho_T] - Tr[H_0 rho_0]``."""
    H0, HT, rho0, rhoT = (np.asarray(a) for a in (H0, HT, rho0, rhoT))
    if not (H0.shape == HT.shape == rho0.shape == rhoT.shape):
        raise ValueError("operator dimensions do not match")
    e_final = np.trace(HT @ rhoT)
    e_init = np.trace(H0 @ rho0)
    return _real_trace(e_final, "Tr[H_T rho_T]") - _real_trace(e_init, "Tr[H_0 rho_0]")


def work_distribution(spec0: SpectralDecomposition, specT: SpectralDecomposition,
                      U_total, beta: float) -> WorkDistribution:
    """TPM statistics for a Gibbs initial state of ``spec0``."""
    U = np.asarray(U_total)
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err > UNITARITY_TOL:
        raise ValueError(f"evolution operator is not unitary (deviation {err:.3e})")
    # amplitudes[n, m] = <n(f_T)| U |m(f_0)>
    amplitudes = specT.eigenvectors.conj().T @ U @ spec0.eigenvectors
    transitions = np.abs(amplitudes.T) ** 2
    p0 = gibbs_populations(spec0, beta)
    work = specT.eigenvalues[None, :] - spec0.eigenvalues[:, None]
    return WorkDistribution(work, p0[:, None] * transitions, transitions)


def characteristic_function(wd: WorkDistribution, u):
    """``G(u) = sum p_mn exp(i u w_mn)``; ``u`` may be scalar or array."""
    u_arr = np.asarray(u, dtype=float)
    w, p = wd.support()
    G = np.exp(1j * np.multiply.outer(u_arr, w)) @ p
    return complex(G) if u_arr.ndim == 0 else G


def characteristic_function_trace(H0, HT, rho0, U_total, u: float) -> complex:
    """``Tr[U e^{-iuH_0} rho_0 U^dag e^{iuH_T}]`` evaluated directly."""
    def expi(H, s):
        E, V = np.linalg.eigh(H)
        return (V * np.exp(1j * s * E)) @ V.conj().T

    U = np.asarray(U_total)
    return complex(np.trace(U @ expi(H0, -u) @ rho0 @ U.conj().T @ expi(HT, u)))


def jarzynski_average(wd: WorkDistribution, beta: float) -> float:
    """``<exp(-beta W)>`` over the TPM distribution."""
    w, p = wd.support()
    return float(np.sum(p * np.exp(-beta * w)))


def irreversible_entropy(avg_work: float, delta_F: float, beta: float) -> float:
    if beta <= 0:
        raise ValueError("beta must be positive")
    return beta * (avg_work - delta_F)


def inner_friction(specT: SpectralDecomposition, rhoT, initial_populations) -> float:
    """Final energy minus the energy of initial populations frozen on the final levels.

    Populations are paired with final levels by ascending-energy index.
    """
    P = np.asarray(initial_populations, dtype=float)
    if P.shape != specT.eigenvalues.shape:
        raise ValueError("population vector does not match the spectrum size")
    if abs(P.sum() - 1) > 1e-10:
        raise ValueError(f"initial populations sum to {P.sum():.15g}, not 1")
    HT = specT.reconstruct()
    e_final = _real_trace(np.trace(HT @ np.asarray(rhoT)), "Tr[H_T rho_T]")
    return e_final - float(specT.eigenvalues @ P)


def volume_entropy_operator(spec: SpectralDecomposition) -> np.ndarray:
    """``log(N_d + 1/2)`` where ``N_d`` counts distinct levels from the bottom."""
    return spec.function(np.log(spec.level_index + 0.5))


def _diagonal_expectation(spec: SpectralDecomposition, rho, values) -> float:
    V = spec.eigenvectors
    diag = np.einsum("im,ij,jm->m", V.conj(), np.asarray(rho), V).real
    return float(diag @ values)


def quantum_volume_entropy(spec0: SpectralDecomposition, specT: SpectralDecomposition,
                           rho0, rhoT) -> float:
    """``Tr[rho_T log(N_d(T) + 1/2)] - Tr[rho_0 log(N_d(0) + 1/2)]``.

    Degenerate eigenvectors share one level label, so the result does not
    depend on the basis chosen inside a degenerate eigenspace.
    """
    s_final = _diagonal_expectation(specT, rhoT, np.log(specT.level_index + 0.5))
    s_init = _diagonal_expectation(spec0, rho0, np.log(spec0.level_index + 0.5))
    return s_final - s_init


class DrivenRing:
    """Thermodynamics of one ``f0 -> fT`` transformation of a Gibbs-initialized ring.

    Spectra, the initial state and the free-energy difference are computed
    once; :meth:`report` then only propagates.
    """

    def __init__(self, config: SpinChainConfig, f0: float, fT: float):
        self.config = config
        self.f0 = f0
        self.fT = fT
        self.H0 = build_hamiltonian(config, f0)
        self.HT = build_hamiltonian(config, fT)
        self.spec0 = eigendecompose(self.H0)
        self.specT = eigendecompose(self.HT)
        self.populations = gibbs_populations(self.spec0, config.beta)
        self.rho0 = gibbs_state(self.spec0, config.beta)
        self.delta_F = free_energy_difference(self.spec0, self.specT, config.beta)
        self.e_init = _real_trace(np.trace(self.H0 @ self.rho0), "Tr[H_0 rho_0]")
        self.frozen_energy = float(self.specT.eigenvalues @ self.populations)
        self._s_init = _diagonal_expectation(self.spec0, self.rho0,
                                             np.log(self.spec0.level_index + 0.5))
        self._s_final_values = np.log(self.specT.level_index + 0.5)

    def final_state(self, protocol: ControlProtocol, grid: Optional[TimeGrid] = None,
                    method: str = "auto"):
        """``(rho_T, U_T)``; a sudden quench leaves the Gibbs state untouched."""
        self._check(protocol)
        if protocol.kind == SUDDEN_QUENCH and grid is None:
            E, V = self.spec0.eigenvalues, self.spec0.eigenvectors
            return self.rho0, (V * np.exp(-1j * E * protocol.T)) @ V.conj().T
        grid = TimeGrid.for_duration(protocol.T) if grid is None else grid
        result = propagate(self.config, protocol, grid, self.rho0, method)
        return result.rho_final, result.unitary

    def report_for_state(self, rhoT) -> IrreversibilityReport:
        e_final = _real_trace(np.trace(self.HT @ rhoT), "Tr[H_T rho_T]")
        work = e_final - self.e_init
        s_final = _diagonal_expectation(self.specT, rhoT, self._s_final_values)
        return IrreversibilityReport(
            avg_work=work,
            delta_F=self.delta_F,
            s_irr=irreversible_entropy(work, self.delta_F, self.config.beta),
            w_fric=e_final - self.frozen_energy,
            s_qvol=s_final - self._s_init,
        )

    def report(self, protocol: ControlProtocol, grid: Optional[TimeGrid] = None,
               method: str = "auto") -> IrreversibilityReport:
        rhoT, _ = self.final_state(protocol, grid, method)
        return self.report_for_state(rhoT)

    def work_distribution(self, protocol: ControlProtocol, grid: Optional[TimeGrid] = None,
                          method: str = "auto") -> WorkDistribution:
        _, U = self.final_state(protocol, grid, method)
        return work_distribution(self.spec0, self.specT, U, self.config.beta)

    def _check(self, protocol: ControlProtocol):
        if protocol.f0 != self.f0 or protocol.fT != self.fT:
            raise ValueError(
                f"protocol runs {protocol.f0} -> {protocol.fT}, ring prepared for {self.f0} -> {self.fT}")


def full_report(config: SpinChainConfig, protocol: ControlProtocol,
                grid: Optional[TimeGrid] = None) -> IrreversibilityReport:
    """Prepare the Gibbs state at ``f0``, drive it with ``protocol``, evaluate every quantifier."""
    return DrivenRing(config, protocol.f0, protocol.fT).report(protocol, grid)
