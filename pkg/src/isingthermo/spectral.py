"""Eigendecompositions, Gibbs states and free energies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin_model import check_hermitian

DEGENERACY_TOL = 1e-9


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending spectrum of a Hermitian operator.

    Attributes
    ----------
    eigenvalues : (d,) float array, ascending.
    eigenvectors : (d, d) unitary, column ``m`` belongs to ``eigenvalues[m]``.
    degeneracy_groups : tuple of index arrays partitioning ``range(d)``; each
        group holds consecutive indices whose eigenvalues chain within
        ``tol``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_groups: tuple
    tol: float = DEGENERACY_TOL

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def level_index(self) -> np.ndarray:
        """Distinct-level label ``k`` of every eigenvector (shared inside a group)."""
        labels = np.empty(self.dim, dtype=int)
        for k, group in enumerate(self.degeneracy_groups):
            labels[group] = k
        return labels

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def function(self, values) -> np.ndarray:
        """Operator ``sum_m values[m] |m><m|``."""
        V = self.eigenvectors
        return (V * np.asarray(values)) @ V.conj().T


def group_degenerate(eigenvalues, tol: float = DEGENERACY_TOL) -> tuple:
    """Split an ascending spectrum into runs whose neighbours differ by <= tol."""
    eigenvalues = np.asarray(eigenvalues)
    if eigenvalues.size == 0:
        return ()
    breaks = np.nonzero(np.diff(eigenvalues) > tol)[0] + 1
    return tuple(np.split(np.arange(eigenvalues.size), breaks))


def _canonical_basis(vectors: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Deterministic orthonormal basis of span(vectors).

    Computational basis vectors are projected onto the subspace in index
    order and Gram-Schmidt-orthonormalized, so the result depends only on
    the subspace, not on the solver's choice of basis inside it.
    """
    d, L = vectors.shape
    if L == 1:
        v = vectors[:, 0]
        return _fix_phase(v)[:, None]
    proj = vectors @ vectors.conj().T
    basis = []
    for i in range(d):
        v = proj[:, i].copy()
        for b in basis:
            v -= b * (b.conj() @ v)
        norm = np.linalg.norm(v)
        if norm > tol:
            basis.append(_fix_phase(v / norm))
            if len(basis) == L:
                break
    if len(basis) != L:
        raise EigensolverError("could not build a basis for a degenerate eigenspace")
    out = np.column_stack(basis)
    # one refinement pass against accumulated rounding
    q, _ = np.linalg.qr(out)
    return np.column_stack([_fix_phase(q[:, j]) for j in range(L)])


def _fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    nz = np.nonzero(np.abs(v) > tol)[0]
    if nz.size == 0:
        return v
    first = v[nz[0]]
    return v * (abs(first) / first)


def eigendecompose(H, tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    """Eigendecomposition with degeneracy grouping and a fixed phase convention.

    Within a degenerate group the eigenvectors are a canonical basis of the
    eigenspace; every eigenvector has its first non-negligible component
    real and positive.
    """
    H = np.asarray(H)
    check_hermitian(H)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigh failed to converge: {exc}") from exc
    groups = group_degenerate(w, tol)
    V = V.astype(complex)
    for group in groups:
        V[:, group] = _canonical_basis(V[:, group])
    return SpectralDecomposition(w, V, groups, tol)


def _as_energies(spec) -> np.ndarray:
    if isinstance(spec, SpectralDecomposition):
        return spec.eigenvalues
    return np.asarray(spec, dtype=float)


def partition_function_log(spec, beta: float) -> float:
    """``log Z = -beta E_min + log sum exp(-beta (E_m - E_min))``.

    ``spec`` may be a :class:`SpectralDecomposition` or a bare energy array.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    E = _as_energies(spec)
    e_min = E.min()
    return float(-beta * e_min + np.log(np.sum(np.exp(-beta * (E - e_min)))))


def gibbs_populations(spec, beta: float) -> np.ndarray:
    """Boltzmann weights ``p_m`` in the order of the spectrum."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    E = _as_energies(spec)
    w = np.exp(-beta * (E - E.min()))
    return w / w.sum()


def gibbs_state(spec: SpectralDecomposition, beta: float) -> np.ndarray:
    return spec.function(gibbs_populations(spec, beta))


def free_energy_difference(spec0, specT, beta: float) -> float:
    """``Delta F = (log Z_0 - log Z_T) / beta``."""
    if beta <= 0:
        raise ValueError("free energy difference is undefined at beta = 0")
    return (partition_function_log(spec0, beta) - partition_function_log(specT, beta)) / beta


def von_neumann_entropy(rho) -> float:
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def check_density_matrix(rho, trace_tol: float = 1e-10, herm_tol: float = 1e-12,
                         psd_tol: float = 1e-10) -> None:
    rho = np.asarray(rho)
    check_hermitian(rho, herm_tol)
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"trace is {tr.real:.15g}, expected 1")
    lam_min = np.linalg.eigvalsh(rho).min()
    if lam_min < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam_min:.3e}")
