"""Transverse-field Ising ring as dense matrices.

The Hamiltonian, in units of the nearest-neighbour coupling, is

.. math ::
    H(f) = -f \\sum_i \\sigma^x_i + \\sum_i \\sigma^z_i \\sigma^z_{i+1}

with periodic wrap :math:`\\sigma_{N+1} \\equiv \\sigma_1`. Site 1 is the
leftmost (most significant) tensor factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

MAX_SPINS = 12
HERMITICITY_TOL = 1e-12

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass(frozen=True)
class SpinChainConfig:
    """Size and temperature of the ring.

    ``beta = 0`` stands for infinite temperature and is accepted only by the
    operations that allow it (partition function, Gibbs state).
    """

    n_spins: int
    beta: float = 50.0

    def __post_init__(self):
        if not isinstance(self.n_spins, (int, np.integer)) or isinstance(self.n_spins, bool):
            raise TypeError(f"n_spins must be an integer, got {self.n_spins!r}")
        if not 2 <= self.n_spins <= MAX_SPINS:
            raise ValueError(f"n_spins must lie in [2, {MAX_SPINS}], got {self.n_spins}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")

    @property
    def dim(self) -> int:
        return 2**self.n_spins


def embed_pauli(n_spins: int, site: int, axis: str) -> np.ndarray:
    """Return ``I x ... x sigma^axis x ... x I`` with the Pauli at ``site`` (1-based).

    ``n_spins`` may be a plain integer (including 1) or a :class:`SpinChainConfig`.
    """
    if isinstance(n_spins, SpinChainConfig):
        n_spins = n_spins.n_spins
    if n_spins < 1:
        raise ValueError("need at least one spin")
    if not 1 <= site <= n_spins:
        raise IndexError(f"site {site} outside 1..{n_spins}")
    try:
        pauli = _PAULI[axis]
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None
    factors = [np.eye(2, dtype=complex)] * n_spins
    factors[site - 1] = pauli
    return reduce(np.kron, factors)


@lru_cache(maxsize=None)
def _field_and_coupling(n_spins: int) -> tuple[np.ndarray, np.ndarray]:
    field = sum(embed_pauli(n_spins, i, "x").real for i in range(1, n_spins + 1))
    coupling = np.zeros((2**n_spins, 2**n_spins))
    for i in range(1, n_spins + 1):
        j = i % n_spins + 1
        coupling += (embed_pauli(n_spins, i, "z") @ embed_pauli(n_spins, j, "z")).real
    field.setflags(write=False)
    coupling.setflags(write=False)
    return field, coupling


def field_operator(n_spins: int) -> np.ndarray:
    """``sum_i sigma^x_i`` as a real read-only matrix."""
    return _field_and_coupling(int(n_spins))[0]


def coupling_operator(n_spins: int) -> np.ndarray:
    """``sum_i sigma^z_i sigma^z_{i+1}`` (periodic) as a real read-only matrix.

    For two spins the wrap adds the bond (2, 1) on top of (1, 2), so the
    coupling is ``2 sigma^z x sigma^z``.
    """
    return _field_and_coupling(int(n_spins))[1]


def build_hamiltonian(config: SpinChainConfig, f: float) -> np.ndarray:
    """Dense ``H(f)`` in the computational basis (real symmetric, complex dtype)."""
    if not math.isfinite(f):
        raise ValueError(f"control value must be finite, got {f}")
    field, coupling = _field_and_coupling(config.n_spins)
    return (coupling - f * field).astype(complex)


def translation_operator(n_spins: int) -> np.ndarray:
    """Permutation matrix shifting every spin one site to the right (cyclically)."""
    dim = 2**n_spins
    shift = np.zeros((dim, dim))
    for state in range(dim):
        # site i -> site i+1: rotate the bit string right by one
        low = state & 1
        shifted = (state >> 1) | (low << (n_spins - 1))
        shift[shifted, state] = 1.0
    return shift


def parity_operator(n_spins: int) -> np.ndarray:
    """``prod_i sigma^x_i``, the spin-flip symmetry of the ring."""
    return reduce(np.kron, [_PAULI["x"].real] * n_spins)


def check_hermitian(op: np.ndarray, tol: float = HERMITICITY_TOL) -> None:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {op.shape}")
    err = np.max(np.abs(op - op.conj().T)) if op.size else 0.0
    if err > tol:
        raise ValueError(f"operator is not Hermitian (max |A - A^dag| = {err:.3e})")


@dataclass(frozen=True)
class SymmetrySectors:
    """Joint eigenbasis of the cyclic shift and the spin-flip parity.

    ``basis[:, sectors[b]]`` spans sector ``b``. Both terms of ``H(f)`` are
    block diagonal in this basis for every ``f``, so the propagator is too.
    """

    basis: np.ndarray
    sectors: tuple
    field_blocks: tuple
    coupling_blocks: tuple

    @property
    def dims(self) -> tuple:
        return tuple(len(s) for s in self.sectors)


@lru_cache(maxsize=None)
def symmetry_sectors(n_spins: int) -> SymmetrySectors:
    shift = translation_operator(n_spins).astype(complex)
    parity = parity_operator(n_spins)
    # eigenvalue 8p + 2cos(k) - (2/3)sin(k) labels (k, p) uniquely for n_spins <= 12
    label_op = 8.0 * parity + (shift + shift.conj().T) + (1j / 3.0) * (shift - shift.conj().T)
    labels, basis = np.linalg.eigh(label_op)
    breaks = np.nonzero(np.diff(labels) > 1e-6)[0] + 1
    sectors = tuple(np.split(np.arange(labels.size), breaks))
    field, coupling = _field_and_coupling(n_spins)
    fb, cb = [], []
    for s in sectors:
        cols = basis[:, s]
        fb.append(cols.conj().T @ field @ cols)
        cb.append(cols.conj().T @ coupling @ cols)
    rotated = basis.conj().T @ (field + 0.5 * coupling) @ basis
    mask = np.ones_like(rotated, dtype=bool)
    for s in sectors:
        mask[np.ix_(s, s)] = False
    leak = np.max(np.abs(rotated[mask])) if mask.any() else 0.0
    if leak > 1e-10:
        raise RuntimeError(f"symmetry sectors are not invariant (leak {leak:.2e})")
    return SymmetrySectors(basis, sectors, tuple(fb), tuple(cb))
