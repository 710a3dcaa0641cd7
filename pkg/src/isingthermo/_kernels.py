"""Compiled inner loop of the piecewise-constant propagator."""
import numba
import numpy as np


@numba.njit(cache=True)
def block_propagators(field, coupling, dims, controls, dt, order):
    """Ordered product of ``exp(-i dt (coupling - f field))`` over ``controls``.

    ``field`` and ``coupling`` are zero-padded ``(n_blocks, d, d)`` stacks; each
    step exponential is a Horner-evaluated Taylor polynomial of degree
    ``order`` (caller guarantees truncation below rounding).
    """
    n_blocks, dmax, _ = field.shape
    out = np.zeros((n_blocks, dmax, dmax), np.complex128)
    gen = np.zeros((dmax, dmax), np.complex128)
    step = np.zeros((dmax, dmax), np.complex128)
    tmp = np.zeros((dmax, dmax), np.complex128)
    for b in range(n_blocks):
        d = dims[b]
        acc_u = np.zeros((d, d), np.complex128)
        for i in range(d):
            acc_u[i, i] = 1.0
        for s in range(controls.shape[0]):
            f = controls[s]
            for i in range(d):
                for j in range(d):
                    gen[i, j] = -1j * dt * (coupling[b, i, j] - f * field[b, i, j])
            for i in range(d):
                for j in range(d):
                    step[i, j] = gen[i, j] / order
                step[i, i] += 1.0
            for k in range(order - 1, 0, -1):
                for i in range(d):
                    for j in range(d):
                        acc = 0j
                        for l in range(d):
                            acc += gen[i, l] * step[l, j]
                        tmp[i, j] = acc / k
                for i in range(d):
                    for j in range(d):
                        step[i, j] = tmp[i, j]
                    step[i, i] += 1.0
            for i in range(d):
                for j in range(d):
                    acc = 0j
                    for l in range(d):
                        acc += step[i, l] * acc_u[l, j]
                    tmp[i, j] = acc
            for i in range(d):
                for j in range(d):
                    acc_u[i, j] = tmp[i, j]
        out[b, :d, :d] = acc_u
    return out
