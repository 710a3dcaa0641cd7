"""Nelder-Mead downhill simplex minimizer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class NelderMeadParams:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.1
    max_evaluations: int = 800
    xtol: float = 1e-7

    def __post_init__(self):
        if not self.reflection > 0:
            raise ValueError("reflection coefficient must be > 0")
        if not self.expansion > 1:
            raise ValueError("expansion coefficient must be > 1")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must lie in (0, 1)")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    n_evaluations: int
    converged: bool


def nelder_mead(cost: Callable[[np.ndarray], float], x0, params: NelderMeadParams = NelderMeadParams(),
                trace: Optional[list] = None, f_x0: Optional[float] = None) -> SimplexResult:
    """Minimize ``cost`` from ``x0``.

    The initial simplex is ``x0`` plus ``initial_step`` along each axis.
    Stops when every vertex lies within ``xtol`` (max-norm) of the best one,
    or after ``max_evaluations`` calls. Each call's value is appended to
    ``trace`` when given. A known ``f_x0`` is reused instead of re-evaluating
    the starting point.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    n_eval = 0

    def f(x):
        nonlocal n_eval
        n_eval += 1
        value = float(cost(x))
        if trace is not None:
            trace.append(value)
        return value

    simplex = np.vstack([x0, x0 + params.initial_step * np.eye(n)])
    values = np.empty(n + 1)
    if f_x0 is None:
        values[0] = f(x0)
    else:
        values[0] = f_x0
    for i in range(1, n + 1):
        if n_eval >= params.max_evaluations:
            values[i:] = np.inf
            break
        values[i] = f(simplex[i])

    a, g, c, s = params.reflection, params.expansion, params.contraction, params.shrink
    converged = False
    while True:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if np.max(np.abs(simplex[1:] - simplex[0])) <= params.xtol:
            converged = True
            break
        if n_eval >= params.max_evaluations:
            break

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + a * (centroid - worst)
        fr = f(xr)
        if fr < values[0]:
            if n_eval >= params.max_evaluations:
                simplex[-1], values[-1] = xr, fr
                continue
            xe = centroid + g * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if n_eval >= params.max_evaluations:
            if fr < values[-1]:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + c * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + c * (worst - centroid)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        # shrink towards the best vertex
        for i in range(1, n + 1):
            if n_eval >= params.max_evaluations:
                break
            simplex[i] = simplex[0] + s * (simplex[i] - simplex[0])
            values[i] = f(simplex[i])

    best = int(np.argmin(values))
    return SimplexResult(simplex[best].copy(), float(values[best]), n_eval, converged)
