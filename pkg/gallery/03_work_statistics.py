"""
Work statistics and the Jarzynski equality
==========================================

Two-point-measurement work values and probabilities for a linear ramp,
the characteristic function G(u), and the check <exp(-beta W)> = exp(-beta dF).
"""
import math

import numpy as np

from isingthermo import DrivenRing, SpinChainConfig, TimeGrid, linear_ramp
from isingthermo.thermo import characteristic_function, jarzynski_average

beta = 2.0
ring = DrivenRing(SpinChainConfig(3, beta), 0.6, 1.1)
wd = ring.work_distribution(linear_ramp(0.6, 1.1, 1.0), TimeGrid(1.0, 1000))

w, p = wd.support()
keep = p > 1e-6
order = np.argsort(w[keep])
print("   W        P(W)")
for wi, pi in zip(w[keep][order], p[keep][order]):
    print(f"{wi:8.4f}  {pi:.6f}")

print(f"<W> = {wd.mean():.10f}")
print(f"<exp(-beta W)> = {jarzynski_average(wd, beta):.12f}")
print(f"exp(-beta dF)  = {math.exp(-beta * ring.delta_F):.12f}")

eps = 1e-6
dG = (characteristic_function(wd, eps) - characteristic_function(wd, -eps)) / (2 * eps)
print(f"G'(0) / i = {dG.imag:.10f}")
