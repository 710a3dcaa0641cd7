"""
Approaching the adiabatic limit
===============================

Slower linear ramps f = 0.8 -> 0.9 shed friction: W_fric and the quantum
volume entropy fall towards zero while S_irr keeps the population-mismatch floor.
"""
import math

from isingthermo import DrivenRing, SpinChainConfig, TimeGrid, linear_ramp

ring = DrivenRing(SpinChainConfig(4, 50.0), 0.8, 0.9)
print(f"{'T/pi':>6} {'S_irr':>10} {'W_fric':>10} {'S_Qvol':>10}")
for k in (0.25, 1, 4, 16):
    T = k * math.pi
    rep = ring.report(linear_ramp(0.8, 0.9, T), TimeGrid.for_duration(T))
    print(f"{k:6.2f} {rep.s_irr:10.3e} {rep.w_fric:10.3e} {rep.s_qvol:10.3e}")
