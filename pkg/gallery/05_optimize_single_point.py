"""
Optimizing one transformation with dCRAB
========================================

f0 = 0.9 -> 1.0 on the 4-spin ring, T = pi, threshold 1e-5. Each
super-iteration adds four random sine modes under a sin(pi t / T) window.
The final pulse is sampled next to the linear first guess.
"""
import math

import numpy as np

from isingthermo import DcrabParams, SpinChainConfig, linear_ramp, optimize

cfg = SpinChainConfig(4, 50.0)
params = DcrabParams.with_threshold(math.pi, 1e-5, seed=0)
pulse, trace = optimize(cfg, 0.9, 1.0, math.pi, params)

print(f"stopped by {trace.stopping_reason} after {len(trace.superiterations)} super-iterations, "
      f"{trace.n_evaluations} evaluations")
for j, si in enumerate(trace.superiterations, 1):
    print(f"  round {j}: best S_irr {si.best_cost:.3e} ({si.n_evaluations} evaluations)")

t = np.linspace(0, math.pi, 9)
guess = linear_ramp(0.9, 1.0, math.pi)
print("t, guess, optimized")
for ti, g, f in zip(t, guess.evaluate(t), pulse.evaluate(t)):
    print(f"{ti:.4f}, {g:.6f}, {f:.6f}")
