"""
Reusing a pulse on a larger ring
================================

Pulses optimized for 4 spins at T = pi/4 are applied unchanged to 6 spins
and compared with the 6-spin quench and linear ramp.
"""
import math

from isingthermo.experiments import ExperimentConfig, run_optimize_sweep, run_transfer, with_overrides

cfg = ExperimentConfig(experiment="optimize_sweep", T=math.pi / 4, eta=1e-4,
                       f0_start=0.2, f0_stop=0.6, f0_step=0.4, max_superiterations=3)
rows4, pulses = run_optimize_sweep(cfg)
rows6 = run_transfer(with_overrides(cfg, experiment="transfer", target_n_spins=6), pulses)

print(f"{'f0':>5} {'protocol':>14} {'S_irr N=4':>11} {'S_irr N=6':>11}")
for a, b in zip(rows4, rows6):
    print(f"{a.f0:5.2f} {a.protocol:>14} {a.s_irr:11.3e} {b.s_irr:11.3e}")
