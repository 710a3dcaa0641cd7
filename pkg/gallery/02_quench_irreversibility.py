"""
Irreversibility of a sudden quench
==================================

A Gibbs state at f0 is left untouched while the field jumps to f0 + 0.1.
All three quantifiers stay non-negative; the table is plot-ready CSV.
"""
from isingthermo.experiments import RESULT_HEADER, ExperimentConfig, format_csv, run_quench_sweep

for n in (3, 4, 5):
    rows = run_quench_sweep(ExperimentConfig(n_spins=n, f0_step=0.25))
    print(f"# N = {n}")
    print(format_csv(rows, RESULT_HEADER[:8]), end="")
    print(f"# min S_irr = {min(r.s_irr for r in rows):.3e}\n")
