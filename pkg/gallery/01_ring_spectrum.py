"""
Spectrum of the transverse-field Ising ring
===========================================

The ring H(f) = -f sum_i X_i + sum_i Z_i Z_{i+1} with periodic wrap.
We print the lowest levels against f and locate the first crossing of
the 4-spin ring, where a doublet meets a singlet at f = 2/sqrt(3).
"""
import numpy as np

from isingthermo import SpinChainConfig, build_hamiltonian, eigendecompose
from isingthermo.spin_model import symmetry_sectors

cfg = SpinChainConfig(4)

# Translation x spin-flip sectors block-diagonalize H for every f at once.
print("sector sizes:", symmetry_sectors(cfg.n_spins).dims)

print(f"{'f':>6} " + " ".join(f"E{k:<8d}" for k in range(6)))
for f in np.linspace(0.0, 2.0, 11):
    E = eigendecompose(build_hamiltonian(cfg, f)).eigenvalues
    print(f"{f:6.2f} " + " ".join(f"{e:9.4f}" for e in E[:6]))

# Degeneracy structure on either side of the crossing.
for f in (1.10, 2 / np.sqrt(3), 1.20):
    spec = eigendecompose(build_hamiltonian(cfg, f))
    sizes = [len(g) for g in spec.degeneracy_groups[:4]]
    print(f"f = {f:.4f}: lowest degeneracy groups {sizes}")
