"""
V atoms: universal but not optimal
==================================

Unpolarized V atoms give a universal cloner. At short times it is optimal;
later, reabsorption pushes it below a cloner that creates photons at
random. Pairs of V atoms in the singlet state reproduce Lambda atoms
exactly.
"""

import numpy as np

from qclone.vatoms import fidelity_curves, simulate_vatoms, vpair_to_lambda_map

grid = np.array([0.01, 0.03, 0.5, 1.0, 1.5, 2.0, 2.5])
for N in (1, 2, 4):
    c = fidelity_curves(simulate_vatoms(N, grid))
    print(f"N={N}")
    for t, fc, fo, fr in zip(grid, c.f_clones, c.f_opt, c.f_rand):
        print(f"  gamma t={t:4.2f}  f_clones={fc:.5f}  f_opt={fo:.5f}  f_rand={fr:.5f}")

# One V atom is special: both branches emit at the same rate, so every
# two-photon outcome is the 1 -> 2 optimum and f_clones stays at 5/6.

rep = vpair_to_lambda_map(2, 0.7)
print(f"two singlet V pairs vs two Lambda atoms: amplitude error {rep.max_amplitude_error:.1e}, "
      f"leakage {rep.leakage:.1e}")
print("photon-number distribution:", np.round(rep.photon_distribution, 6))
