"""
Cloning by stimulated emission in Lambda atoms and in down-conversion
=====================================================================

Photons in one polarization stimulate N inverted Lambda atoms. The state
stays on a short ladder of emission numbers, and every rung carries exactly
the optimal cloning fidelity. Down-conversion with a classical pump gives
the same post-selected states.
"""

import numpy as np

from qclone.cloning_maps import optimal_fidelity
from qclone.stimulated import (
    PDCConfig,
    StimulatedLadder,
    clone_statistics,
    evolve_ladder,
    large_m_solution,
    pdc_final_state,
    pdc_postselect,
)

m, N = 2, 3
print(f"{m} input photons, {N} excited atoms")
for gt in (0.1, 0.3, 0.6):
    s = evolve_ladder(StimulatedLadder.initial(m, N), gt)
    for l, p, f in clone_statistics(s):
        print(f"  gamma t={gt:.1f}  l={l}  p={p:.6f}  F={f:.6f}  optimal={optimal_fidelity(m, m + l):.6f}")

# Many input photons: the ladder populations become binomial.
m = 400
gt = 0.8 / np.sqrt(m)
exact = evolve_ladder(StimulatedLadder.initial(m, N), gt).probabilities
approx = large_m_solution(m, N, gt).probabilities
print("large m, exact   :", np.round(exact, 4))
print("large m, binomial:", np.round(approx, 4))

# Down-conversion seeded by one photon, post-selected on M photons in mode 1.
state = pdc_final_state(PDCConfig.from_gamma_t(1, 0.4))
for M in range(1, 5):
    ps = pdc_postselect(state, M)
    print(f"PDC 1 -> {M}: weight {ps.weight:.5f}  F {ps.fidelity():.12f}  "
          f"anti-clone F {ps.anticlone_fidelity():.6f}")
