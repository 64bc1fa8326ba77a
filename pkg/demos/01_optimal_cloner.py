"""
Optimal universal qubit cloning
===============================

Build the N -> M cloner, read off single-clone fidelities and compare them
with the closed form and with the symmetric-projector construction.
"""

import numpy as np

from qclone.cloning_maps import asymmetric_fidelities, gm_apply, optimal_fidelity, werner_output
from qclone.qubit_core import density, partial_trace, random_ket, trace_distance

rng = np.random.default_rng(7)
psi = random_ket(2, rng)

# The cloner's fidelity does not depend on the input state.
for N, M in [(1, 2), (1, 3), (2, 3), (2, 5), (3, 6)]:
    out = gm_apply(psi, N, M)
    print(f"{N} -> {M}: F = {out.fidelity(0):.12f}   closed form {optimal_fidelity(N, M, exact=True)}")

# The same clone marginal follows from projecting psi^N (x) 1/2^(M-N) onto
# the symmetric subspace.
N, M = 2, 4
w = werner_output(density(psi), N, M)
d = trace_distance(partial_trace(w, [2] * M, [0]), gm_apply(psi, N, M).clone_marginal(0))
print(f"projector construction vs unitary cloner, trace distance {d:.2e}")

# How the wrong-clone count is distributed in the 1 -> 4 cloner.
print("P(j clones flipped), 1 -> 4:", np.round(gm_apply(psi, 1, 4).wrong_count_distribution(), 6))

# Trading quality between two asymmetric clones.
for p in (0.0, 0.3, 0.5):
    A, B = np.sqrt(1 - p), np.sqrt(p)
    print(f"asymmetric weight {p:.1f}: fidelities {np.round(asymmetric_fidelities(psi, A, B), 6)}")
