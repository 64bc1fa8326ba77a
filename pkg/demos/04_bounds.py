"""
Cloning bounds from linearity
=============================

No-signaling enters through linearity: a cloner acts on decompositions of
a mixed state, and any decomposition can be prepared from afar. Positivity
then fixes the best clone quality.
"""

import numpy as np

from qclone.bounds import (
    CPMap,
    RemotePrepProblem,
    bound_1toN,
    conditional_states,
    mixture_gap,
    nonlinear_witness,
    optimize_1to2,
    random_decomposition,
    remote_prepare,
    s_max_formula,
    witness_decompositions,
)
from qclone.qubit_core import density, random_density

r = optimize_1to2()
print(f"1 -> 2: t={r.params.t:.9f}  t_xy={r.params.t_xy:.1e}  eta={r.params.eta1:.9f}  F={r.F:.9f}")

for N in range(1, 9):
    s, _ = bound_1toN(N)
    print(f"1 -> {N}: shrinking factor {s:.9f}  ({s_max_formula(N)})  F = {(1 + s) / 2:.9f}")

# Remote preparation: a POVM on the purifying partner leaves any chosen
# decomposition of rho behind.
rng = np.random.default_rng(3)
rho = random_density(3, rng=rng)
mix = random_decomposition(rho, 5, rng)
p = RemotePrepProblem.build(mix, rho)
cond = conditional_states(p, remote_prepare(p))
err = max(np.abs(c - x * density(v)).max() for (x, v), c in zip(p.target_mixture, cond))
print(f"remote preparation of a 5-element decomposition: error {err:.1e}")

a, b = witness_decompositions()
print(f"gap for a random CP map: {mixture_gap(CPMap.random(2, rng=rng), a, b):.1e}")
print(f"gap for rho -> rho^2 / Tr rho^2: {mixture_gap(nonlinear_witness, a, b):.3f}")
