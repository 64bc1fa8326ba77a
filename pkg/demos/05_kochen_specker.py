"""
A path-spin Kochen-Specker test
===============================

A spin-1/2 particle sent along two paths carries two qubits. Separate
devices read Z1 Z2 and X1 X2, while one joint device reads Z1 X2 and X1 Z2
together. Non-contextual values would force the two joint outcomes to be
equal; quantum mechanics makes them opposite.
"""

from pathlib import Path

from qclone import ks

psi = ks.prepare_psi1()
for kind in ("a", "d"):
    h = ks.run_device(ks.device(kind), psi)
    print(f"device {kind}:", {d: round(p, 6) for d, _, p, _ in h.rows() if p > 1e-12})

h = ks.run_joint_device(psi, shots=2000, seed=1)
print("joint device: P(Z1X2 = -X1Z2) =", h.probability_where(lambda t: t["Z1X2"] == -t["X1Z2"]))
for d, tags, p, c in h.rows():
    if p > 1e-12:
        print(f"  {d:>16}  Z1X2={tags['Z1X2']:+d}  X1Z2={tags['X1Z2']:+d}  p={p:.3f}  counts={c}")

kset = ks.KSSet.load(Path(__file__).parent / "data" / "triads_k4.txt")
res = ks.ks_colorable(kset)
print("four-direction triad set colorable:", res.colorable, " conflict:", res.conflict)

# With finite precision each triad is measured right only with probability
# 1 - eps; N - 1 triads then agree with probability at least 1 - (N - 1) eps.
for mode in ("independent", "adversarial"):
    r = ks.nchv_montecarlo(kset, 0.05, 20_000, seed=5, mode=mode)
    print(f"{mode:>11}: p_hat={r.p_hat:.4f}  bound={r.bound:.4f}  sigma={r.sigma:.4f}")
