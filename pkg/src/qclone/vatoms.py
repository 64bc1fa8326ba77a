"""V atoms as stimulated-emission cloners.

Each V atom has one ground level g and two excited levels e1, e2 that decay
by emitting a photon of polarization 1 or 2. With every atom prepared in the
unpolarized mixture of e1 and e2 and one photon sent in, the emitted photons
form an (in general suboptimal) universal cloner. The mixed preparation is
handled as an equal-weight ensemble over the 2^N product branches.

Pairs of V atoms prepared in the antisymmetric state behave exactly like
single Lambda atoms; ``vpair_to_lambda_map`` checks this numerically.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from math import sqrt
from typing import Sequence

import numpy as np

from .fock import (
    BlockPropagator,
    FockState,
    lambda_atoms,
    rotate_mode_pair,
    vatom,
    vatom_charges,
)

DEFAULT_T_GRID = np.linspace(0.0, 3.0, 120)
MAX_ATOMS = 6
DEFAULT_MAX_STATES = 50_000
# 1 - p(1,0) - p(0,1) below this leaves the clone fidelities undefined
NO_CLONE_TOL = 1e-12


class EquivalenceViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class MixedEnsembleState:
    branches: tuple  # ((weight, FockState), ...)

    def __post_init__(self):
        w = sum(b[0] for b in self.branches)
        if any(b[0] < 0 for b in self.branches) or abs(w - 1) > 1e-12:
            raise ValueError(f"branch weights must be non-negative and sum to 1, got {w}")


def photon_state(n_modes: int, polarization=(1.0, 0.0)) -> dict[tuple, complex]:
    """One photon with the given polarization in modes (a1, a2)."""
    pol = np.asarray(polarization, dtype=complex)
    pol = pol / np.linalg.norm(pol)
    out = {}
    for r in (0, 1):
        if pol[r] != 0:
            occ = [0] * n_modes
            occ[r] = 1
            out[tuple(occ)] = pol[r]
    return out


def mixed_initial_state(N: int, polarization=(1.0, 0.0)) -> MixedEnsembleState:
    """One photon plus N atoms each in e1 or e2 with probability 1/2."""
    n = 2 + 3 * N
    branches = []
    for levels in product((1, 2), repeat=N):
        amps = {}
        for occ, a in photon_state(n, polarization).items():
            occ = list(occ)
            for k, r in enumerate(levels):
                occ[2 + 3 * k + r] = 1
            amps[tuple(occ)] = a
        branches.append((1 / 2**N, FockState(n, amps)))
    return MixedEnsembleState(tuple(branches))


@dataclass(frozen=True)
class PhotonCountTable:
    """p[(k, l)][t] for k right and l wrong photons."""

    t_grid: np.ndarray
    p: dict

    def total(self) -> np.ndarray:
        return sum(self.p.values())

    def get(self, k: int, l: int) -> np.ndarray:
        return self.p.get((k, l), np.zeros(len(self.t_grid)))

    def by_number(self) -> dict[int, np.ndarray]:
        out: dict[int, np.ndarray] = {}
        for (k, l), v in self.p.items():
            out[k + l] = out.get(k + l, 0) + v
        return out

    def mean_photons(self) -> np.ndarray:
        """Mean total photon number along the grid."""
        return sum((k + l) * v for (k, l), v in self.p.items())

    def mean_right(self) -> np.ndarray:
        return sum(k * v for (k, l), v in self.p.items())


def _branch_counts(state: FockState, h, t_grid, basis_u, max_states) -> dict:
    prop = BlockPropagator(h, state, max_states)
    out: dict[tuple, np.ndarray] = {}
    for ti, t in enumerate(t_grid):
        s = prop.state(t)
        if basis_u is not None:
            s = rotate_mode_pair(s, (0, 1), basis_u)
        for occ, a in s:
            key = (occ[0], occ[1])
            if key not in out:
                out[key] = np.zeros(len(t_grid))
            out[key][ti] += abs(a) ** 2
    return out


def simulate_vatoms(N: int, t_grid: Sequence[float] = DEFAULT_T_GRID,
                    polarization=(1.0, 0.0), allow_large: bool = False,
                    max_states: int = DEFAULT_MAX_STATES, threads: int = 1) -> PhotonCountTable:
    """Photon-count distribution p(k, l) for N V atoms and one input photon.

    "Right" photons are counted in the input polarization, "wrong" ones in
    the orthogonal polarization.
    """
    if N < 1:
        raise ValueError("need at least one atom")
    if N > 4 and not allow_large:
        raise ValueError(f"N={N} exceeds the default limit of 4; pass allow_large=True")
    if N > MAX_ATOMS:
        raise ValueError(f"N={N} exceeds the supported maximum {MAX_ATOMS}")
    t_grid = np.asarray(t_grid, dtype=float)
    pol = np.asarray(polarization, dtype=complex)
    pol = pol / np.linalg.norm(pol)
    is_axis = abs(abs(pol[0]) - 1) < 1e-15
    basis_u = None if is_axis else np.column_stack([pol, [-np.conj(pol[1]), np.conj(pol[0])]])
    h = vatom(N)
    branches = mixed_initial_state(N, pol).branches

    def run(branch):
        return _branch_counts(branch[1], h, t_grid, basis_u, max_states)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, branches))
    else:
        results = [run(b) for b in branches]
    total: dict[tuple, np.ndarray] = {}
    # reduce in branch order so the sums are bit-identical for any thread count
    for (w, _), counts in zip(branches, results):
        for key, v in counts.items():
            total[key] = total.get(key, 0) + w * v
    p = {key: total[key] for key in sorted(total)}
    for v in p.values():
        v.setflags(write=False)
    t_grid.setflags(write=False)
    return PhotonCountTable(t_grid, p)


@dataclass(frozen=True)
class FidelityCurves:
    t_grid: np.ndarray
    f_clones: np.ndarray
    f_opt: np.ndarray
    f_rand: np.ndarray


def fidelity_curves(table: PhotonCountTable, N: int | None = None) -> FidelityCurves:
    """Clone fidelity against the optimal and random references.

    Points where essentially nothing has been emitted are NaN.
    """
    denom = 1 - table.get(1, 0) - table.get(0, 1)
    defined = denom >= NO_CLONE_TOL
    safe = np.where(defined, denom, 1.0)
    f_clones = np.zeros(len(table.t_grid))
    f_opt = np.zeros(len(table.t_grid))
    f_rand = np.zeros(len(table.t_grid))
    for (k, l), v in table.p.items():
        n = k + l
        if n < 2:
            continue
        pp = v / safe
        f_clones += pp * k / n
        f_opt += pp * (2 * n + 1) / (3 * n)
        f_rand += pp * (n + 1) / (2 * n)
    out = []
    for arr in (f_clones, f_opt, f_rand):
        arr = np.where(defined, arr, np.nan)
        arr.setflags(write=False)
        out.append(arr)
    return FidelityCurves(table.t_grid, *out)


# ---------------------------------------------------------------------------
# V-atom pairs as Lambda atoms

_R2 = 1 / sqrt(2)
# per-pair local configurations as ((level of atom A), (level of atom B)),
# levels indexed g=0, e1=1, e2=2; values are overlaps with the Lambda levels
_PAIR_OVERLAPS = {
    (1, 2): ("e", _R2), (2, 1): ("e", -_R2),
    (0, 2): ("g1", _R2), (2, 0): ("g1", -_R2),
    (1, 0): ("g2", _R2), (0, 1): ("g2", -_R2),
}
_LAMBDA_OFFSET = {"e": 0, "g1": 1, "g2": 2}


@dataclass(frozen=True)
class CorrespondenceReport:
    n_pairs: int
    gamma_t: float
    leakage: float
    max_amplitude_error: float
    photon_distribution: np.ndarray  # P(total photons = 1 + l), l = 0..n_pairs
    projected: FockState


def _atom_level(occ: tuple, atom: int) -> int:
    base = 2 + 3 * atom
    levels = occ[base:base + 3]
    if sum(levels) != 1:
        raise EquivalenceViolation(f"atom {atom} left its one-excitation manifold")
    return levels.index(1)


def vpair_singlet_state(n_pairs: int, photons: int = 1) -> FockState:
    """``photons`` in a1 and every pair of V atoms in (|e1 e2> - |e2 e1>)/sqrt 2."""
    n = 2 + 6 * n_pairs
    amps = {}
    for signs in product((0, 1), repeat=n_pairs):
        occ = [0] * n
        occ[0] = photons
        amp = 1.0
        for p, flip in enumerate(signs):
            a, b = 2 * p, 2 * p + 1
            la, lb = (1, 2) if not flip else (2, 1)
            occ[2 + 3 * a + la] = 1
            occ[2 + 3 * b + lb] = 1
            amp *= _R2 if not flip else -_R2
        amps[tuple(occ)] = amp
    return FockState(n, amps)


def project_pairs_to_lambda(state: FockState, n_pairs: int) -> FockState:
    """Overlap of each V-atom pair with the antisymmetric Lambda-like levels."""
    out: dict[tuple, complex] = {}
    n = 2 + 3 * n_pairs
    for occ, a in state:
        lam = [0] * n
        lam[0], lam[1] = occ[0], occ[1]
        amp = a
        for p in range(n_pairs):
            key = (_atom_level(occ, 2 * p), _atom_level(occ, 2 * p + 1))
            if key not in _PAIR_OVERLAPS:
                amp = 0
                break
            name, ov = _PAIR_OVERLAPS[key]
            amp *= ov
            lam[2 + 3 * p + _LAMBDA_OFFSET[name]] = 1
        if amp != 0:
            k = tuple(lam)
            out[k] = out.get(k, 0) + amp
    return FockState(n, out)


def vpair_to_lambda_map(n_pairs: int, gamma_t: float, photons: int = 1,
                        tol: float = 1e-10) -> CorrespondenceReport:
    """Evolve singlet V pairs and compare with the same number of Lambda atoms."""
    if n_pairs < 1:
        raise ValueError("need at least one pair")
    v_state = vpair_singlet_state(n_pairs, photons)
    v_out = BlockPropagator(vatom(2 * n_pairs), v_state).state(gamma_t)
    projected = project_pairs_to_lambda(v_out, n_pairs)
    leakage = max(0.0, 1 - projected.norm() ** 2)
    if leakage > tol:
        raise EquivalenceViolation(f"leakage {leakage:.3g} out of the antisymmetric pair sector")
    n = 2 + 3 * n_pairs
    occ = [0] * n
    occ[0] = photons
    for p in range(n_pairs):
        occ[2 + 3 * p] = 1
    lam_out = BlockPropagator(lambda_atoms(n_pairs), FockState.basis(occ)).state(gamma_t)
    diff = projected - lam_out
    err = max((abs(a) for _, a in diff), default=0.0)
    if err > tol:
        raise EquivalenceViolation(f"pair amplitudes differ from the Lambda system by {err:.3g}")
    dist = np.zeros(n_pairs + 1)
    for o, a in lam_out:
        dist[o[0] + o[1] - photons] += abs(a) ** 2
    return CorrespondenceReport(n_pairs, gamma_t, leakage, err, dist, projected)


def charge_trajectories(N: int, t_grid, branch: int = 0) -> np.ndarray:
    """<N1>, <N2> along one branch of the mixed ensemble (rows follow t_grid)."""
    ens = mixed_initial_state(N)
    _, state = ens.branches[branch]
    prop = BlockPropagator(vatom(N), state)
    c = vatom_charges(N).charges
    rows = []
    for t in t_grid:
        s = prop.state(t)
        rows.append([s.expectation_number(w) for w in c])
    return np.array(rows)
