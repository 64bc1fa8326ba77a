"""Cloning bounds from linearity and positivity alone.

The covariant two-qubit output of a universal 1 -> 2 cloner is optimized
over its positivity region, and the 1 -> N bound is posed as a linear
program over the angular-momentum eigenvalue variables (A_j, B_j) of a
permutation-invariant output.

The second half covers remote preparation: any decomposition of a reduced
state can be prepared by measuring its purifying partner, so a map applied
to two decompositions of the same state must give the same statistics. That
gap vanishes for every linear CP map.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, sqrt
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .qubit_core import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    _frozen,
    density,
    random_unitary,
    tensor_product,
    trace_distance,
)

# ---------------------------------------------------------------------------
# Covariant 1 -> 2 output


@dataclass(frozen=True)
class CovariantTwoQubitParams:
    eta1: float
    eta2: float
    t: float
    t_xy: float

    def eigenvalue_bounds(self) -> tuple[float, float, float, float]:
        """The four eigenvalues of 4 rho."""
        e = self.eta1 + self.eta2
        r = sqrt(4 * self.t**2 + 4 * self.t_xy**2 + (self.eta1 - self.eta2) ** 2)
        return (1 + self.t + e, 1 + self.t - e, 1 - self.t + r, 1 - self.t - r)

    def feasible(self, tol: float = 1e-12) -> bool:
        return min(self.eigenvalue_bounds()) >= -tol

    def density_matrix(self, m=(0.0, 0.0, 1.0)) -> np.ndarray:
        """(1/4)(1 + eta1 m.s x 1 + eta2 1 x m.s + t s.s + t_xy m.(s ^ s))."""
        m = np.asarray(m, dtype=float)
        paulis = (PAULI_X, PAULI_Y, PAULI_Z)
        ms = sum(mi * s for mi, s in zip(m, paulis))
        eye = np.eye(2)
        rho = np.kron(eye, eye) + self.eta1 * np.kron(ms, eye) + self.eta2 * np.kron(eye, ms)
        rho = rho + self.t * sum(np.kron(s, s) for s in paulis)
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            rho = rho + self.t_xy * m[i] * (np.kron(paulis[j], paulis[k])
                                             - np.kron(paulis[k], paulis[j]))
        return _frozen(rho / 4)

    def fidelity(self) -> float:
        """Tr(rho P_m x 1) for the first clone."""
        return (1 + self.eta1) / 2

    def joint_projection(self) -> float:
        """Tr(rho P_m x P_m)."""
        return (1 + self.eta1 + self.eta2 + self.t) / 4


@dataclass(frozen=True)
class OneToTwoResult:
    params: CovariantTwoQubitParams
    F: float
    joint_projection: float


def _max_eta(t, t_xy):
    """Largest symmetric eta allowed at (t, t_xy); -inf where infeasible."""
    ok = 1 - t - 2 * np.sqrt(t**2 + t_xy**2) >= -1e-15
    return np.where(ok, (1 + t) / 2, -np.inf)


def optimize_1to2(grid_step: float = 0.01, tol: float = 1e-12) -> OneToTwoResult:
    """Maximize the symmetric clone fidelity over the covariant output.

    With eta1 = eta2 = eta the best eta at fixed (t, t_xy) is (1 + t)/2
    whenever that point is positive, so the search runs over (t, t_xy):
    a grid, then a compass search whose step halves until ``tol``. Ties are
    broken towards the smallest |t_xy|.
    """
    axis = np.arange(-1.0, 1.0 + grid_step / 2, grid_step)
    T, TXY = np.meshgrid(axis, axis, indexing="ij")
    val = _max_eta(T, TXY)
    best = np.flatnonzero(val == val.max())
    i = min(best, key=lambda b: abs(TXY.ravel()[b]))
    t, t_xy = float(T.ravel()[i]), float(TXY.ravel()[i])
    eta = float(_max_eta(t, t_xy))
    step = grid_step
    moves = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    while step > tol:
        improved = False
        for dt, dx in moves:
            nt, nx = t + dt * step, t_xy + dx * step
            ne = float(_max_eta(nt, nx))
            if ne > eta + 1e-15 or (ne >= eta - 1e-15 and abs(nx) < abs(t_xy) - 1e-15):
                t, t_xy, eta = nt, nx, ne
                improved = True
                break
        if not improved:
            step /= 2
    p = CovariantTwoQubitParams(eta, eta, t, t_xy)
    return OneToTwoResult(p, p.fidelity(), p.joint_projection())


# ---------------------------------------------------------------------------
# 1 -> N bound


def j_values(N: int) -> list[Fraction]:
    """Total-spin values j_min, ..., N/2 for N spin-1/2 particles."""
    if N < 1:
        raise ValueError("N must be positive")
    top = Fraction(N, 2)
    j = top - int(top)
    out = []
    while j <= top:
        out.append(j)
        j += 1
    return out


def multiplicity(N: int, j) -> int:
    """Number of spin-j irreducible copies in N spin-1/2 particles."""
    j = Fraction(j)
    if N < 1:
        raise ValueError("N must be positive")
    if (2 * j).denominator != 1 or (Fraction(N, 2) - j).denominator != 1:
        raise ValueError(f"j={j} has the wrong parity for N={N}")
    if j < 0 or j > Fraction(N, 2):
        raise ValueError(f"j={j} is outside 0..N/2 for N={N}")
    k = int(Fraction(N, 2) - j)
    return comb(N, k) - (comb(N, k - 1) if k >= 1 else 0)


def trace_identities(N: int) -> tuple[Fraction, Fraction]:
    """(sum d_j (2j+1), sum d_j (2j+1) j(j+1)) in exact arithmetic."""
    dim = Fraction(0)
    j2 = Fraction(0)
    for j in j_values(N):
        w = multiplicity(N, j) * (2 * j + 1)
        dim += w
        j2 += w * j * (j + 1)
    return dim, j2


@dataclass(frozen=True)
class BoundProblem:
    N: int
    j_values: tuple
    d: tuple
    A: np.ndarray
    B: np.ndarray
    s: float

    def eigenvalue(self, j_index: int, m) -> float:
        return float(self.B[j_index] + self.A[j_index] * float(m))


def lp_bound(N: int, reduced: bool = False) -> tuple[float, np.ndarray, np.ndarray]:
    """Solve the LP; returns (s, A, B).

    ``reduced`` keeps only the m = +-j positivity rows, which are the only
    ones that can bind since lambda(j, m) is linear in m.
    """
    js = j_values(N)
    n = len(js)
    # variables: A_0..A_{n-1}, B_0..B_{n-1}; A_j for j = 0 is fixed to 0
    c = np.zeros(2 * n)
    for i, j in enumerate(js):
        c[i] = -2 / (3 * N) * float(j * (j + 1))
    rows = []
    for i, j in enumerate(js):
        ms = sorted({-j, j}) if reduced else [-j + k for k in range(int(2 * j) + 1)]
        for m in ms:
            row = np.zeros(2 * n)
            row[i] = -float(m)
            row[n + i] = -1.0
            rows.append(row)
    a_eq = np.zeros((1, 2 * n))
    a_eq[0, n:] = 1.0
    bounds = [(0, 0) if j == 0 else (None, None) for j in js] + [(None, None)] * n
    res = linprog(c, A_ub=np.array(rows), b_ub=np.zeros(len(rows)), A_eq=a_eq,
                  b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"linear program failed for N={N}: {res.message}")
    return -res.fun, res.x[:n], res.x[n:]


def closed_form_bound(N: int) -> BoundProblem:
    """B_{N/2} = 1, A_{N/2} = 1/(N/2), everything else zero."""
    js = j_values(N)
    A = np.zeros(len(js))
    B = np.zeros(len(js))
    B[-1] = 1.0
    A[-1] = float(1 / js[-1])
    s = 2 / (3 * N) * float(sum(a * float(j * (j + 1)) for a, j in zip(A, js)))
    return BoundProblem(N, tuple(js), tuple(multiplicity(N, j) for j in js),
                        _frozen(A).real, _frozen(B).real, s)


def s_max_formula(N: int) -> Fraction:
    return Fraction(1, 3) + Fraction(2, 3 * N)


def bound_1toN(N: int, agree_tol: float = 1e-9) -> tuple[float, BoundProblem]:
    """Largest clone scaling factor; LP optimum cross-checked against the closed form."""
    s_lp, A, B = lp_bound(N)
    closed = closed_form_bound(N)
    if abs(s_lp - closed.s) > agree_tol:
        raise RuntimeError(f"LP optimum {s_lp} disagrees with closed form {closed.s} at N={N}")
    js = j_values(N)
    A = np.array(A)
    B = np.array(B)
    A.setflags(write=False)
    B.setflags(write=False)
    return s_lp, BoundProblem(N, tuple(js), tuple(multiplicity(N, j) for j in js), A, B, s_lp)


# angular momentum on N qubits


@lru_cache(maxsize=None)
def collective_spin(N: int) -> tuple[np.ndarray, np.ndarray]:
    """(J_z, J^2) on the 2^N-dimensional register."""
    eye = np.eye(2)
    comps = []
    for s in (PAULI_X, PAULI_Y, PAULI_Z):
        total = np.zeros((2**N, 2**N), dtype=complex)
        for q in range(N):
            ops = [eye] * N
            ops[q] = s / 2
            total = total + tensor_product(*ops)
        comps.append(total)
    jz = _frozen(comps[2])
    j2 = _frozen(sum(c @ c for c in comps))
    return jz, j2


def n_max(N: int) -> tuple[int, int]:
    """Highest independent powers of J^2 alone and of J_z J^2."""
    k = N // 2
    return (k, k - 1) if N % 2 == 0 else (k, k)


def output_operator(N: int, alpha: Sequence[float], beta: Sequence[float]) -> np.ndarray:
    """beta_0 + sum beta_n (J^2)^n + alpha_0 J_z + sum alpha_n J_z (J^2)^n."""
    jz, j2 = collective_spin(N)
    dim = 2**N
    out = np.zeros((dim, dim), dtype=complex)
    power = np.eye(dim)
    for n in range(max(len(alpha), len(beta))):
        if n < len(beta):
            out = out + beta[n] * power
        if n < len(alpha):
            out = out + alpha[n] * jz @ power
        power = power @ j2
    return _frozen(out)


def eigenvalue_formula(N: int, alpha, beta) -> list[tuple[float, int]]:
    """(lambda(j, m), degeneracy d_j) for every j, m."""
    out = []
    for j in j_values(N):
        x = float(j * (j + 1))
        b = sum(bn * x**n for n, bn in enumerate(beta))
        a = sum(an * x**n for n, an in enumerate(alpha))
        m = -j
        while m <= j:
            out.append((b + a * float(m), multiplicity(N, j)))
            m += 1
    return out


def scale_factor_formula(N: int, alpha, beta=None) -> float:
    """Bloch-vector coefficient of a single clone for the given operator."""
    s = alpha[0] * 2 ** (N - 1)
    for n in range(1, len(alpha)):
        s += 2 / (3 * N) * alpha[n] * sum(
            multiplicity(N, j) * float(j * (j + 1) * (2 * j + 1)) * float(j * (j + 1)) ** n
            for j in j_values(N))
    return float(s)


def change_of_variables(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices mapping (alpha_n) to (A_j, j > 0) and (beta_n) to (B_j)."""
    js = j_values(N)
    nb, na = n_max(N)
    VB = np.array([[multiplicity(N, j) * float(2 * j + 1) * float(j * (j + 1)) ** n
                    for n in range(nb + 1)] for j in js])
    ja = [j for j in js if j > 0]
    VA = np.array([[multiplicity(N, j) * float(2 * j + 1) * float(j * (j + 1)) ** n
                    for n in range(na + 1)] for j in ja])
    return VA, VB


# ---------------------------------------------------------------------------
# Remote preparation of decompositions


class DecompositionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RemotePrepProblem:
    rho_A: np.ndarray
    schmidt: tuple  # ((lambda_k, v_k, g_k), ...)
    target_mixture: tuple  # ((x_i, psi_i), ...)

    @classmethod
    def build(cls, target_mixture, rho_A=None, rank_tol: float = 1e-12,
              tol: float = 1e-10) -> "RemotePrepProblem":
        mix = tuple((float(x), _unit(psi)) for x, psi in target_mixture)
        if any(x < 0 for x, _ in mix):
            raise DecompositionMismatch("mixture weights must be non-negative")
        rho_mix = sum(x * density(p) for x, p in mix)
        if rho_A is None:
            rho_A = rho_mix
        rho_A = _frozen(rho_A)
        dist = trace_distance(rho_mix, rho_A)
        if dist > tol or abs(np.trace(rho_A) - 1) > tol:
            raise DecompositionMismatch(
                f"target mixture differs from rho_A by trace distance {dist:.3g}")
        lam, vec = np.linalg.eigh(rho_A)
        keep = [k for k in np.argsort(-lam) if lam[k] > rank_tol]
        r = len(keep)
        schmidt = tuple(
            (float(lam[k]), _frozen(vec[:, k]), _frozen(np.eye(r)[idx]))
            for idx, k in enumerate(keep))
        return cls(rho_A, schmidt, mix)

    @property
    def rank(self) -> int:
        return len(self.schmidt)

    def purification(self) -> np.ndarray:
        """sum_k sqrt(lambda_k) |v_k>|g_k> on A (x) B."""
        return _frozen(sum(sqrt(l) * np.kron(v, g) for l, v, g in self.schmidt))


def _unit(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    n = np.linalg.norm(psi)
    if n == 0:
        raise ValueError("zero vector in mixture")
    return _frozen(psi / n)


def remote_prepare(p: RemotePrepProblem) -> list[np.ndarray]:
    """Rank-one POVM on B whose outcome i leaves x_i |psi_i><psi_i| on A."""
    effects = []
    for x, psi in p.target_mixture:
        coeff = np.array([np.conj(sqrt(x) * np.vdot(v, psi) / sqrt(l))
                          for l, v, _ in p.schmidt])
        alpha = sum(c * g for c, (_, _, g) in zip(coeff, p.schmidt))
        effects.append(_frozen(np.outer(alpha, alpha.conj())))
    return effects


def conditional_states(p: RemotePrepProblem, effects) -> list[np.ndarray]:
    """Unnormalized A states Tr_B[(1 x E_i) |phi><phi|]."""
    phi = p.purification()
    dA = p.rho_A.shape[0]
    r = p.rank
    m = phi.reshape(dA, r)
    # Tr_B[(1 x E)|phi><phi|] = M E^T M^dagger with M[a, b] = phi_{ab}
    return [_frozen(m @ e.T @ m.conj().T) for e in effects]


def random_decomposition(rho, n: int, rng=None) -> list[tuple[float, np.ndarray]]:
    """A random n-element pure-state decomposition of rho."""
    rng = np.random.default_rng(rng)
    lam, vec = np.linalg.eigh(np.asarray(rho, dtype=complex))
    keep = [k for k in range(len(lam)) if lam[k] > 1e-12]
    r = len(keep)
    if n < r:
        raise ValueError(f"need at least rank(rho) = {r} elements")
    W = np.asarray(random_unitary(n, rng))[:, :r]
    out = []
    for i in range(n):
        w = sum(W[i, c] * sqrt(lam[k]) * vec[:, k] for c, k in enumerate(keep))
        x = float(np.vdot(w, w).real)
        if x > 1e-14:
            out.append((x, _frozen(w / sqrt(x))))
    return out


# ---------------------------------------------------------------------------
# Maps applied to decompositions


@dataclass(frozen=True)
class CPMap:
    kraus: tuple

    def __post_init__(self):
        ks = tuple(_frozen(k) for k in self.kraus)
        if not ks:
            raise ValueError("need at least one Kraus operator")
        total = sum(k.conj().T @ k for k in ks)
        if np.abs(total - np.eye(total.shape[0])).max() > 1e-10:
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)

    def __call__(self, rho) -> np.ndarray:
        rho = density(rho)
        return _frozen(sum(k @ rho @ k.conj().T for k in self.kraus))

    @classmethod
    def random(cls, d_in: int, d_out: int | None = None, n_kraus: int = 3,
               rng=None) -> "CPMap":
        d_out = d_in if d_out is None else d_out
        V = np.asarray(random_unitary(d_out * n_kraus, rng))[:, :d_in]
        return cls(tuple(V[i * d_out:(i + 1) * d_out] for i in range(n_kraus)))

    @classmethod
    def depolarizing(cls, p: float) -> "CPMap":
        ks = [sqrt(1 - 3 * p / 4) * np.eye(2)] + [sqrt(p / 4) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
        return cls(tuple(ks))

    @classmethod
    def unitary(cls, U) -> "CPMap":
        return cls((np.asarray(U, dtype=complex),))


def nonlinear_witness(rho) -> np.ndarray:
    """rho -> rho^2 / Tr rho^2, a standard non-linear reference map."""
    rho = density(rho)
    sq = rho @ rho
    return _frozen(sq / np.trace(sq))


def axis_projectors() -> list[np.ndarray]:
    """Projectors onto the +-x, +-y, +-z qubit states."""
    out = []
    for s in (PAULI_X, PAULI_Y, PAULI_Z):
        out += [_frozen((np.eye(2) + s) / 2), _frozen((np.eye(2) - s) / 2)]
    return out


def witness_decompositions():
    """Two decompositions of 1/2 told apart by the non-linear map.

    The first uses the z eigenstates; the second mixes |+x> with a mixed
    state of Bloch vector (-1/3, 0, 0). A map that is the identity on pure
    states needs a mixed element to show any gap.
    """
    a = [(0.5, np.array([1, 0], dtype=complex)), (0.5, np.array([0, 1], dtype=complex))]
    b = [(0.25, np.array([1, 1], dtype=complex) / sqrt(2)),
         (0.75, _frozen(np.eye(2) / 2 - PAULI_X / 6))]
    return a, b


def mixture_gap(g: Callable, decomp_a, decomp_b, measurements=None,
                tol: float = 1e-10) -> float:
    """Largest outcome-probability difference between two decompositions after g.

    Elements are (weight, state) with kets or density matrices.
    """
    rho_a = sum(w * density(s) for w, s in decomp_a)
    rho_b = sum(w * density(s) for w, s in decomp_b)
    if np.abs(rho_a - rho_b).max() > tol:
        raise DecompositionMismatch("decompositions describe different states "
                                    f"(trace distance {trace_distance(rho_a, rho_b):.3g})")
    out_a = sum(w * g(density(s)) for w, s in decomp_a)
    out_b = sum(w * g(density(s)) for w, s in decomp_b)
    if measurements is None:
        d = np.asarray(out_a).shape[0]
        if d != 2:
            raise ValueError("default measurements are qubit projectors; pass measurements")
        measurements = axis_projectors()
    return float(max(abs(np.trace(P @ (out_a - out_b))) for P in measurements))


def eigenbasis_projectors(d: int) -> list[np.ndarray]:
    """Computational and Fourier basis projectors on a d-level system."""
    out = [_frozen(np.outer(e, e)) for e in np.eye(d)]
    f = np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / sqrt(d)
    out += [_frozen(np.outer(f[:, k], f[:, k].conj())) for k in range(d)]
    return out
