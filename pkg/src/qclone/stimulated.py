"""Stimulated-emission cloning with Lambda atoms and with down-conversion.

The Lambda system uses modes (a1, a2, b1, b2, c) and the coupling
``(a1 b2 - a2 b1) c^+ + h.c.``: a-modes are photons in the input (1) and
orthogonal (2) polarization, b-modes count atoms in the two ground levels
and c counts excited atoms. Starting from m photons in a1 and N excited
atoms, the dynamics closes on the ladder |F_0>, ..., |F_N>, where l is the
number of extra photons emitted, and is tridiagonal there with positive
couplings.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt

import numpy as np
from scipy.linalg import expm

from .fock import FockState
from .qubit_core import _frozen, dicke_state, tensor_product


@dataclass(frozen=True)
class StimulatedLadder:
    m: int
    N: int
    f: np.ndarray

    def __post_init__(self):
        if self.m < 0 or self.N < 1:
            raise ValueError(f"need m >= 0 and N >= 1, got m={self.m}, N={self.N}")
        f = np.asarray(self.f, dtype=complex)
        if f.shape != (self.N + 1,):
            raise ValueError(f"ladder vector must have length {self.N + 1}")
        if abs(np.linalg.norm(f) - 1) > 1e-10:
            raise ValueError("ladder coefficients are not normalized")
        object.__setattr__(self, "f", _frozen(f))

    @classmethod
    def initial(cls, m: int, N: int) -> "StimulatedLadder":
        f = np.zeros(N + 1, dtype=complex)
        f[0] = 1
        return cls(m, N, f)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.f) ** 2

    def to_fock(self) -> FockState:
        out = FockState(5)
        for l, c in enumerate(self.f):
            if c != 0:
                out = out + f_basis_state(self.m, self.N, l).scaled(c)
        return out


def f_basis_state(m: int, N: int, l: int) -> FockState:
    """|F_l>: l extra photons emitted on top of m input photons."""
    if not 0 <= l <= N:
        raise ValueError(f"need 0 <= l <= N, got l={l}, N={N}")
    if m < 0:
        raise ValueError("m must be non-negative")
    norm = sqrt(comb(m + l + 1, l))
    amps = {
        (m + l - i, i, i, l - i, N - l): (-1) ** i * sqrt(comb(m + l - i, m)) / norm
        for i in range(l + 1)
    }
    return FockState(5, amps)


def ladder_transfer_matrix(m: int, N: int) -> np.ndarray:
    """Real symmetric tridiagonal H/gamma in the |F_l> basis."""
    if m < 0 or N < 1:
        raise ValueError(f"need m >= 0 and N >= 1, got m={m}, N={N}")
    t = np.zeros((N + 1, N + 1))
    for l in range(N):
        t[l, l + 1] = t[l + 1, l] = sqrt((l + 1) * (N - l) * (m + l + 2))
    t.setflags(write=False)
    return t


def evolve_ladder(s: StimulatedLadder, gamma_t: float) -> StimulatedLadder:
    u = expm(-1j * gamma_t * ladder_transfer_matrix(s.m, s.N))
    return StimulatedLadder(s.m, s.N, u @ s.f)


def large_m_solution(m: int, N: int, gamma_t: float) -> StimulatedLadder:
    """Binomial approximation valid for m >> N."""
    if m < 1:
        raise ValueError("the large-m solution needs m >= 1")
    theta = sqrt(m) * gamma_t
    c, s = np.cos(theta), np.sin(theta)
    f = np.array([(-1j) ** l * sqrt(comb(N, l)) * c ** (N - l) * s**l for l in range(N + 1)])
    return StimulatedLadder(m, N, f)


def ladder_fidelity(m: int, l: int) -> float:
    """Fraction of the m + l output photons in the input polarization, given l emissions."""
    if m + l == 0:
        return float("nan")
    norm = comb(m + l + 1, l)
    return sum((m + l - i) / (m + l) * comb(m + l - i, m) / norm for i in range(l + 1))


def clone_statistics(s: StimulatedLadder) -> list[tuple[int, float, float]]:
    """(l, p(l), F_l) rows."""
    p = s.probabilities
    return [(l, float(p[l]), ladder_fidelity(s.m, l)) for l in range(s.N + 1)]


# ---------------------------------------------------------------------------
# Down-conversion with a classical pump; modes (V1, H1, V2, H2)

TAIL_TOL = 1e-8


@dataclass(frozen=True)
class PDCConfig:
    N: int
    Gamma: float
    cutoff: int | None = None
    tail_tolerance: float = TAIL_TOL

    def __post_init__(self):
        if not 0 < self.tail_tolerance <= TAIL_TOL:
            raise ValueError(f"tail_tolerance must lie in (0, {TAIL_TOL:g}]")
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if not 0 <= self.Gamma < 1:
            raise ValueError(f"Gamma must lie in [0, 1), got {self.Gamma}")
        if self.cutoff is not None and self.cutoff < 0:
            raise ValueError("cutoff must be non-negative")

    @classmethod
    def from_gamma_t(cls, N: int, gamma_t: float, cutoff: int | None = None,
                     tail_tolerance: float = TAIL_TOL) -> "PDCConfig":
        return cls(N, float(np.tanh(gamma_t)), cutoff, tail_tolerance)


def _stimulated_weights(N: int, g2: float, kmax: int) -> np.ndarray:
    return np.array([comb(k + N, N) * g2**k for k in range(kmax + 1)])


def _tail(N: int, g2: float, kmax: int) -> tuple[float, float]:
    # relative weight left out of each pair ladder; exact sums are
    # (1-g2)^-(N+1) and (1-g2)^-1
    w = _stimulated_weights(N, g2, kmax).sum()
    v = sum(g2**k for k in range(kmax + 1))
    return 1 - w * (1 - g2) ** (N + 1), 1 - v * (1 - g2)


def auto_cutoff(N: int, Gamma: float, tail: float = TAIL_TOL) -> int:
    g2 = Gamma**2
    k = 0
    while max(_tail(N, g2, k)) >= tail:
        k += 1
        if k > 100_000:
            raise ValueError(f"no cutoff reaches tail {tail:g} for Gamma={Gamma}")
    return k


def pdc_final_state(c: PDCConfig) -> FockState:
    """Disentangled-form output, truncated and renormalized."""
    g2 = c.Gamma**2
    tol = c.tail_tolerance
    kmax = auto_cutoff(c.N, c.Gamma, tol) if c.cutoff is None else c.cutoff
    tail = max(_tail(c.N, g2, kmax))
    if tail >= tol:
        raise ValueError(
            f"cutoff {kmax} leaves tail probability {tail:.3g} >= {tol:g}; "
            f"need at least {auto_cutoff(c.N, c.Gamma, tol)}")
    G = c.Gamma
    first = {k: (-1j * G) ** k * sqrt(comb(k + c.N, c.N)) for k in range(kmax + 1)}
    second = {l: (1j * G) ** l for l in range(kmax + 1)}
    amps = {(k + c.N, l, l, k): a * b for k, a in first.items() for l, b in second.items()}
    return FockState(4, amps).normalized()


@dataclass(frozen=True)
class PostSelected:
    """M photons found in mode 1 out of a pump seeded by N photons."""

    N: int
    M: int
    weight: float  # probability of the sector before renormalization
    amplitudes: np.ndarray  # over l = number of H photons in mode 1

    def fock(self) -> FockState:
        M, N = self.M, self.N
        return FockState(4, {(M - l, l, l, M - N - l): a for l, a in enumerate(self.amplitudes)})

    def fidelity(self) -> float:
        """Mean fraction of mode-1 photons in the seed polarization V."""
        p = np.abs(self.amplitudes) ** 2
        return float(sum(pl * (self.M - l) / self.M for l, pl in enumerate(p)))

    def anticlone_fidelity(self) -> float:
        """Mean fraction of mode-2 photons in H (orthogonal to the seed)."""
        k = self.M - self.N
        if k == 0:
            return float("nan")
        p = np.abs(self.amplitudes) ** 2
        return float(sum(pl * (k - l) / k for l, pl in enumerate(p)))

    def to_qubits(self) -> np.ndarray:
        """Qubit vector: M clone qubits then M-N anti-clone qubits, V=|0>, H=|1>."""
        return fock_modes_to_qubits(self.fock(), [(0, 1), (2, 3)])


def pdc_postselect(state: FockState, M: int) -> PostSelected | None:
    """Keep the component with M photons in mode 1; ``None`` if it has no weight."""
    if state.n_modes != 4:
        raise ValueError("expected a 4-mode (V1, H1, V2, H2) state")
    sector = {occ: a for occ, a in state if occ[0] + occ[1] == M}
    if not sector:
        return None
    n_seed = {occ[0] - occ[3] for occ in sector}
    if len(n_seed) != 1:
        raise ValueError("state does not have a fixed seed photon number")
    N = n_seed.pop()
    if M < N:
        raise ValueError(f"need M >= N, got M={M}, N={N}")
    amps = np.zeros(M - N + 1, dtype=complex)
    for (v1, h1, v2, h2), a in sector.items():
        if h1 != v2:
            raise ValueError("state is not of the pair-conserving form")
        amps[h1] = a
    weight = float(np.sum(np.abs(amps) ** 2))
    if weight == 0:
        return None
    return PostSelected(N, M, weight, _frozen(amps / sqrt(weight)))


def fock_modes_to_qubits(state: FockState, mode_pairs) -> np.ndarray:
    """Map a state of polarization mode pairs to symmetric qubit registers.

    Each pair (i, j) holding n_i + n_j = n photons becomes n qubits, with
    |n_i, n_j> sent to the Dicke state with n_j ones. All configurations must
    have the same photon number in every pair.
    """
    out = None
    sizes = None
    for occ, a in state:
        ns = tuple(occ[i] + occ[j] for i, j in mode_pairs)
        if sizes is None:
            sizes = ns
        elif ns != sizes:
            raise ValueError("photon number per mode pair is not fixed")
        v = a * tensor_product(*[dicke_state(occ[i] + occ[j], occ[j]) for i, j in mode_pairs])
        out = v if out is None else out + v
    if out is None:
        raise ValueError("empty state")
    return _frozen(out)
