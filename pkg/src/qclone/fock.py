"""Sparse multimode bosonic Fock-space engine.

States are sparse maps from occupation tuples to amplitudes. Hamiltonians
are sums of monomials in ladder operators; two- and three-level atoms are
encoded as one-excitation groups of modes (each level is a mode that holds
at most one quantum), so atomic raising/lowering becomes ``create(level_a)
annihilate(level_b)`` and never needs a projector as long as the initial
state has exactly one excitation per atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, sqrt
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import eigh

# amplitudes below this are dropped after each Taylor step
PRUNE_TOL = 1e-14


class ConvergenceError(RuntimeError):
    pass


class ChargeViolation(RuntimeError):
    pass


class ResourceError(RuntimeError):
    pass


class FockState:
    """Immutable sparse Fock-space vector."""

    __slots__ = ("n_modes", "_amps")

    def __init__(self, n_modes: int, amplitudes: Mapping[tuple, complex] | None = None):
        if n_modes < 1:
            raise ValueError("need at least one mode")
        amps = {}
        for occ, a in (amplitudes or {}).items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != n_modes:
                raise ValueError(f"occupation {occ} does not have {n_modes} modes")
            if min(occ) < 0:
                raise ValueError(f"negative occupation in {occ}")
            if a != 0:
                amps[occ] = amps.get(occ, 0) + complex(a)
        self.n_modes = n_modes
        self._amps = MappingProxyType(amps)

    @classmethod
    def basis(cls, occupation: Sequence[int]) -> "FockState":
        return cls(len(occupation), {tuple(occupation): 1.0})

    @property
    def amplitudes(self) -> Mapping[tuple, complex]:
        return self._amps

    def __getitem__(self, occ) -> complex:
        return self._amps.get(tuple(occ), 0j)

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(self._amps.items())

    def __repr__(self) -> str:
        terms = sorted(self._amps.items(), key=lambda kv: -abs(kv[1]))[:6]
        body = " + ".join(f"({a:.4g})|{','.join(map(str, occ))}>" for occ, a in terms)
        more = " + ..." if len(self._amps) > 6 else ""
        return f"FockState({body}{more})"

    def norm(self) -> float:
        return sqrt(sum(abs(a) ** 2 for a in self._amps.values()))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.scaled(1 / n)

    def scaled(self, c: complex) -> "FockState":
        return FockState(self.n_modes, {k: c * a for k, a in self._amps.items()})

    def __add__(self, other: "FockState") -> "FockState":
        _same_modes(self, other)
        out = dict(self._amps)
        for k, a in other._amps.items():
            out[k] = out.get(k, 0) + a
        return FockState(self.n_modes, out)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + other.scaled(-1)

    def __mul__(self, c: complex) -> "FockState":
        return self.scaled(c)

    __rmul__ = __mul__

    def inner(self, other: "FockState") -> complex:
        """<self|other>."""
        _same_modes(self, other)
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        total = sum(np.conj(self[k]) * other[k] for k in small._amps if k in big._amps)
        return complex(total)

    def pruned(self, tol: float = PRUNE_TOL) -> "FockState":
        return FockState(self.n_modes, {k: a for k, a in self._amps.items() if abs(a) >= tol})

    def probabilities(self) -> dict[tuple, float]:
        return {k: abs(a) ** 2 for k, a in self._amps.items()}

    def expectation_number(self, weights: Sequence[int]) -> float:
        """<sum_i w_i n_i>, assuming a normalized state."""
        return float(sum(abs(a) ** 2 * sum(w * n for w, n in zip(weights, occ))
                         for occ, a in self._amps.items()))

    def to_vector(self, basis: Sequence[tuple]) -> np.ndarray:
        index = {occ: i for i, occ in enumerate(basis)}
        v = np.zeros(len(basis), dtype=complex)
        for occ, a in self._amps.items():
            if occ not in index:
                raise KeyError(f"occupation {occ} is not in the basis")
            v[index[occ]] = a
        return v

    @classmethod
    def from_vector(cls, n_modes: int, basis: Sequence[tuple], vec) -> "FockState":
        return cls(n_modes, {occ: a for occ, a in zip(basis, vec) if a != 0})


def _same_modes(a: FockState, b: FockState) -> None:
    if a.n_modes != b.n_modes:
        raise ValueError(f"mode count mismatch: {a.n_modes} vs {b.n_modes}")


# A ladder word is a tuple of (mode, dagger) pairs written left to right as
# an operator product; the rightmost factor acts first.
Word = tuple


def create(mode: int):
    return (mode, True)


def annihilate(mode: int):
    return (mode, False)


@dataclass(frozen=True)
class HamiltonianSpec:
    n_modes: int
    terms: tuple  # ((coefficient, word), ...)
    hermitize: bool = True
    mode_names: tuple = field(default=())

    def expanded_terms(self) -> list[tuple[complex, Word]]:
        out = [(complex(c), tuple(w)) for c, w in self.terms]
        if self.hermitize:
            out += [(complex(np.conj(c)), adjoint_word(w)) for c, w in self.terms]
        return out

    def scaled(self, factor: complex) -> "HamiltonianSpec":
        return HamiltonianSpec(self.n_modes, tuple((factor * c, w) for c, w in self.terms),
                               self.hermitize, self.mode_names)


def adjoint_word(word: Word) -> Word:
    return tuple((m, not d) for m, d in reversed(word))


def _apply_word(word: Word, occ: tuple) -> tuple[tuple | None, float]:
    occ = list(occ)
    amp = 1.0
    for mode, dagger in reversed(word):
        n = occ[mode]
        if dagger:
            amp *= sqrt(n + 1)
            occ[mode] = n + 1
        else:
            if n == 0:
                return None, 0.0
            amp *= sqrt(n)
            occ[mode] = n - 1
    return tuple(occ), amp


def apply_operator(terms: Iterable[tuple[complex, Word]], s: FockState) -> FockState:
    out: dict[tuple, complex] = {}
    for coeff, word in terms:
        for occ, a in s:
            new, m = _apply_word(word, occ)
            if new is not None:
                out[new] = out.get(new, 0) + coeff * m * a
    return FockState(s.n_modes, out)


def apply_hamiltonian(h: HamiltonianSpec, s: FockState) -> FockState:
    """H|s> with exact sqrt(n) ladder matrix elements; not normalized."""
    if s.n_modes != h.n_modes:
        raise ValueError(f"state has {s.n_modes} modes, Hamiltonian {h.n_modes}")
    for _, word in h.terms:
        for mode, _ in word:
            if not 0 <= mode < h.n_modes:
                raise ValueError(f"ladder word references mode {mode} outside 0..{h.n_modes - 1}")
    return apply_operator(h.expanded_terms(), s)


@dataclass(frozen=True)
class ChargeSpec:
    charges: tuple  # per-charge integer weight vectors over modes

    def values(self, occ: tuple) -> tuple[int, ...]:
        return tuple(int(sum(w * n for w, n in zip(c, occ))) for c in self.charges)

    def term_change(self, word: Word) -> tuple[int, ...]:
        out = []
        for c in self.charges:
            out.append(sum(c[m] if d else -c[m] for m, d in word))
        return tuple(out)


@dataclass(frozen=True)
class Block:
    charges: tuple
    basis: tuple  # occupation tuples
    matrix: np.ndarray


def reachable_basis(h: HamiltonianSpec, s: FockState, max_states: int = 200_000,
                    max_occupation: int | None = None) -> list[tuple]:
    """Closure of the support of s under the Hamiltonian terms (BFS order)."""
    terms = h.expanded_terms()
    seen = {occ: None for occ in s.amplitudes}
    frontier = list(seen)
    while frontier:
        nxt = []
        for occ in frontier:
            for _, word in terms:
                new, m = _apply_word(word, occ)
                if new is None or new in seen:
                    continue
                if max_occupation is not None and max(new) > max_occupation:
                    continue
                seen[new] = None
                nxt.append(new)
                if len(seen) > max_states:
                    raise ResourceError(
                        f"reachable space exceeds {max_states} states; "
                        "the system may be unbounded (use taylor evolution or a cutoff)")
        frontier = nxt
    return list(seen)


def dense_matrix(h: HamiltonianSpec, basis: Sequence[tuple]) -> np.ndarray:
    index = {occ: i for i, occ in enumerate(basis)}
    mat = np.zeros((len(basis), len(basis)), dtype=complex)
    terms = h.expanded_terms()
    for j, occ in enumerate(basis):
        for coeff, word in terms:
            new, m = _apply_word(word, occ)
            if new is not None and new in index:
                mat[index[new], j] += coeff * m
    return mat


def block_decompose(h: HamiltonianSpec, s: FockState, c: ChargeSpec,
                    max_states: int = 200_000) -> list[Block]:
    """Split the space reachable from s into charge sectors with dense blocks."""
    for coeff, word in h.expanded_terms():
        delta = c.term_change(word)
        if any(delta):
            names = h.mode_names or tuple(str(i) for i in range(h.n_modes))
            pretty = " ".join(names[m] + ("^+" if d else "") for m, d in word)
            raise ChargeViolation(f"term {coeff:g} * {pretty} changes charges by {delta}")
    basis = reachable_basis(h, s, max_states)
    groups: dict[tuple, list] = {}
    for occ in basis:
        groups.setdefault(c.values(occ), []).append(occ)
    blocks = []
    for key in sorted(groups):
        sub = tuple(groups[key])
        blocks.append(Block(key, sub, dense_matrix(h, sub)))
    return blocks


@dataclass(frozen=True)
class EvolutionParams:
    gamma_t: float
    method: str = "block_diagonalize"
    taylor_tolerance: float = 1e-13
    max_states: int = 200_000

    def __post_init__(self):
        if self.taylor_tolerance <= 0:
            raise ValueError("taylor_tolerance must be positive")
        if self.method not in ("taylor", "block_diagonalize"):
            raise ValueError(f"unknown method {self.method!r}")


class BlockPropagator:
    """Eigendecomposition of H on the space reachable from a state.

    Evaluating exp(-i t H)|s> for many t costs one diagonalization.
    """

    def __init__(self, h: HamiltonianSpec, s: FockState, max_states: int = 200_000):
        self.n_modes = s.n_modes
        self.basis = reachable_basis(h, s, max_states)
        mat = dense_matrix(h, self.basis)
        self.energies, self.vectors = eigh(mat)
        self._coeffs = self.vectors.conj().T @ s.to_vector(self.basis)

    def vector(self, t: float) -> np.ndarray:
        return self.vectors @ (np.exp(-1j * t * self.energies) * self._coeffs)

    def state(self, t: float) -> FockState:
        return FockState.from_vector(self.n_modes, self.basis, self.vector(t))


def evolve(h: HamiltonianSpec, s: FockState, p: EvolutionParams) -> FockState:
    """exp(-i gamma_t H)|s>."""
    if p.gamma_t == 0:
        return s
    if p.method == "block_diagonalize":
        return BlockPropagator(h, s, p.max_states).state(p.gamma_t)
    return _taylor_evolve(h, s, p)


def _taylor_evolve(h: HamiltonianSpec, s: FockState, p: EvolutionParams,
                   step: float = 0.05, max_order: int = 60) -> FockState:
    n_steps = max(1, int(np.ceil(abs(p.gamma_t) / step)))
    dt = p.gamma_t / n_steps
    state = s
    terms = h.expanded_terms()
    for _ in range(n_steps):
        term = state
        acc = dict(state.amplitudes)
        for k in range(1, max_order + 1):
            term = apply_operator(terms, term).scaled(-1j * dt / k).pruned(PRUNE_TOL * 1e-3)
            for occ, a in term:
                acc[occ] = acc.get(occ, 0) + a
            if term.norm() < p.taylor_tolerance:
                break
        else:
            raise ConvergenceError(
                f"Taylor series did not reach tolerance {p.taylor_tolerance:g} within "
                f"{max_order} terms at step {dt:g}; use method='block_diagonalize' "
                "on a finite invariant block")
        state = FockState(s.n_modes, acc).pruned(PRUNE_TOL)
        if len(state) > p.max_states:
            raise ResourceError(f"state support exceeds {p.max_states} configurations")
    return state


# ---------------------------------------------------------------------------
# Named systems

LAMBDA_MODES = ("a1", "a2", "b1", "b2", "c")
PDC_MODES = ("V1", "H1", "V2", "H2")


def lambda_schwinger(gamma: float = 1.0) -> HamiltonianSpec:
    """gamma (a1 b2 - a2 b1) c^+ + h.c. over modes (a1, a2, b1, b2, c)."""
    a1, a2, b1, b2, c = range(5)
    terms = (
        (gamma, (create(c), annihilate(a1), annihilate(b2))),
        (-gamma, (create(c), annihilate(a2), annihilate(b1))),
    )
    return HamiltonianSpec(5, terms, True, LAMBDA_MODES)


def lambda_oscillator(gamma: float = 1.0) -> HamiltonianSpec:
    """gamma (a1 b1 + a2 b2) c^+ + h.c., the form before the b-mode rotation."""
    a1, a2, b1, b2, c = range(5)
    terms = (
        (gamma, (create(c), annihilate(a1), annihilate(b1))),
        (gamma, (create(c), annihilate(a2), annihilate(b2))),
    )
    return HamiltonianSpec(5, terms, True, LAMBDA_MODES)


def lambda_atoms(n_atoms: int, gamma: float = 1.0) -> HamiltonianSpec:
    """Individual Lambda atoms: gamma sum_k (a1 |e><g1| + a2 |e><g2|) + h.c.

    Modes: a1, a2, then (e, g1, g2) for every atom.
    """
    terms = []
    names = ["a1", "a2"]
    for k in range(n_atoms):
        e, g1, g2 = 2 + 3 * k, 3 + 3 * k, 4 + 3 * k
        names += [f"e{k}", f"g1_{k}", f"g2_{k}"]
        terms.append((gamma, (annihilate(0), create(e), annihilate(g1))))
        terms.append((gamma, (annihilate(1), create(e), annihilate(g2))))
    return HamiltonianSpec(2 + 3 * n_atoms, tuple(terms), True, tuple(names))


def vatom(n_atoms: int, gamma: float = 1.0) -> HamiltonianSpec:
    """V atoms: gamma sum_k (a1^+ |g><e1| + a2^+ |g><e2|) + h.c.

    Modes: a1, a2, then (g, e1, e2) for every atom.
    """
    terms = []
    names = ["a1", "a2"]
    for k in range(n_atoms):
        g, e1, e2 = 2 + 3 * k, 3 + 3 * k, 4 + 3 * k
        names += [f"g{k}", f"e1_{k}", f"e2_{k}"]
        terms.append((gamma, (create(0), create(g), annihilate(e1))))
        terms.append((gamma, (create(1), create(g), annihilate(e2))))
    return HamiltonianSpec(2 + 3 * n_atoms, tuple(terms), True, tuple(names))


def pdc_classical_pump(gamma: float = 1.0) -> HamiltonianSpec:
    """gamma (aV1^+ aH2^+ - aH1^+ aV2^+) + h.c. over modes (V1, H1, V2, H2)."""
    V1, H1, V2, H2 = range(4)
    terms = (
        (gamma, (create(V1), create(H2))),
        (-gamma, (create(H1), create(V2))),
    )
    return HamiltonianSpec(4, terms, True, PDC_MODES)


def jaynes_cummings(gamma: float = 1.0) -> HamiltonianSpec:
    """gamma (|e><g| a + h.c.) over modes (a, e, g)."""
    return HamiltonianSpec(3, ((gamma, (create(1), annihilate(2), annihilate(0))),), True,
                           ("a", "e", "g"))


_NAMED = {
    "lambda_schwinger": lambda_schwinger,
    "lambda_oscillator": lambda_oscillator,
    "lambda_atoms": lambda_atoms,
    "vatom": vatom,
    "pdc_classical_pump": pdc_classical_pump,
    "jaynes_cummings": jaynes_cummings,
}


def build_named_hamiltonian(name: str, **params) -> HamiltonianSpec:
    try:
        factory = _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown Hamiltonian {name!r}; known: {sorted(_NAMED)}") from None
    if name in ("vatom", "lambda_atoms"):
        params.setdefault("n_atoms", 1)
        if "N" in params:
            params["n_atoms"] = params.pop("N")
    return factory(**params)


def vatom_charges(n_atoms: int) -> ChargeSpec:
    """N1 = n_a1 + #atoms in e1, N2 = n_a2 + #atoms in e2."""
    n = 2 + 3 * n_atoms
    c1 = [0] * n
    c2 = [0] * n
    c1[0] = c2[1] = 1
    for k in range(n_atoms):
        c1[3 + 3 * k] = 1
        c2[4 + 3 * k] = 1
    return ChargeSpec((tuple(c1), tuple(c2)))


def pdc_charges() -> ChargeSpec:
    """(n_V1 - n_H2, n_H1 - n_V2)."""
    return ChargeSpec(((1, 0, 0, -1), (0, 1, -1, 0)))


def lambda_charges() -> ChargeSpec:
    """Photons plus e-excitations, and a-photons minus b-excitations."""
    return ChargeSpec(((1, 1, 0, 0, 1), (1, 1, -1, -1, 0)))


def commutator(x_terms, y_terms, s: FockState) -> FockState:
    """[X, Y]|s> for operators given as term lists."""
    return apply_operator(x_terms, apply_operator(y_terms, s)) - \
        apply_operator(y_terms, apply_operator(x_terms, s))


def mode_pair_rotation(n: int, U) -> np.ndarray:
    """Action of a polarization change of basis on n photons in two modes.

    The new modes are b_j^+ = sum_i U[i, j] a_i^+ (columns of U are the new
    polarizations written in the old basis). Returns R with
    R[s, k] = <n - s, s|_b |n - k, k>_a.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2) or np.abs(U.conj().T @ U - np.eye(2)).max() > 1e-10:
        raise ValueError("U must be a 2x2 unitary")
    # a_i^+ = sum_j conj(U[i, j]) b_j^+ ; polynomials indexed by the b2 power
    row1 = np.array([np.conj(U[0, 0]), np.conj(U[0, 1])])
    row2 = np.array([np.conj(U[1, 0]), np.conj(U[1, 1])])
    fact = [factorial(j) for j in range(n + 1)]
    R = np.zeros((n + 1, n + 1), dtype=complex)
    for k in range(n + 1):
        poly = np.ones(1, dtype=complex)
        for _ in range(n - k):
            poly = np.convolve(poly, row1)
        for _ in range(k):
            poly = np.convolve(poly, row2)
        for s in range(n + 1):
            R[s, k] = poly[s] * sqrt(fact[n - s] * fact[s] / (fact[n - k] * fact[k]))
    return R


def rotate_mode_pair(state: FockState, modes: tuple[int, int], U) -> FockState:
    """Re-express two modes of ``state`` in the polarization basis given by U."""
    i, j = modes
    cache: dict[int, np.ndarray] = {}
    out: dict[tuple, complex] = {}
    for occ, a in state:
        n = occ[i] + occ[j]
        if n not in cache:
            cache[n] = mode_pair_rotation(n, U)
        col = cache[n][:, occ[j]]
        base = list(occ)
        for s in range(n + 1):
            if col[s] != 0:
                base[i], base[j] = n - s, s
                key = tuple(base)
                out[key] = out.get(key, 0) + col[s] * a
    return FockState(state.n_modes, out)
