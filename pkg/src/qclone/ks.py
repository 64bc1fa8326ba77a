"""Single-particle Kochen-Specker test with path and spin degrees of freedom.

One particle with two paths (u, d) and spin 1/2 carries two qubits: the
path is qubit 1 and the spin is qubit 2, so Z1, X1 act on the path and Z2,
X2 on the spin. The ordered basis is (|u,z+>, |u,z->, |d,z+>, |d,z->).

Devices are pipelines of beam splitters and Stern-Gerlach splitters acting
on a map from path labels to (unnormalized) spinors. Each element is linear,
so a device is fully described by its transfer map from the 4-dimensional
input space to the detector spinors.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import sqrt
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .qubit_core import PAULI_X, PAULI_Z, _frozen

R2 = 1 / sqrt(2)
BASIS_LABELS = ("u,z+", "u,z-", "d,z+", "d,z-")
PATHS = ("u", "d")

SPIN_AXES = {
    "z": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
    "x": (np.array([1, 1], dtype=complex) * R2, np.array([1, -1], dtype=complex) * R2),
}


@dataclass(frozen=True)
class PathSpinState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (4,):
            raise ValueError("a path-spin state has four amplitudes")
        if abs(np.linalg.norm(a) - 1) > 1e-12:
            raise ValueError("path-spin state is not normalized")
        object.__setattr__(self, "amplitudes", _frozen(a))

    @classmethod
    def from_vector(cls, v) -> "PathSpinState":
        v = np.asarray(v, dtype=complex)
        return cls(v / np.linalg.norm(v))

    def spinors(self) -> dict[str, np.ndarray]:
        return {"u": self.amplitudes[:2].copy(), "d": self.amplitudes[2:].copy()}

    def expectation(self, op) -> float:
        return float(np.real(self.amplitudes.conj() @ op @ self.amplitudes))


# ---------------------------------------------------------------------------
# Observables


@dataclass(frozen=True)
class ObservableSet:
    Z1: np.ndarray
    X1: np.ndarray
    Z2: np.ndarray
    X2: np.ndarray

    @classmethod
    def standard(cls) -> "ObservableSet":
        eye = np.eye(2)
        return cls(_frozen(np.kron(PAULI_Z, eye)), _frozen(np.kron(PAULI_X, eye)),
                   _frozen(np.kron(eye, PAULI_Z)), _frozen(np.kron(eye, PAULI_X)))

    def product(self, a: str, b: str) -> np.ndarray:
        return _frozen(getattr(self, a) @ getattr(self, b))

    @property
    def Z1Z2(self):
        return self.product("Z1", "Z2")

    @property
    def X1X2(self):
        return self.product("X1", "X2")

    @property
    def Z1X2(self):
        return self.product("Z1", "X2")

    @property
    def X1Z2(self):
        return self.product("X1", "Z2")


OBS = ObservableSet.standard()


def chi(k: int, l: int) -> PathSpinState:
    """Joint eigenstate with Z1X2 = k and X1Z2 = l (phase: first nonzero entry real positive)."""
    if k not in (1, -1) or l not in (1, -1):
        raise ValueError("eigenvalues must be +1 or -1")
    eye = np.eye(4)
    proj = (eye + k * OBS.Z1X2) @ (eye + l * OBS.X1Z2) / 4
    col = proj[:, np.argmax(np.linalg.norm(proj, axis=0))]
    first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
    return PathSpinState.from_vector(col * abs(first) / first)


def commutator_norm(a, b) -> float:
    return float(np.linalg.norm(a @ b - b @ a))


# ---------------------------------------------------------------------------
# Device elements


@dataclass(frozen=True)
class BeamSplitter:
    """|in1> -> (|out1> + |out2>)/sqrt 2, |in2> -> (|out1> - |out2>)/sqrt 2."""

    in1: str
    in2: str
    out1: str
    out2: str

    def apply(self, paths: dict) -> dict:
        a = paths.pop(self.in1, np.zeros(2, dtype=complex))
        b = paths.pop(self.in2, np.zeros(2, dtype=complex))
        paths[self.out1] = (a + b) * R2
        paths[self.out2] = (a - b) * R2
        return paths


@dataclass(frozen=True)
class SternGerlach:
    """Send the axis+ spin component to ``out_plus`` and the rest to ``out_minus``."""

    path: str
    axis: str
    out_plus: str
    out_minus: str

    def apply(self, paths: dict) -> dict:
        if self.axis not in SPIN_AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        s = paths.pop(self.path, np.zeros(2, dtype=complex))
        plus, minus = SPIN_AXES[self.axis]
        paths[self.out_plus] = plus * np.vdot(plus, s)
        paths[self.out_minus] = minus * np.vdot(minus, s)
        return paths


@dataclass(frozen=True)
class Relabel:
    mapping: tuple  # ((old, new), ...)

    def apply(self, paths: dict) -> dict:
        moved = {new: paths.pop(old) for old, new in self.mapping if old in paths}
        clash = set(moved) & set(paths)
        if clash:
            raise ValueError(f"relabel target already occupied: {sorted(clash)}")
        paths.update(moved)
        return paths


@dataclass(frozen=True)
class DeviceGraph:
    name: str
    elements: tuple
    detectors: tuple  # ((label, {observable: value}), ...)

    def propagate(self, state) -> dict[str, np.ndarray]:
        paths = state.spinors() if isinstance(state, PathSpinState) else dict(state)
        for el in self.elements:
            paths = el.apply(paths)
        missing = [d for d, _ in self.detectors if d not in paths]
        if missing:
            raise ValueError(f"device {self.name} never reaches detectors {missing}")
        extra = [p for p in paths if p not in dict(self.detectors)
                 and np.linalg.norm(paths[p]) > 0]
        if extra:
            raise ValueError(f"device {self.name} leaves amplitude on unmonitored paths {extra}")
        return {d: paths[d] for d, _ in self.detectors}

    def transfer_matrix(self) -> np.ndarray:
        """Columns: detector spinors stacked, one column per input basis state."""
        cols = []
        for k in range(4):
            e = np.zeros(4, dtype=complex)
            e[k] = 1
            out = self.propagate(PathSpinState(e))
            cols.append(np.concatenate([out[d] for d, _ in self.detectors]))
        return np.array(cols).T

    def is_isometry(self, tol: float = 1e-12) -> bool:
        t = self.transfer_matrix()
        return bool(np.abs(t.conj().T @ t - np.eye(4)).max() < tol)

    def detector_projectors(self) -> dict[str, np.ndarray]:
        """POVM element on the input space for each detector."""
        t = self.transfer_matrix()
        out = {}
        for i, (d, _) in enumerate(self.detectors):
            block = t[2 * i:2 * i + 2]
            out[d] = _frozen(block.conj().T @ block)
        return out


def _tags(**kw) -> dict:
    return dict(kw)


def _pair_device(name: str, obs1: str, obs2: str, prefix: str = "", path_u="u",
                 path_d="d") -> tuple[list, list]:
    """Measure obs1 (Z1 or X1) on the path and obs2 (Z2 or X2) on the spin."""
    elements = []
    u, d = path_u, path_d
    if obs1 == "X1":
        # beam splitter: the X1 = +1 combination exits on the first output
        u2, d2 = prefix + "bs+", prefix + "bs-"
        elements.append(BeamSplitter(u, d, u2, d2))
        u, d = u2, d2
    axis = "z" if obs2 == "Z2" else "x"
    detectors = []
    for path, v1 in ((u, 1), (d, -1)):
        plus, minus = f"{prefix}{obs1}{v1:+d}{obs2}+1", f"{prefix}{obs1}{v1:+d}{obs2}-1"
        elements.append(SternGerlach(path, axis, plus, minus))
        detectors.append((plus, _tags(**{obs1: v1, obs2: 1})))
        detectors.append((minus, _tags(**{obs1: v1, obs2: -1})))
    return elements, detectors


def device(kind: str) -> DeviceGraph:
    """Separate-measurement devices: (a) Z1,Z2  (b) Z1,X2  (c) X1,Z2  (d) X1,X2."""
    pairs = {"a": ("Z1", "Z2"), "b": ("Z1", "X2"), "c": ("X1", "Z2"), "d": ("X1", "X2")}
    if kind not in pairs:
        raise ValueError(f"unknown device {kind!r}; choose from a, b, c, d")
    elements, detectors = _pair_device(kind, *pairs[kind])
    return DeviceGraph(kind, tuple(elements), tuple(detectors))


def joint_device() -> DeviceGraph:
    """Joint measurement of Z1X2 and X1Z2.

    Stage one splits the spin along x in both paths and recombines the four
    outputs into two copies of the (u, d) pair, P for Z1X2 = +1 and M for
    Z1X2 = -1, without changing any amplitude. Stage two is device (c) on
    each copy, which reads X1 and Z2; their product is X1Z2.
    """
    elements = [
        SternGerlach("u", "x", "u.x+", "u.x-"),
        SternGerlach("d", "x", "d.x+", "d.x-"),
        Relabel((("u.x+", "P.u"), ("d.x-", "P.d"), ("u.x-", "M.u"), ("d.x+", "M.d"))),
    ]
    detectors = []
    for copy, value in (("P", 1), ("M", -1)):
        el, det = _pair_device("c", "X1", "Z2", prefix=f"{copy}:", path_u=f"{copy}.u",
                               path_d=f"{copy}.d")
        elements += el
        for label, tags in det:
            tags = dict(tags)
            tags["Z1X2"] = value
            tags["X1Z2"] = tags["X1"] * tags["Z2"]
            detectors.append((label, tags))
    return DeviceGraph("joint", tuple(elements), tuple(detectors))


def prepare_psi1() -> PathSpinState:
    """Input path a with spin x+, sent through a z Stern-Gerlach into paths u and d."""
    sg = SternGerlach("a", "z", "u", "d")
    paths = sg.apply({"a": SPIN_AXES["x"][0].copy()})
    return PathSpinState(np.concatenate([paths["u"], paths["d"]]))


# ---------------------------------------------------------------------------
# Running devices


@dataclass(frozen=True)
class Histogram:
    device: str
    detectors: tuple
    tags: tuple
    probabilities: np.ndarray
    counts: np.ndarray | None = None

    def probability_where(self, predicate) -> float:
        return float(sum(p for p, t in zip(self.probabilities, self.tags) if predicate(t)))

    def rows(self):
        counts = self.counts if self.counts is not None else [None] * len(self.detectors)
        for d, t, p, c in zip(self.detectors, self.tags, self.probabilities, counts):
            yield d, t, float(p), (None if c is None else int(c))


def detector_probabilities(dev: DeviceGraph, s: PathSpinState, visibility: float = 1.0) -> np.ndarray:
    """|amplitude|^2 per detector, optionally mixed with white noise."""
    if not 0 <= visibility <= 1:
        raise ValueError("visibility must lie in [0, 1]")
    out = dev.propagate(s)
    p = np.array([np.vdot(out[d], out[d]).real for d, _ in dev.detectors])
    n = len(p)
    return visibility * p + (1 - visibility) / n


def run_device(dev: DeviceGraph, s: PathSpinState, shots: int = 0, seed=None,
               visibility: float = 1.0) -> Histogram:
    if not dev.is_isometry():
        raise ValueError(f"device {dev.name} is not an isometry")
    p = detector_probabilities(dev, s, visibility)
    counts = None
    if shots:
        if seed is None:
            raise ValueError("sampling needs an explicit seed")
        rng = np.random.default_rng(seed)
        counts = rng.multinomial(shots, p / p.sum())
    p.setflags(write=False)
    return Histogram(dev.name, tuple(d for d, _ in dev.detectors),
                     tuple(t for _, t in dev.detectors), p, counts)


def run_joint_device(s: PathSpinState, shots: int = 0, seed=None,
                     visibility: float = 1.0) -> Histogram:
    return run_device(joint_device(), s, shots, seed, visibility)


# ---------------------------------------------------------------------------
# KS sets and value assignments


@dataclass(frozen=True)
class KSSet:
    directions: tuple
    triads: tuple

    def __post_init__(self):
        for t in self.triads:
            if len(t) != 3 or len(set(t)) != 3:
                raise ValueError(f"triad {t} must hold three distinct labels")
        missing = {x for t in self.triads for x in t} - set(self.directions)
        if missing:
            raise ValueError(f"triads use undeclared directions {sorted(missing)}")

    @classmethod
    def from_triads(cls, triads: Iterable[Sequence[str]]) -> "KSSet":
        triads = tuple(tuple(str(x) for x in t) for t in triads)
        seen = {}
        for t in triads:
            for x in t:
                seen.setdefault(x, None)
        return cls(tuple(seen), triads)

    @classmethod
    def parse(cls, text: str) -> "KSSet":
        triads = []
        for n, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {n}: expected 3 labels, got {len(parts)}")
            triads.append(parts)
        return cls.from_triads(triads)

    @classmethod
    def load(cls, path) -> "KSSet":
        return cls.parse(Path(path).read_text())

    def dumps(self) -> str:
        return "".join(" ".join(t) + "\n" for t in self.triads)


@dataclass(frozen=True)
class Coloring:
    colorable: bool
    assignment: dict | None = None
    conflict: tuple = ()  # minimal uncolorable triad subset when not colorable


def _search(directions, triads):
    """First 0/1 assignment (0 tried first) giving every triad sum 2, else None."""
    index = {x: i for i, x in enumerate(directions)}
    by_var = [[] for _ in directions]
    tri_idx = [tuple(index[x] for x in t) for t in triads]
    for t in tri_idx:
        for v in t:
            by_var[v].append(t)
    values = [-1] * len(directions)

    def consistent(v):
        for t in by_var[v]:
            assigned = [values[x] for x in t if values[x] >= 0]
            s = sum(assigned)
            free = 3 - len(assigned)
            if s > 2 or s + free < 2:
                return False
        return True

    def rec(v):
        if v == len(directions):
            return True
        for val in (0, 1):
            values[v] = val
            if consistent(v) and rec(v + 1):
                return True
        values[v] = -1
        return False

    if rec(0):
        return dict(zip(directions, values))
    return None


def ks_colorable(s: KSSet) -> Coloring:
    found = _search(s.directions, s.triads)
    if found is not None:
        return Coloring(True, found)
    # deletion filter: drop every triad whose removal keeps the set uncolorable
    core = list(s.triads)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        sub = KSSet.from_triads(trial)
        if _search(sub.directions, sub.triads) is None:
            core = trial
        else:
            i += 1
    return Coloring(False, None, tuple(core))


def ks_colorable_exhaustive(s: KSSet) -> dict | None:
    """Brute-force oracle over all 2^n assignments in lexicographic order."""
    for values in product((0, 1), repeat=len(s.directions)):
        a = dict(zip(s.directions, values))
        if all(sum(a[x] for x in t) == 2 for t in s.triads):
            return a
    return None


def random_ks_set(n_directions: int, n_triads: int, rng=None) -> KSSet:
    rng = np.random.default_rng(rng)
    labels = [f"n{i}" for i in range(n_directions)]
    triads = [tuple(rng.choice(labels, 3, replace=False)) for _ in range(n_triads)]
    return KSSet.from_triads(triads)


# ---------------------------------------------------------------------------
# Finite precision


@dataclass(frozen=True)
class NCHVRunReport:
    n_triads: int
    epsilon: float
    bound: float
    testable: bool


def finite_precision_bound(n_triads: int, epsilon: float) -> NCHVRunReport:
    """Lower bound 1 - (N - 1) eps on the probability that N - 1 triads all come out right."""
    if n_triads < 2:
        raise ValueError("need at least two triads")
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    bound = min(1.0, max(0.0, 1 - (n_triads - 1) * epsilon))
    return NCHVRunReport(n_triads, epsilon, bound, epsilon < 1 / n_triads)


@dataclass(frozen=True)
class MonteCarloReport:
    n_triads: int
    epsilon: float
    trials: int
    mode: str
    p_hat: float
    sigma: float
    bound: float

    @property
    def consistent(self) -> bool:
        return self.p_hat >= self.bound - 3 * self.sigma


def nchv_montecarlo(s: KSSet, epsilon: float, trials: int, seed,
                    mode: str = "independent") -> MonteCarloReport:
    """Empirical probability that the first N - 1 triads are all reproduced correctly.

    ``independent``: each triad fails on its own with probability epsilon.
    ``adversarial``: failures occupy disjoint slices of one uniform draw,
    the least favourable correlation for the intersection.
    """
    n = len(s.triads)
    report = finite_precision_bound(n, epsilon)
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    k = n - 1
    if mode == "independent":
        fails = rng.random((trials, k)) < epsilon
        ok = ~fails.any(axis=1)
    elif mode == "adversarial":
        u = rng.random(trials)
        ok = u >= min(1.0, k * epsilon)
    else:
        raise ValueError(f"unknown failure mode {mode!r}")
    p = float(ok.mean())
    sigma = sqrt(max(p * (1 - p), 0.0) / trials)
    return MonteCarloReport(n, epsilon, trials, mode, p, sigma, report.bound)
