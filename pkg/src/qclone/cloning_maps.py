"""Optimal universal cloning transformations on qubit registers.

The N -> M cloner is stored compactly in the symmetric sector: the output is
``sum_j c_j |(M-j) psi, j psi_perp> (x) R_j`` with ``c_j = (-1)^j alpha_j``.
The ancilla register holds M-N qubits; ``R_j`` is the symmetric state with
M-N-j qubits in psi_perp and j in psi, so the ancillas are the anti-clones
(optimal universal NOT outputs). The (-1)^j phase makes the map linear in
the input register. ``ancilla="conjugate"`` selects the equivalent form
written with the complex-conjugated input (related by i*sigma_y on every
ancilla).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .qubit_core import (
    _frozen,
    density,
    maximally_mixed,
    normalize,
    orthogonal,
    partial_trace,
    state_fidelity,
    symmetric_projector,
    symmetric_state,
    tensor_power,
    tensor_product,
)


@dataclass(frozen=True)
class GMCoefficients:
    N: int
    M: int
    alpha: np.ndarray


def _check_nm(N: int, M: int) -> None:
    if N < 1 or M < N:
        raise ValueError(f"need 1 <= N <= M, got N={N}, M={M}")


def gm_coefficients(N: int, M: int) -> GMCoefficients:
    """Amplitudes alpha_j (j = 0..M-N) of the N -> M optimal cloner."""
    _check_nm(N, M)
    alpha = np.array([
        np.sqrt((N + 1) / (M + 1))
        * np.sqrt(factorial(M - N) * factorial(M - j) / (factorial(M - N - j) * factorial(M)))
        for j in range(M - N + 1)
    ])
    alpha.setflags(write=False)
    return GMCoefficients(N, M, alpha)


def optimal_fidelity(N: int, M: int, exact: bool = False):
    """Single-clone fidelity (NM + M + N) / (M (N + 2)) of optimal N -> M cloning."""
    _check_nm(N, M)
    f = Fraction(N * M + M + N, M * (N + 2))
    return f if exact else float(f)


def relative_frequency_fidelity(N: int, M: int) -> float:
    """sum_j ((M - j)/M) alpha_j^2, the mean fraction of clones in psi."""
    alpha = gm_coefficients(N, M).alpha
    return float(sum((M - j) / M * a**2 for j, a in enumerate(alpha)))


@dataclass(frozen=True)
class CloneOutput:
    """Output of ``gm_apply``; full vectors are expanded on demand."""

    psi: np.ndarray
    N: int
    M: int
    coefficients: np.ndarray
    ancilla: str = "orthogonal"

    @property
    def n_clones(self) -> int:
        return self.M

    @property
    def n_ancillas(self) -> int:
        return self.M - self.N

    @property
    def layout(self) -> tuple[str, ...]:
        return ("clone",) * self.M + ("ancilla",) * self.n_ancillas

    @property
    def dims(self) -> list[int]:
        return [2] * (self.M + self.n_ancillas)

    def ancilla_state(self, j: int) -> np.ndarray:
        k = self.n_ancillas
        if self.ancilla == "conjugate":
            # |(k-j) psi*, j (psi*)_perp>
            return symmetric_state(np.conj(self.psi), k, j)
        # |(k-j) psi_perp, j psi>, i.e. k-j "flips" relative to psi
        return symmetric_state(self.psi, k, k - j)

    def state(self) -> np.ndarray:
        """Full state vector over clones (x) ancillas."""
        out = sum(
            c * tensor_product(symmetric_state(self.psi, self.M, j), self.ancilla_state(j))
            for j, c in enumerate(self.coefficients)
        )
        return _frozen(out)

    def clone_register(self) -> np.ndarray:
        """Reduced density matrix of the M clones."""
        # the R_j are orthonormal, so the clone register is diagonal in the D_j
        return _frozen(sum(
            abs(c) ** 2 * density(symmetric_state(self.psi, self.M, j))
            for j, c in enumerate(self.coefficients)
        ))

    def clone_marginal(self, index: int = 0) -> np.ndarray:
        return partial_trace(self.clone_register(), [2] * self.M, [index])

    def ancilla_marginal(self, index: int = 0) -> np.ndarray:
        return partial_trace(self.state(), self.dims, [self.M + index])

    def fidelity(self, index: int = 0) -> float:
        return state_fidelity(self.clone_marginal(index), self.psi)

    def wrong_count_distribution(self) -> np.ndarray:
        """P(j clones in psi_perp) for j = 0..M-N."""
        return np.abs(self.coefficients) ** 2


def gm_apply(psi, N: int, M: int, ancilla: str = "orthogonal") -> CloneOutput:
    """Apply the N -> M optimal universal qubit cloner to N copies of psi."""
    _check_nm(N, M)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValueError(f"expected a qubit ket, got shape {psi.shape}")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError("input ket is not normalized")
    if ancilla not in ("orthogonal", "conjugate"):
        raise ValueError(f"unknown ancilla convention {ancilla!r}")
    alpha = gm_coefficients(N, M).alpha
    signs = np.array([(-1) ** j for j in range(len(alpha))])
    coeffs = _frozen(signs * alpha)
    return CloneOutput(_frozen(psi), N, M, coeffs, ancilla)


def werner_output(sigma, N: int, M: int) -> np.ndarray:
    """Normalized P+ (sigma^N (x) (1/2)^(M-N)) P+ on M qubits."""
    _check_nm(N, M)
    sigma = density(sigma)
    p = symmetric_projector(M)
    inner = tensor_product(tensor_power(sigma, N), tensor_power(maximally_mixed(2), M - N))
    rho = p @ inner @ p
    return _frozen(rho / np.trace(rho))


def _entangler(d: int) -> np.ndarray:
    if d == 2:
        return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.eye(d, dtype=complex).ravel() / np.sqrt(d)


def asymmetric_apply(psi, A: complex, B: complex) -> np.ndarray:
    """A psi_1 X_23 + B psi_2 X_13, normalized.

    X is the singlet for qubits and sum_n |nn> otherwise. Subsystems 1 and 2
    are the clones, subsystem 3 the anti-clone.
    """
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if A == 0 and B == 0:
        raise ValueError("A and B cannot both vanish")
    x = _entangler(d)
    first = np.kron(psi, x)  # psi_1 X_23
    # psi_2 X_13: build psi_1 X_23 then swap subsystems 1 and 2
    second = np.kron(psi, x).reshape(d, d, d).transpose(1, 0, 2).ravel()
    return normalize(A * first + B * second)


def asymmetric_fidelities(psi, A: complex, B: complex) -> tuple[float, float]:
    psi = np.asarray(psi, dtype=complex)
    d = psi.shape[0]
    out = asymmetric_apply(psi, A, B)
    return tuple(
        state_fidelity(partial_trace(out, [d, d, d], [k]), psi) for k in (0, 1)
    )


def not_gate_marginal(psi, s: float) -> np.ndarray:
    """s |psi_perp><psi_perp| + (1 - s) 1/2."""
    perp = orthogonal(psi)
    return _frozen(s * density(perp) + (1 - s) * maximally_mixed(2))
