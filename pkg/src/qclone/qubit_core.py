"""Finite-dimensional state and operator algebra.

Kets are 1-D complex arrays, density matrices 2-D complex arrays. Every
function returns a fresh read-only array, so results can be shared across
sweeps without defensive copies. Multi-qubit registers are big-endian: the
first subsystem is the most significant index.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

# positivity slack for eigenvalues of numerically built density matrices
EIG_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when subsystem dimensions do not match an operand."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def ket(amplitudes) -> np.ndarray:
    """Build a normalized ket from raw amplitudes."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    if v.size == 0:
        raise DimensionError("a ket needs at least one amplitude")
    return normalize(v)


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return _frozen(v / n)


def basis(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return _frozen(v)


def density(psi) -> np.ndarray:
    """|psi><psi| for a ket; a matrix argument is returned unchanged."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 2:
        return _frozen(psi)
    return _frozen(np.outer(psi, psi.conj()))


def maximally_mixed(dim: int) -> np.ndarray:
    return _frozen(np.eye(dim) / dim)


def orthogonal(psi) -> np.ndarray:
    """Qubit orthogonal complement psi_perp = -conj(b)|0> + conj(a)|1>.

    With this phase choice (psi psi_perp - psi_perp psi)/sqrt(2) is the
    singlet for every psi.
    """
    a, b = np.asarray(psi, dtype=complex)
    return _frozen([-np.conj(b), np.conj(a)])


def tensor_product(*factors) -> np.ndarray:
    """Kronecker product, left factor most significant.

    Works for kets and density matrices alike (all operands must be the
    same kind).
    """
    if not factors:
        raise ValueError("need at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        f = np.asarray(f, dtype=complex)
        if f.ndim != out.ndim:
            raise DimensionError("cannot mix kets and density matrices")
        out = np.kron(out, f)
    return _frozen(out)


def tensor_power(a, n: int) -> np.ndarray:
    if n == 0:
        a = np.asarray(a)
        return _frozen(np.ones((1, 1)) if a.ndim == 2 else np.ones(1))
    return tensor_product(*([a] * n))


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Reduced density matrix on the subsystems listed in ``keep``.

    Parameters
    ----------
    rho : array
        Density matrix (or ket, which is converted to |psi><psi|).
    dims : sequence of int
        Subsystem dimensions; their product must equal ``rho``'s dimension.
    keep : int or iterable of int
        Subsystems to keep, in the order they should appear in the result.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"dims {dims} do not match matrix of shape {rho.shape}")
    keep = [keep] if np.isscalar(keep) else list(keep)
    n = len(dims)
    if any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise DimensionError(f"invalid subsystem selection {keep}")
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # contract each traced index with its partner
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    row = letters[:n]
    col = letters[n:]
    for i in traced:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return _frozen(reduced.reshape(d, d))


def state_fidelity(rho, psi) -> float:
    """<psi|rho|psi> for a density matrix and a pure reference state."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape[0] != psi.shape[0]:
        raise DimensionError(f"state of dim {rho.shape[0]} vs reference of dim {psi.shape[0]}")
    return float(np.real(psi.conj() @ rho @ psi))


def trace_distance(a, b) -> float:
    a = density(a)
    b = density(b)
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


def is_density_matrix(rho, tol: float = 1e-12) -> bool:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.abs(rho - rho.conj().T).max() > tol:
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -EIG_TOL)


PAULI_X = _frozen([[0, 1], [1, 0]])
PAULI_Y = _frozen([[0, -1j], [1j, 0]])
PAULI_Z = _frozen([[1, 0], [0, -1]])


def bloch_vector(rho) -> np.ndarray:
    rho = density(rho)
    m = np.array([np.real(np.trace(rho @ s)) for s in (PAULI_X, PAULI_Y, PAULI_Z)])
    m.setflags(write=False)
    return m


def from_bloch(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.linalg.norm(m) > 1 + 1e-12:
        raise ValueError(f"Bloch vector of length {np.linalg.norm(m)} exceeds 1")
    return _frozen(0.5 * (np.eye(2) + m[0] * PAULI_X + m[1] * PAULI_Y + m[2] * PAULI_Z))


def dicke_state(n: int, k: int) -> np.ndarray:
    """Normalized symmetric n-qubit state with k qubits in |1>."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    v = np.zeros(2**n, dtype=complex)
    for ones in combinations(range(n), k):
        v[sum(1 << (n - 1 - q) for q in ones)] = 1.0
    return normalize(v)


def symmetric_state(psi, n: int, k: int) -> np.ndarray:
    """Symmetric n-qubit state with n-k qubits in psi and k in psi_perp."""
    psi = np.asarray(psi, dtype=complex)
    u = np.column_stack([psi, orthogonal(psi)])
    return _frozen(tensor_power(u, n) @ dicke_state(n, k)) if n else _frozen(np.ones(1))


@lru_cache(maxsize=None)
def _sym_projector(n: int) -> np.ndarray:
    p = sum(np.outer(d, d.conj()) for d in (dicke_state(n, k) for k in range(n + 1)))
    return _frozen(p)


def symmetric_projector(n: int) -> np.ndarray:
    """Projector onto the completely symmetric subspace of n qubits (rank n+1)."""
    if n < 1:
        raise ValueError("n must be positive")
    return _sym_projector(n)


def random_ket(dim: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_unitary(dim: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return _frozen(q * (d / np.abs(d)))


def random_density(dim: int, rank: int | None = None, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return _frozen(rho / np.trace(rho))
