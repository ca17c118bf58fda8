"""Lanczos reduction of a symmetric network to a nearest-neighbour chain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .network import ChainHamiltonian, NetworkHamiltonian, build_star


@dataclass(frozen=True, eq=False)
class LanczosResult:
    """Chain seen from the anchor plus the Krylov basis that produced it.

    ``basis`` has the Lanczos vectors as columns (m x k).
    """

    chain: ChainHamiltonian
    basis: np.ndarray
    steps_completed: int
    terminated_early: bool


@dataclass(frozen=True)
class ReductionReport:
    orthogonality: float
    tridiagonality: float
    eigenvalue_mismatch: float | None

    def ok(self, tol: float = 1e-8) -> bool:
        mismatch = self.eigenvalue_mismatch or 0.0
        return max(self.orthogonality, self.tridiagonality, mismatch) < tol


def _as_matrix(H) -> np.ndarray:
    if isinstance(H, NetworkHamiltonian):
        return H.matrix
    if isinstance(H, ChainHamiltonian):
        return H.matrix()
    return np.asarray(H, dtype=float)


def tridiagonalize(H, anchor: int = 0, max_steps: int | None = None,
                   breakdown_tol: float = 1e-12) -> LanczosResult:
    """Build the chain representation of ``H`` as seen from ``anchor``.

    Each new residual is orthogonalised against the two previous vectors and
    then, twice over, against the whole basis built so far. The iteration
    stops when a coupling falls below ``breakdown_tol * max|H|``: the Krylov
    space of the anchor is exhausted and nothing further couples back to it.
    """
    A = _as_matrix(H)
    m = A.shape[0]
    if A.ndim != 2 or A.shape[1] != m:
        raise ValueError(f"H must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError("H is not symmetric")
    if not 0 <= anchor < m:
        raise IndexError(f"anchor {anchor} out of range for {m} sites")
    k_max = m if max_steps is None else int(max_steps)
    if not 1 <= k_max <= m:
        raise ValueError(f"max_steps must be in 1..{m}, got {max_steps}")

    scale = np.abs(A).max() or 1.0
    V = np.zeros((m, k_max))
    V[anchor, 0] = 1.0
    eps = np.zeros(k_max)
    J = np.zeros(max(k_max - 1, 0))
    terminated = False
    k = 0
    while True:
        v = V[:, k]
        w = A @ v
        eps[k] = w @ v
        w -= eps[k] * v
        if k > 0:
            w -= J[k - 1] * V[:, k - 1]
        Vk = V[:, :k + 1]
        for _ in range(2):
            w -= Vk @ (Vk.T @ w)
        if k + 1 == k_max:
            break
        beta = math.sqrt(w @ w)
        if beta < breakdown_tol * scale:
            terminated = True
            break
        J[k] = beta
        V[:, k + 1] = w / beta
        k += 1

    n = k + 1
    chain = ChainHamiltonian(eps[:n], J[:n - 1])
    return LanczosResult(chain, V[:, :n].copy(), n, terminated)


def verify_reduction(H, result: LanczosResult) -> ReductionReport:
    """Residuals of a reduction: basis orthonormality, tridiagonal projection, spectrum."""
    A = _as_matrix(H)
    V = result.basis
    if V.shape[0] != A.shape[0] or V.shape[1] != len(result.chain):
        raise ValueError(
            f"basis shape {V.shape} does not match H ({A.shape[0]}) "
            f"and chain ({len(result.chain)})")
    k = V.shape[1]
    ortho = np.abs(V.T @ V - np.eye(k)).max()
    tri = np.abs(V.T @ A @ V - result.chain.matrix()).max()
    mismatch = None
    if k == A.shape[0]:
        ev_h = np.linalg.eigvalsh(A)
        ev_c = scipy.linalg.eigh_tridiagonal(result.chain.eps, result.chain.J,
                                             eigvals_only=True)
        mismatch = float(np.abs(np.sort(ev_h) - np.sort(ev_c)).max())
    return ReductionReport(float(ortho), float(tri), mismatch)


def max_safe_length(chain: ChainHamiltonian, N: int) -> float:
    """Distance before light leaking into an N-site chain returns: N*pi/(2*J_max)."""
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    if N > len(chain):
        raise ValueError(f"N={N} exceeds chain length {len(chain)}")
    j_max = chain.J[:N - 1].max()
    if j_max <= 0:
        return math.inf
    return N * math.pi / (2 * j_max)


def synthesize_bath(spec, truncate_to: int | None = None) -> ChainHamiltonian:
    """Star bath -> Lanczos chain seen from the anchor, optionally truncated."""
    chain = tridiagonalize(build_star(spec), anchor=0).chain
    if truncate_to is None:
        return chain
    if truncate_to > len(chain):
        raise ValueError(f"truncation N={truncate_to} exceeds chain length {len(chain)}")
    return chain.truncate(truncate_to)
