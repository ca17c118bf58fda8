"""Hermitian coupled-mode Hamiltonians: star baths, couplers and chain compositions.

All quantities are in cm^-1 with the propagation distance z (cm) playing the
role of time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class StarBathSpec:
    """Discrete level coupled uniformly to an equispaced ladder of bath levels.

    The anchor sits at zero detuning; the ``num_levels`` bath levels sit at
    ``n * delta`` for ``n = -(M-1)/2 ... (M-1)/2``.
    """

    kappa: float
    delta: float
    num_levels: int

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be positive and finite, got {self.kappa}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be positive and finite, got {self.delta}")
        if int(self.num_levels) != self.num_levels:
            raise ValueError(f"num_levels must be an integer, got {self.num_levels}")
        if self.num_levels < 3 or self.num_levels % 2 == 0:
            raise ValueError(
                f"num_levels must be odd and >= 3, got {self.num_levels}")

    @property
    def gamma_ww(self) -> float:
        """Wigner-Weisskopf amplitude decay rate pi*kappa**2/delta."""
        return math.pi * self.kappa ** 2 / self.delta

    @property
    def bandwidth(self) -> float:
        return self.num_levels * self.delta

    @classmethod
    def for_rate(cls, gamma: float, delta: float, num_levels: int) -> "StarBathSpec":
        """Choose kappa so that the star decays at amplitude rate ``gamma``."""
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        return cls(math.sqrt(gamma * delta / math.pi), delta, num_levels)


@dataclass(frozen=True)
class DimerSpec:
    """Two-site coupler whose second site decays at amplitude rate ``gamma``."""

    J0: float
    gamma: float

    def __post_init__(self):
        if not self.J0 > 0:
            raise ValueError(f"J0 must be positive, got {self.J0}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")

    def h_eff(self) -> np.ndarray:
        return np.array([[0.0, self.J0], [self.J0, -1j * self.gamma]])


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NetworkHamiltonian:
    """Real symmetric coupled-mode Hamiltonian with per-site labels."""

    matrix: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        object.__setattr__(self, "matrix", m)
        labels = tuple(self.labels) or tuple(str(i) for i in range(m.shape[0]))
        if len(labels) != m.shape[0]:
            raise ValueError(
                f"{len(labels)} labels given for a {m.shape[0]}-site network")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.T))

    def is_tridiagonal(self) -> bool:
        m = self.matrix
        return not np.any(np.triu(m, 2)) and not np.any(np.tril(m, -2))

    def as_chain(self) -> "ChainHamiltonian":
        """Return the chain form of a tridiagonal network (couplings made non-negative)."""
        if not self.is_tridiagonal():
            raise ValueError("network is not tridiagonal")
        # |J| is a gauge choice: flipping site phases leaves all intensities unchanged
        return ChainHamiltonian(np.diag(self.matrix).copy(),
                                np.abs(np.diag(self.matrix, 1)))


@dataclass(frozen=True, eq=False)
class ChainHamiltonian:
    """Nearest-neighbour chain: on-site detunings ``eps`` and couplings ``J``."""

    eps: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        eps = _readonly(np.atleast_1d(self.eps))
        J = _readonly(np.atleast_1d(np.asarray(self.J, dtype=float)))
        if eps.ndim != 1 or J.ndim != 1:
            raise ValueError("eps and J must be one-dimensional")
        if len(eps) == 0:
            raise ValueError("chain must have at least one site")
        if len(J) != len(eps) - 1:
            raise ValueError(
                f"need len(J) == len(eps) - 1, got {len(J)} and {len(eps)}")
        if not (np.all(np.isfinite(eps)) and np.all(np.isfinite(J))):
            raise ValueError("chain has non-finite entries")
        if np.any(J < 0):
            raise ValueError("couplings must be non-negative")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "J", J)

    def __len__(self) -> int:
        return len(self.eps)

    def __eq__(self, other):
        if not isinstance(other, ChainHamiltonian):
            return NotImplemented
        return np.array_equal(self.eps, other.eps) and np.array_equal(self.J, other.J)

    def matrix(self) -> np.ndarray:
        return np.diag(self.eps) + np.diag(self.J, 1) + np.diag(self.J, -1)

    def truncate(self, n: int) -> "ChainHamiltonian":
        """Keep the first ``n`` sites (the ones closest to the anchor)."""
        if not 1 <= n <= len(self):
            raise ValueError(f"cannot truncate a {len(self)}-site chain to {n} sites")
        return ChainHamiltonian(self.eps[:n], self.J[:n - 1])

    def to_network(self, prefix: str = "c") -> NetworkHamiltonian:
        return NetworkHamiltonian(self.matrix(),
                                  tuple(f"{prefix}{i}" for i in range(len(self))))


def build_star(spec: StarBathSpec) -> NetworkHamiltonian:
    """Anchor (site 0) coupled with strength kappa to every level of an equispaced ladder."""
    M = spec.num_levels
    n = np.arange(M) - (M - 1) // 2
    H = np.zeros((M + 1, M + 1))
    H[0, 1:] = spec.kappa
    H[1:, 0] = spec.kappa
    H[np.arange(1, M + 1), np.arange(1, M + 1)] = n * spec.delta
    labels = ("anchor",) + tuple(f"level{k:+d}" for k in n)
    return NetworkHamiltonian(H, labels)


def build_coupler(J0: float, detunings: Sequence[float] = (0.0, 0.0)) -> NetworkHamiltonian:
    if not J0 > 0:
        raise ValueError(f"J0 must be positive, got {J0}")
    a, b = detunings
    return NetworkHamiltonian(np.array([[a, J0], [J0, b]], dtype=float), ("A", "B"))


def attach_chain_bath(subsystem: NetworkHamiltonian, lossy_site: int,
                      bath: ChainHamiltonian, truncate_to: int | None = None
                      ) -> NetworkHamiltonian:
    """Identify ``lossy_site`` with the head of ``bath`` and append the rest of the chain.

    Bath sites ``b1 .. b{N-1}`` are appended after the subsystem sites, so a
    dimer with the bath on its second site becomes a single tridiagonal chain.
    """
    m = subsystem.size
    if not 0 <= lossy_site < m:
        raise IndexError(f"lossy_site {lossy_site} out of range for {m} sites")
    N = len(bath) if truncate_to is None else truncate_to
    if not 1 <= N <= len(bath):
        raise ValueError(f"truncate_to={N} outside 1..{len(bath)}")
    head = subsystem.matrix[lossy_site, lossy_site]
    if abs(head - bath.eps[0]) > 1e-12 * max(1.0, abs(head)):
        raise ValueError(
            f"bath anchor detuning {bath.eps[0]} does not match subsystem site "
            f"detuning {head}; synthesize the bath with this site as anchor")
    chain = bath.truncate(N)
    size = m + N - 1
    H = np.zeros((size, size))
    H[:m, :m] = subsystem.matrix
    tail = np.arange(m, size)
    H[tail, tail] = chain.eps[1:]
    if N > 1:
        left = np.r_[lossy_site, tail[:-1]]
        H[left, tail] = chain.J
        H[tail, left] = chain.J
    labels = subsystem.labels + tuple(f"b{k}" for k in range(1, N))
    return NetworkHamiltonian(H, labels)
