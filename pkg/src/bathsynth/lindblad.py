"""Lindblad master equation for the lossy dimer on a truncated two-mode Fock space.

    d rho/dz = -i (H_eff rho - rho H_eff^+) + 2 gamma a_B rho a_B^+

with H_eff = J0 (a_A^+ a_B + a_B^+ a_A) - i gamma a_B^+ a_B. The anti-Hermitian
part of H_eff supplies the anticommutator, so the map preserves the trace.
Nothing in it raises the photon number, so truncating at n_max is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .network import DimerSpec


class IntegrationError(RuntimeError):
    """Integration lost trace beyond tolerance; the step is too large."""


class FockBasis:
    """Two-mode occupation states with total photons <= n_max.

    Ordered by total photon number, then by descending occupation of mode A:
    |00>, |10>, |01>, |20>, |11>, |02>, ...
    """

    def __init__(self, n_max: int = 2):
        if n_max < 0:
            raise ValueError(f"n_max must be non-negative, got {n_max}")
        self.n_max = n_max
        self.states = [(t - b, b) for t in range(n_max + 1) for b in range(t + 1)]
        self._index = {s: i for i, s in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def __eq__(self, other):
        return isinstance(other, FockBasis) and other.n_max == self.n_max

    def index(self, state) -> int:
        return self._index[tuple(state)]

    def labels(self) -> list[str]:
        return [f"P_{a}{b}" for a, b in self.states]

    def sector(self, total: int) -> list[int]:
        return [i for i, s in enumerate(self.states) if sum(s) == total]

    def lowering(self, mode: int) -> np.ndarray:
        d = len(self)
        a = np.zeros((d, d))
        for j, s in enumerate(self.states):
            if s[mode] == 0:
                continue
            t = list(s)
            t[mode] -= 1
            a[self.index(t), j] = math.sqrt(s[mode])
        return a


@dataclass(frozen=True, eq=False)
class Generators:
    basis: FockBasis
    a_A: np.ndarray
    a_B: np.ndarray
    h_eff: np.ndarray
    jump: np.ndarray
    rate: float


def build_generators(spec: DimerSpec, basis: FockBasis | None = None) -> Generators:
    basis = basis or FockBasis(2)
    aA, aB = basis.lowering(0), basis.lowering(1)
    hop = spec.J0 * (aA.T @ aB + aB.T @ aA)
    h_eff = hop - 1j * spec.gamma * (aB.T @ aB)
    return Generators(basis, aA, aB, h_eff.astype(complex), aB.astype(complex),
                      2.0 * spec.gamma)


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    rho: np.ndarray
    z: float
    basis: FockBasis

    @classmethod
    def pure(cls, basis: FockBasis, state, z: float = 0.0) -> "FockDensityMatrix":
        d = len(basis)
        rho = np.zeros((d, d), dtype=complex)
        i = basis.index(state)
        rho[i, i] = 1.0
        return cls(rho, z, basis)

    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    def validate(self, herm_tol=1e-10, trace_tol=1e-8, psd_tol=1e-9) -> None:
        rho = self.rho
        if np.abs(rho - rho.conj().T).max() > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > trace_tol:
            raise ValueError(f"trace {np.trace(rho).real} differs from 1")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -psd_tol:
            raise ValueError("density matrix has negative eigenvalues")


def lindblad_rhs(rho, gen: Generators) -> np.ndarray:
    r = rho.rho if isinstance(rho, FockDensityMatrix) else np.asarray(rho)
    if r.shape != gen.h_eff.shape:
        raise ValueError(f"rho shape {r.shape} does not match generators {gen.h_eff.shape}")
    h = gen.h_eff
    L = gen.jump
    return -1j * (h @ r - r @ h.conj().T) + gen.rate * (L @ r @ L.conj().T)


@dataclass(frozen=True, eq=False)
class LindbladTrajectory:
    z: np.ndarray
    states: np.ndarray
    basis: FockBasis

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    @property
    def final(self) -> FockDensityMatrix:
        return FockDensityMatrix(self.states[-1], float(self.z[-1]), self.basis)

    def sector_populations(self, total: int, normalize: bool = True) -> np.ndarray:
        p = self.populations[:, self.basis.sector(total)]
        if normalize:
            p = p / p.sum(axis=1, keepdims=True)
        return p

    def trace_drift(self) -> float:
        tr = np.trace(self.states, axis1=1, axis2=2)
        return float(np.abs(tr - 1).max())


def integrate(rho0: FockDensityMatrix, gen: Generators, z_end: float, step: float = 1e-3,
              record_every: int = 1, drift_tol: float = 1e-6,
              backend: str | None = None) -> LindbladTrajectory:
    """Fixed-step RK4 from z = rho0.z to ``z_end``.

    The step is shrunk slightly if needed so that it divides the interval;
    states are recorded every ``record_every`` steps.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if rho0.basis != gen.basis:
        raise ValueError("rho0 and generators use different bases")
    span = z_end - rho0.z
    if span < 0:
        raise ValueError(f"z_end {z_end} precedes the initial z {rho0.z}")
    n_steps = max(int(math.ceil(span / step - 1e-9)), 1) if span > 0 else 0
    if n_steps and n_steps % record_every:
        n_steps += record_every - n_steps % record_every
    h = span / n_steps if n_steps else 0.0
    kern = _kernels.get(backend)
    records, failed = kern.lindblad_rk4(rho0.rho, gen.h_eff, gen.jump, gen.rate, h,
                                        n_steps, record_every, drift_tol)
    if failed >= 0:
        raise IntegrationError(
            f"trace drifted beyond {drift_tol} at z = {rho0.z + failed * h:.6g} cm "
            f"(step {h:.3g} cm); reduce the step")
    z = rho0.z + h * record_every * np.arange(len(records))
    return LindbladTrajectory(z, records, rho0.basis)
