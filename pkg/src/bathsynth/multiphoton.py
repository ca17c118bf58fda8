"""Few-photon Fock-state evolution through linear networks and post-selection.

An input photon in mode i evolves as a_i^+ -> sum_n U[n, i] a_n^+, so the
amplitude between occupation patterns is a permanent of a submatrix of U
with rows repeated per output photon and columns per input photon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from . import _kernels, tables
from .propagator import Propagator, TransferMatrix, dimer_propagators, refine_peak
from .network import DimerSpec

MAX_PHOTONS = 3


@dataclass(frozen=True)
class PhotonConfig:
    """Photon count per mode, e.g. ``PhotonConfig((2, 0))`` for |20>."""

    occupations: tuple

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if any(n < 0 for n in occ):
            raise ValueError(f"occupations must be non-negative, got {occ}")
        if sum(occ) < 1:
            raise ValueError("need at least one photon")
        object.__setattr__(self, "occupations", occ)

    @property
    def total(self) -> int:
        return sum(self.occupations)

    @property
    def modes(self) -> int:
        return len(self.occupations)

    def photon_modes(self) -> list[int]:
        """Mode index of every photon, each mode repeated by its occupation."""
        return [i for i, n in enumerate(self.occupations) for _ in range(n)]

    def factorials(self) -> int:
        return math.prod(math.factorial(n) for n in self.occupations)

    def label(self) -> str:
        return "".join(str(n) for n in self.occupations)


@dataclass(frozen=True)
class TwoPhotonState:
    """Post-selected two-photon amplitudes on a mode pair (c20, c11, c02)."""

    c20: complex
    c11: complex
    c02: complex
    success_prob: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs([self.c20, self.c11, self.c02]) ** 2


@dataclass(frozen=True, eq=False)
class TwoPhotonTrace:
    """Post-selected probabilities (P20, P11, P02) along z."""

    z: np.ndarray
    probabilities: np.ndarray
    success_prob: np.ndarray

    @property
    def entropy(self) -> np.ndarray:
        return entropy_from_probabilities(self.probabilities)

    def to_text(self, meta=None) -> str:
        cols = ["z[cm]", "P20", "P11", "P02", "success_prob", "entropy[nats]"]
        data = np.column_stack([self.z, self.probabilities, self.success_prob, self.entropy])
        return tables.format_table(cols, data, meta)


def _matrix(U) -> np.ndarray:
    return U.U if isinstance(U, TransferMatrix) else np.asarray(U)


def _check_pair(inp: PhotonConfig, out: PhotonConfig, m: int) -> None:
    if inp.total != out.total:
        raise ValueError(f"photon number mismatch: {inp.total} in, {out.total} out")
    if inp.total > MAX_PHOTONS:
        raise ValueError(f"supported photon numbers are 1..{MAX_PHOTONS}, got {inp.total}")
    if inp.modes != m or out.modes != m:
        raise ValueError(f"configs must span all {m} modes")


def output_amplitude(U, input: PhotonConfig, output: PhotonConfig) -> complex:
    """<output| U |input> for photons injected according to ``input``."""
    u = _matrix(U)
    _check_pair(input, output, u.shape[0])
    sub = u[np.ix_(output.photon_modes(), input.photon_modes())]
    per = _kernels.permanents(sub[None])[0]
    return complex(per / math.sqrt(input.factorials() * output.factorials()))


def output_configs(modes: int, photons: int) -> list[PhotonConfig]:
    """All occupation patterns of ``photons`` photons in ``modes`` modes."""
    out = []
    for combo in combinations_with_replacement(range(modes), photons):
        occ = [0] * modes
        for i in combo:
            occ[i] += 1
        out.append(PhotonConfig(tuple(occ)))
    return out


def output_distribution(U, input: PhotonConfig) -> dict:
    """Amplitudes for every output pattern with the same photon number."""
    u = _matrix(U)
    m = u.shape[0]
    if input.modes != m:
        raise ValueError(f"input must span all {m} modes")
    if input.total > MAX_PHOTONS:
        raise ValueError(f"supported photon numbers are 1..{MAX_PHOTONS}, got {input.total}")
    outs = output_configs(m, input.total)
    cols = input.photon_modes()
    subs = np.stack([u[np.ix_(o.photon_modes(), cols)] for o in outs])
    norms = np.sqrt([o.factorials() * input.factorials() for o in outs])
    amps = _kernels.permanents(subs) / norms
    return {o.occupations: complex(a) for o, a in zip(outs, amps)}


_PAIR_OUTPUTS = ((2, 0), (1, 1), (0, 2))


def _pair_amplitudes(blocks: np.ndarray, input: PhotonConfig) -> np.ndarray:
    """(c20, c11, c02) for a stack of 2x2 blocks; shape (len(blocks), 3)."""
    cols = input.photon_modes()
    out = np.empty((blocks.shape[0], 3), dtype=complex)
    for k, occ in enumerate(_PAIR_OUTPUTS):
        o = PhotonConfig(occ)
        sub = blocks[:, o.photon_modes()][:, :, cols]
        out[:, k] = _kernels.permanents(sub) / math.sqrt(o.factorials() * input.factorials())
    return out


def _check_two_photon(subsystem_modes, input: PhotonConfig) -> tuple:
    a, b = subsystem_modes
    if a == b:
        raise ValueError("subsystem modes must be distinct")
    if input.modes != 2 or input.total != 2:
        raise ValueError(f"input must be a two-photon config on the mode pair, got {input}")
    return int(a), int(b)


def two_photon_trace(H_full, subsystem_modes: Sequence[int], input: PhotonConfig,
                     z_grid) -> TwoPhotonTrace:
    """Evolve two photons through the full network and post-select on the pair."""
    pair = _check_two_photon(subsystem_modes, input)
    prop = H_full if isinstance(H_full, Propagator) else Propagator(H_full)
    z = np.asarray(z_grid, dtype=float)
    blocks = prop.block(z, pair, pair)
    return _post_select(z, _pair_amplitudes(blocks, input))


def dimer_two_photon_trace(spec: DimerSpec, input: PhotonConfig, z_grid) -> TwoPhotonTrace:
    """Same observable driven by the non-unitary 2x2 propagator exp(-i H_eff z)."""
    _check_two_photon((0, 1), input)
    z = np.asarray(z_grid, dtype=float)
    return _post_select(z, _pair_amplitudes(dimer_propagators(spec, z), input))


def _post_select(z, amps) -> TwoPhotonTrace:
    p = np.abs(amps) ** 2
    # (p20 + p02) + p11 is invariant under swapping the two modes
    success = (p[:, 0] + p[:, 2]) + p[:, 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = p / success[:, None]
    return TwoPhotonTrace(z, probs, success)


def evolve_two_photon(H_full, subsystem_modes: Sequence[int], input: PhotonConfig,
                      z: float) -> TwoPhotonState:
    pair = _check_two_photon(subsystem_modes, input)
    prop = H_full if isinstance(H_full, Propagator) else Propagator(H_full)
    block = prop.block([z], pair, pair)
    amps = _pair_amplitudes(block, input)[0]
    p = np.abs(amps) ** 2
    success = float((p[0] + p[2]) + p[1])
    if success == 0:
        raise ValueError("no probability left in the subsystem; post-selection undefined")
    c = amps / math.sqrt(success)
    return TwoPhotonState(complex(c[0]), complex(c[1]), complex(c[2]), min(success, 1.0))


def entropy_from_probabilities(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def entanglement_entropy(state: TwoPhotonState) -> float:
    """Entropy (nats) of one mode's reduced state.

    |20>, |11>, |02> put distinct photon numbers in mode A, so the reduced
    density matrix is diagonal with eigenvalues |c20|^2, |c11|^2, |c02|^2.
    """
    return float(entropy_from_probabilities(state.probabilities))


def peak_of(z: np.ndarray, y: np.ndarray, tol: float = 1e-3) -> tuple[float, float]:
    """Earliest peak whose height is within ``tol`` of the global maximum."""
    if len(z) == 0:
        raise ValueError("empty range")
    top = np.nanmax(y)
    i = int(np.flatnonzero(y >= top - tol)[0])
    while i + 1 < len(y) and y[i + 1] >= y[i]:
        i += 1
    if 0 < i < len(y) - 1:
        return refine_peak(z, y, i)
    return float(z[i]), float(y[i])


def entanglement_peak(H_full, subsystem_modes, input: PhotonConfig, z_range=(0.0, 10.0),
                      step: float = 0.01) -> tuple[float, float]:
    z0, z1 = z_range
    if not z1 > z0 or step <= 0:
        raise ValueError(f"empty range {z_range} with step {step}")
    z = np.linspace(z0, z1, int(round((z1 - z0) / step)) + 1)
    trace = two_photon_trace(H_full, subsystem_modes, input, z)
    return peak_of(z, trace.entropy)
