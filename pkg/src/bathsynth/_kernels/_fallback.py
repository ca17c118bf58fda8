"""NumPy implementations of the hot kernels; reference for the compiled core."""

from itertools import permutations

import numpy as np


def _rhs(rho, h, h_dag, jump, jump_dag, rate):
    return -1j * (h @ rho - rho @ h_dag) + rate * (jump @ rho @ jump_dag)


def lindblad_rk4(rho0, h_eff, jump, rate, step, n_steps, record_every, drift_tol):
    """Fixed-step RK4 for d(rho)/dz = -i(H rho - rho H^+) + rate * L rho L^+.

    Returns ``(records, failed_at)``: states every ``record_every`` steps
    (including the initial one) and the step index at which |tr(rho) - 1|
    first exceeded ``drift_tol`` (-1 if never).
    """
    rho = np.array(rho0, dtype=complex)
    h = np.asarray(h_eff, dtype=complex)
    L = np.asarray(jump, dtype=complex)
    h_dag, L_dag = h.conj().T, L.conj().T
    n_rec = n_steps // record_every + 1
    records = np.empty((n_rec,) + rho.shape, dtype=complex)
    records[0] = rho
    half = 0.5 * step
    for n in range(1, n_steps + 1):
        k1 = _rhs(rho, h, h_dag, L, L_dag, rate)
        k2 = _rhs(rho + half * k1, h, h_dag, L, L_dag, rate)
        k3 = _rhs(rho + half * k2, h, h_dag, L, L_dag, rate)
        k4 = _rhs(rho + step * k3, h, h_dag, L, L_dag, rate)
        rho = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        # written so that a NaN trace also counts as failure
        if not abs(np.trace(rho) - 1.0) <= drift_tol:
            return records[: (n - 1) // record_every + 1], n
        if n % record_every == 0:
            records[n // record_every] = rho
    return records, -1


def permanents(mats):
    """Permanents of a stack of n x n matrices (n <= 3) by direct expansion."""
    mats = np.asarray(mats, dtype=complex)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {mats.shape}")
    n = mats.shape[1]
    if n > 3:
        raise ValueError(f"permanent expansion supports n <= 3, got {n}")
    if n == 0:
        return np.ones(mats.shape[0], dtype=complex)
    out = np.zeros(mats.shape[0], dtype=complex)
    rows = np.arange(n)
    for p in permutations(range(n)):
        out += np.prod(mats[:, rows, list(p)], axis=1)
    return out
