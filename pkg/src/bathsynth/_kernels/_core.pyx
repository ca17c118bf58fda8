# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: RK4 Lindblad stepping and small permanents."""

import numpy as np
cimport numpy as cnp

ctypedef double complex cplx

cnp.import_array()


cdef void _rhs(const cplx[:, ::1] rho, const cplx[:, ::1] h,
               const cplx[:, ::1] L, double rate,
               cplx[:, ::1] tmp, cplx[:, ::1] out) noexcept nogil:
    # out = -i (h rho - rho h^+) + rate * L rho L^+
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t i, j, k
    cdef cplx acc, acc2
    for i in range(d):
        for j in range(d):
            acc = 0
            acc2 = 0
            for k in range(d):
                acc = acc + h[i, k] * rho[k, j] - rho[i, k] * h[j, k].conjugate()
                acc2 = acc2 + L[i, k] * rho[k, j]
            out[i, j] = -1j * acc
            tmp[i, j] = acc2
    for i in range(d):
        for j in range(d):
            acc = 0
            for k in range(d):
                acc = acc + tmp[i, k] * L[j, k].conjugate()
            out[i, j] = out[i, j] + rate * acc


def lindblad_rk4(rho0, h_eff, jump, double rate, double step, Py_ssize_t n_steps,
                 Py_ssize_t record_every, double drift_tol):
    cdef cplx[:, ::1] rho = np.array(rho0, dtype=np.complex128, order="C")
    cdef cplx[:, ::1] h = np.ascontiguousarray(h_eff, dtype=np.complex128)
    cdef cplx[:, ::1] L = np.ascontiguousarray(jump, dtype=np.complex128)
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t n_rec = n_steps // record_every + 1
    records_arr = np.empty((n_rec, d, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] records = records_arr
    cdef cplx[:, ::1] k1 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] k2 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] k3 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] k4 = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] stage = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] tmp = np.empty((d, d), dtype=np.complex128)
    cdef double half = 0.5 * step
    cdef double sixth = step / 6.0
    cdef Py_ssize_t n, i, j
    cdef cplx tr
    cdef Py_ssize_t failed = -1

    records[0, :, :] = rho
    with nogil:
        for n in range(1, n_steps + 1):
            _rhs(rho, h, L, rate, tmp, k1)
            for i in range(d):
                for j in range(d):
                    stage[i, j] = rho[i, j] + half * k1[i, j]
            _rhs(stage, h, L, rate, tmp, k2)
            for i in range(d):
                for j in range(d):
                    stage[i, j] = rho[i, j] + half * k2[i, j]
            _rhs(stage, h, L, rate, tmp, k3)
            for i in range(d):
                for j in range(d):
                    stage[i, j] = rho[i, j] + step * k3[i, j]
            _rhs(stage, h, L, rate, tmp, k4)
            tr = 0
            for i in range(d):
                for j in range(d):
                    rho[i, j] = rho[i, j] + sixth * (k1[i, j] + 2.0 * k2[i, j]
                                                     + 2.0 * k3[i, j] + k4[i, j])
                tr = tr + rho[i, i]
            if not abs(tr - 1.0) <= drift_tol:
                failed = n
                break
            if n % record_every == 0:
                records[n // record_every, :, :] = rho
    if failed >= 0:
        return records_arr[: (failed - 1) // record_every + 1], failed
    return records_arr, -1


def permanents(mats):
    a = np.asarray(mats, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {a.shape}")
    cdef Py_ssize_t n = a.shape[1]
    if n > 3:
        raise ValueError(f"permanent expansion supports n <= 3, got {n}")
    cdef cplx[:, :, ::1] m = np.ascontiguousarray(a)
    cdef Py_ssize_t nb = m.shape[0]
    out_arr = np.empty(nb, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    cdef Py_ssize_t b
    with nogil:
        for b in range(nb):
            if n == 0:
                out[b] = 1
            elif n == 1:
                out[b] = m[b, 0, 0]
            elif n == 2:
                out[b] = m[b, 0, 0] * m[b, 1, 1] + m[b, 0, 1] * m[b, 1, 0]
            else:
                out[b] = (m[b, 0, 0] * (m[b, 1, 1] * m[b, 2, 2] + m[b, 1, 2] * m[b, 2, 1])
                          + m[b, 0, 1] * (m[b, 1, 0] * m[b, 2, 2] + m[b, 1, 2] * m[b, 2, 0])
                          + m[b, 0, 2] * (m[b, 1, 0] * m[b, 2, 1] + m[b, 1, 1] * m[b, 2, 0]))
    return out_arr
