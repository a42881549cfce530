# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_kernels_py`` for the reference versions.

All matrices here are tiny (a few rows), so plain loops beat the per-call
overhead of numpy/LAPACK.
"""

import numpy as np
from libc.math cimport atan2

ctypedef double complex cplx

BACKEND = "cython"


cdef inline double abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void matmul(const cplx[:, ::1] a, const cplx[:, ::1] b, cplx[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n = a.shape[0], m = b.shape[1], kk = a.shape[1]
    cdef cplx s
    for i in range(n):
        for j in range(m):
            s = 0
            for k in range(kk):
                s = s + a[i, k] * b[k, j]
            out[i, j] = s


cdef int invert(cplx[:, ::1] work, cplx[:, ::1] out) noexcept nogil:
    """Gauss-Jordan inverse of ``work`` (destroyed) into ``out``; -1 if singular."""
    cdef Py_ssize_t n = work.shape[0]
    cdef Py_ssize_t i, j, r, piv
    cdef double best, v
    cdef cplx d, f, t
    for i in range(n):
        for j in range(n):
            out[i, j] = 1.0 if i == j else 0.0
    for i in range(n):
        piv = i
        best = abs2(work[i, i])
        for r in range(i + 1, n):
            v = abs2(work[r, i])
            if v > best:
                best = v
                piv = r
        if best == 0.0:
            return -1
        if piv != i:
            for j in range(n):
                t = work[i, j]; work[i, j] = work[piv, j]; work[piv, j] = t
                t = out[i, j]; out[i, j] = out[piv, j]; out[piv, j] = t
        d = 1.0 / work[i, i]
        for j in range(n):
            work[i, j] = work[i, j] * d
            out[i, j] = out[i, j] * d
        for r in range(n):
            if r != i:
                f = work[r, i]
                if f != 0:
                    for j in range(n):
                        work[r, j] = work[r, j] - f * work[i, j]
                        out[r, j] = out[r, j] - f * out[i, j]
    return 0


cdef cplx det_inplace(cplx[:, ::1] work) noexcept nogil:
    """Determinant by LU with partial pivoting (``work`` destroyed)."""
    cdef Py_ssize_t n = work.shape[0]
    cdef Py_ssize_t i, j, r, piv
    cdef double best, v
    cdef cplx d = 1.0, f, t
    for i in range(n):
        piv = i
        best = abs2(work[i, i])
        for r in range(i + 1, n):
            v = abs2(work[r, i])
            if v > best:
                best = v
                piv = r
        if best == 0.0:
            return 0.0
        if piv != i:
            for j in range(n):
                t = work[i, j]; work[i, j] = work[piv, j]; work[piv, j] = t
            d = -d
        d = d * work[i, i]
        for r in range(i + 1, n):
            f = work[r, i] / work[i, i]
            for j in range(i, n):
                work[r, j] = work[r, j] - f * work[i, j]
    return d


def transfer_product(const cplx[:, ::1] a_inv, const cplx[:, ::1] a_adj,
                     const cplx[:, :, ::1] bs, double E):
    """Ordered product T_{p-1} ... T_0 of one-step transfer matrices."""
    cdef Py_ssize_t L = a_inv.shape[0], p = bs.shape[0], n = 2 * a_inv.shape[0]
    cdef Py_ssize_t c, i, j, k
    cdef cplx s
    prod_arr = np.eye(n, dtype=complex)
    cdef cplx[:, ::1] prod = prod_arr
    cdef cplx[:, ::1] cell = np.zeros((n, n), complex)
    cdef cplx[:, ::1] tmp = np.zeros((n, n), complex)
    with nogil:
        for i in range(L):
            for j in range(L):
                cell[i, L + j] = -a_adj[i, j]
                cell[L + i, j] = a_inv[i, j]
        for c in range(p):
            for i in range(L):
                for j in range(L):
                    s = E * a_inv[i, j]
                    for k in range(L):
                        s = s - bs[c, i, k] * a_inv[k, j]
                    cell[i, j] = s
            matmul(cell, prod, tmp)
            for i in range(n):
                for j in range(n):
                    prod[i, j] = tmp[i, j]
    return prod_arr


def green_top_block(const cplx[:, ::1] a, const cplx[:, :, ::1] bs, double E, Py_ssize_t n):
    """Top-left block of (H_n - E)^{-1} by backward Schur complements."""
    cdef Py_ssize_t L = a.shape[0], p = bs.shape[0]
    cdef Py_ssize_t i, j, k, site, c
    cdef cplx s
    cdef int status = 0
    g_arr = np.zeros((L, L), complex)
    cdef cplx[:, ::1] g = g_arr
    cdef cplx[:, ::1] work = np.zeros((L, L), complex)
    cdef cplx[:, ::1] ag = np.zeros((L, L), complex)
    with nogil:
        c = (n - 1) % p
        for i in range(L):
            for j in range(L):
                work[i, j] = bs[c, i, j]
            work[i, i] = work[i, i] - E
        status = invert(work, g)
        site = n - 2
        while site >= 0 and status == 0:
            c = site % p
            matmul(a, g, ag)
            for i in range(L):
                for j in range(L):
                    s = bs[c, i, j]
                    for k in range(L):
                        # (a g a^*)_{ij} = sum_k (a g)_{ik} conj(a_{jk})
                        s = s - ag[i, k] * a[j, k].conjugate()
                    work[i, j] = s
                work[i, i] = work[i, i] - E
            status = invert(work, g)
            site -= 1
    if status != 0:
        raise np.linalg.LinAlgError("singular matrix in Green recursion")
    return g_arr


def link_phases(const cplx[:, :, :, ::1] frames):
    """Plaquette field strengths on a periodic grid; frames (N1, N2, D, n)."""
    cdef Py_ssize_t n1 = frames.shape[0], n2 = frames.shape[1]
    cdef Py_ssize_t dim = frames.shape[2], n = frames.shape[3]
    cdef Py_ssize_t i, j, i1, j1, a, b, d
    cdef cplx s1, s2, z
    d1_arr = np.zeros((n1, n2), complex)
    d2_arr = np.zeros((n1, n2), complex)
    out_arr = np.zeros((n1, n2))
    cdef cplx[:, ::1] d1 = d1_arr
    cdef cplx[:, ::1] d2 = d2_arr
    cdef double[:, ::1] out = out_arr
    cdef cplx[:, ::1] o1 = np.zeros((n, n), complex)
    cdef cplx[:, ::1] o2 = np.zeros((n, n), complex)
    with nogil:
        for i in range(n1):
            i1 = i + 1 if i + 1 < n1 else 0
            for j in range(n2):
                j1 = j + 1 if j + 1 < n2 else 0
                for a in range(n):
                    for b in range(n):
                        s1 = 0
                        s2 = 0
                        for d in range(dim):
                            s1 = s1 + frames[i, j, d, a].conjugate() * frames[i1, j, d, b]
                            s2 = s2 + frames[i, j, d, a].conjugate() * frames[i, j1, d, b]
                        o1[a, b] = s1
                        o2[a, b] = s2
                d1[i, j] = det_inplace(o1)
                d2[i, j] = det_inplace(o2)
        for i in range(n1):
            i1 = i + 1 if i + 1 < n1 else 0
            for j in range(n2):
                j1 = j + 1 if j + 1 < n2 else 0
                z = d1[i, j] * d2[i1, j] * d1[i, j1].conjugate() * d2[i, j].conjugate()
                out[i, j] = atan2(z.imag, z.real)
    return out_arr
