# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for displacement-operator accumulation.

Entries of D(alpha) = exp(alpha a^dag - conj(alpha) a) in the number
basis are evaluated diagonal by diagonal.  Along the diagonal m = n + k
the scaled entries d_n = <n+k|D(alpha)|n> obey the associated-Laguerre
upward recurrence with real coefficients

    d_{n+1} = (2n + k + 1 - x) / (rt(n+1) rt(n+k+1)) * d_n
              - rt(n) rt(n+k) / (rt(n+1) rt(n+k+1)) * d_{n-1},

x = |alpha|^2, seeded by d_0 = alpha^k e^{-x/2} / sqrt(k!).  The upper
triangle (m < n) uses the same coefficients with seed factor
(-conj(alpha))^k, by D(alpha)^* = D(-alpha).  Upward degree is the
stable direction of the Laguerre recurrence and every entry stays
bounded by 1, unlike the row-by-row scheme, which blows up for
|alpha| > 1 at large m.
"""

import numpy as np

cimport numpy as cnp

from libc.math cimport exp

cnp.import_array()


def accumulate_displacement(cnp.complex128_t[::1] alphas,
                            cnp.complex128_t[::1] coeffs,
                            cnp.complex128_t[:, ::1] out):
    """Add sum_j coeffs[j] * D(alphas[j]) into ``out`` (shape (N, N))."""
    cdef Py_ssize_t nmax = out.shape[0]
    cdef Py_ssize_t npts = alphas.shape[0]
    if out.shape[1] != nmax:
        raise ValueError("out must be square")
    if coeffs.shape[0] != npts:
        raise ValueError("alphas and coeffs must have equal length")
    if nmax == 0 or npts == 0:
        return

    rt_arr = np.sqrt(np.arange(2 * nmax + 2, dtype=np.float64))
    inv_arr = np.zeros(2 * nmax + 2, dtype=np.float64)
    inv_arr[1:] = 1.0 / rt_arr[1:]
    cdef double[::1] rt = rt_arr
    cdef double[::1] inv = inv_arr
    cdef Py_ssize_t j, k, n
    cdef double complex a, c, nca, seed_u, seed_l
    cdef double complex du, dup, dl, dlp, tmp
    cdef double x, ex, f1, f2, s

    for j in range(npts):
        a = alphas[j]
        c = coeffs[j]
        x = a.real * a.real + a.imag * a.imag
        ex = exp(-0.5 * x)
        nca = -(a.real - 1j * a.imag)
        seed_u = ex
        seed_l = ex
        for k in range(nmax):
            if k > 0:
                seed_u = seed_u * a * inv[k]
                seed_l = seed_l * nca * inv[k]
            dup = 0
            du = seed_u
            dlp = 0
            dl = seed_l
            if k > 0:
                for n in range(nmax - k):
                    out[n + k, n] = out[n + k, n] + c * du
                    out[n, n + k] = out[n, n + k] + c * dl
                    s = inv[n + 1] * inv[n + k + 1]
                    f1 = (2 * n + k + 1 - x) * s
                    f2 = rt[n] * rt[n + k] * s
                    tmp = f1 * du - f2 * dup
                    dup = du
                    du = tmp
                    tmp = f1 * dl - f2 * dlp
                    dlp = dl
                    dl = tmp
            else:
                for n in range(nmax):
                    out[n, n] = out[n, n] + c * du
                    s = inv[n + 1] * inv[n + 1]
                    f1 = (2 * n + 1 - x) * s
                    f2 = rt[n] * rt[n] * s
                    tmp = f1 * du - f2 * dup
                    dup = du
                    du = tmp
