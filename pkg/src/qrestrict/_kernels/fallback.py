"""Pure-NumPy implementation of the displacement accumulation kernel.

Same diagonal-wise Laguerre recurrence as the compiled version (see
_disp.pyx), vectorized over the batch of displacement arguments and over
the diagonal offset k; the python-level loop runs over the degree n
only.  The compiled kernel is preferred when available.
"""

import numpy as np

_CHUNK = 1024


def accumulate_displacement(alphas, coeffs, out):
    """Add sum_j coeffs[j] * D(alphas[j]) into ``out`` (shape (N, N))."""
    alphas = np.ascontiguousarray(alphas, dtype=np.complex128)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    nmax = out.shape[0]
    if out.shape != (nmax, nmax):
        raise ValueError("out must be square")
    if alphas.shape != coeffs.shape:
        raise ValueError("alphas and coeffs must have equal length")
    if nmax == 0 or alphas.size == 0:
        return
    rt = np.sqrt(np.arange(2 * nmax + 2, dtype=np.float64))
    inv = np.zeros(2 * nmax + 2)
    inv[1:] = 1.0 / rt[1:]
    for lo in range(0, alphas.size, _CHUNK):
        _accumulate_chunk(alphas[lo:lo + _CHUNK], coeffs[lo:lo + _CHUNK],
                          rt, inv, out)


def _accumulate_chunk(alphas, coeffs, rt, inv, out):
    nmax = out.shape[0]
    npts = alphas.size
    x = np.abs(alphas) ** 2
    # seeds over the diagonal offset k: e^{-x/2} alpha^k / sqrt(k!)
    fact = np.empty((npts, nmax), dtype=np.complex128)
    fact[:, 0] = np.exp(-0.5 * x)
    if nmax > 1:
        fact[:, 1:] = alphas[:, None] * inv[1:nmax][None, :]
    du = np.cumprod(fact, axis=1)
    if nmax > 1:
        fact[:, 1:] = -np.conj(alphas)[:, None] * inv[1:nmax][None, :]
    dl = np.cumprod(fact, axis=1)
    dup = np.zeros_like(du)
    dlp = np.zeros_like(dl)
    xc = x[:, None]
    for n in range(nmax):
        kmax = nmax - n  # valid offsets 0 <= k < kmax at this degree
        out[n:, n] += coeffs @ du[:, :kmax]
        if kmax > 1:
            out[n, n + 1:] += coeffs @ dl[:, 1:kmax]
        if n == nmax - 1:
            break
        kv = np.arange(kmax - 1)
        s = inv[n + 1] * inv[n + 1 + kv]
        f1 = (2 * n + 1 + kv - xc) * s
        f2 = (rt[n] * rt[n + kv]) * s
        new = f1 * du[:, :kmax - 1] - f2 * dup[:, :kmax - 1]
        dup[:, :kmax - 1] = du[:, :kmax - 1]
        du[:, :kmax - 1] = new
        new = f1 * dl[:, :kmax - 1] - f2 * dlp[:, :kmax - 1]
        dlp[:, :kmax - 1] = dl[:, :kmax - 1]
        dl[:, :kmax - 1] = new
