"""Symbol-level algebra of Weyl elements.

A Weyl element is a pair (symbol f, antisymmetric matrix theta).  The
operator product corresponds to the twisted convolution of symbols

    (f *_theta g)(s) = int f(t) g(s - t) exp(i/2 <s, theta t>) dt,

the adjoint to conj(f(-.)), the trace to f(0), and the Fourier transform
of the element is the symbol itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .symbols import Grid, SampledSymbol, interpolate_at


@dataclass(frozen=True)
class Theta:
    """Real antisymmetric d x d matrix; antisymmetrized at construction."""

    d: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.shape != (self.d, self.d):
            raise ValueError(f"entries must be {self.d}x{self.d}")
        object.__setattr__(self, "entries", 0.5 * (e - e.T))

    @classmethod
    def d2(cls, vartheta: float) -> "Theta":
        return cls(2, np.array([[0.0, vartheta], [-vartheta, 0.0]]))

    @classmethod
    def zero(cls, d: int) -> "Theta":
        return cls(d, np.zeros((d, d)))

    @property
    def vartheta(self) -> float:
        if self.d != 2:
            raise ValueError("vartheta is defined for d = 2 only")
        return float(self.entries[0, 1])

    def is_zero(self) -> bool:
        return not np.any(self.entries)

    def __eq__(self, other):
        return (isinstance(other, Theta) and self.d == other.d
                and np.array_equal(self.entries, other.entries))


@dataclass(frozen=True)
class WeylElement:
    symbol: SampledSymbol
    theta: Theta

    def __post_init__(self):
        if self.symbol.grid.d != self.theta.d:
            raise ValueError("symbol dimension does not match theta")


def twisted_convolve(f: SampledSymbol, g: SampledSymbol, theta: Theta,
                     method: str = "fft") -> SampledSymbol:
    """Symbol of the product U_theta(f) U_theta(g).

    Output node s gets h^d sum_t f(t) g(s-t) exp(i/2 <s, theta t>); values
    of g outside the box count as zero (linear, not circular, shifts).

    method="fft" uses the phase-factored FFT path (theta = 0 any d, or
    d = 2); method="direct" is the brute-force quadrature retained as the
    oracle for coarse grids.
    """
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if f.grid.d != theta.d:
        raise ValueError("theta dimension mismatch")
    if method == "direct":
        return _twisted_direct(f, g, theta)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    if theta.is_zero():
        return _convolve_linear(f, g)
    if theta.d != 2:
        raise ValueError("fft path supports theta != 0 only for d = 2; "
                         "use method='direct'")
    return _twisted_fft_d2(f, g, theta.vartheta)


def _convolve_linear(f: SampledSymbol, g: SampledSymbol) -> SampledSymbol:
    grid = f.grid
    n = grid.n
    shape = (2 * n,) * grid.d
    F = sfft.fftn(f.values, s=shape)
    F *= sfft.fftn(g.values, s=shape)
    full = sfft.ifftn(F, overwrite_x=True)
    sl = tuple(slice(n // 2, n // 2 + n) for _ in range(grid.d))
    return SampledSymbol(grid, np.ascontiguousarray(full[sl])
                         * grid.h ** grid.d)


def _twisted_fft_d2(f: SampledSymbol, g: SampledSymbol,
                    vartheta: float) -> SampledSymbol:
    """Phase-factored path for d = 2.

    With a = vartheta/2 the phase splits as
    exp(i a s1 t2) exp(-i a s2 t1), so for each output column s2 the sum
    over t1 is a batch of 1-D linear convolutions (along axis 0) of the
    modulated f against gathered columns of g, and the sum over t2 is a
    single phase-weighted reduction.
    """
    grid = f.grid
    n = grid.n
    half = n // 2
    a = 0.5 * vartheta
    x = grid.axis()  # t1 and s coordinates share the grid
    fv = f.values
    gv = g.values
    # P[o1, j] = exp(i a s1(o1) t2(j)), independent of the output column
    P = np.exp(1j * a * np.outer(x, x))
    out = np.empty((n, n), dtype=np.complex128)
    jj = np.arange(n)
    for o2 in range(n):
        col_phase = np.exp(-1j * a * x[o2] * x)  # over t1
        A = fv * col_phase[:, None]
        FA = sfft.fft(A, n=2 * n, axis=0)
        jcols = o2 - jj + half  # column of g holding s2 - t2
        valid = (jcols >= 0) & (jcols < n)
        G = np.zeros((n, n), dtype=np.complex128)
        G[:, valid] = gv[:, jcols[valid]]
        FA *= sfft.fft(G, n=2 * n, axis=0)
        B = sfft.ifft(FA, axis=0, overwrite_x=True)[half:half + n, :]
        out[:, o2] = (B * P).sum(axis=1)
    out *= grid.h ** 2
    return SampledSymbol(grid, out)


def _twisted_direct(f: SampledSymbol, g: SampledSymbol,
                    theta: Theta) -> SampledSymbol:
    grid = f.grid
    n = grid.n
    if grid.d != 2:
        raise ValueError("direct oracle implemented for d = 2")
    if n > 128:
        raise ValueError("direct method is O(n^4); use n <= 128")
    x = grid.axis()
    vt = theta.vartheta
    half = n // 2
    fv = f.values
    gv = g.values
    out = np.zeros((n, n), dtype=np.complex128)
    # pad g so out-of-box shifts read zeros
    gpad = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    gpad[n:2 * n, n:2 * n] = gv
    ii = np.arange(n)
    for o1 in range(n):
        rows = o1 - ii + half + n  # index of s1 - t1 in gpad
        gblock = gpad[rows]  # (t1, 3n)
        for o2 in range(n):
            cols = o2 - ii + half + n
            gs = gblock[:, cols]  # g(s - t) indexed by (t1, t2)
            phase = np.exp(0.5j * vt * (x[o1] * x[None, :]
                                        - x[o2] * x[:, None]))
            out[o1, o2] = np.sum(fv * gs * phase)
    out *= grid.h ** 2
    return SampledSymbol(grid, out)


def adjoint_symbol(f: SampledSymbol) -> SampledSymbol:
    """Symbol of the adjoint: conj(f(-.)).

    The reflection maps node index i to n - i; the unpaired boundary node
    -L wraps to itself periodically (index 0 -> 0), which is exact for
    symbols negligible at |t| = L.
    """
    v = f.values
    for ax in range(f.grid.d):
        v = np.roll(np.flip(v, axis=ax), 1, axis=ax)
    return SampledSymbol(f.grid, np.conj(v))


def trace(x: WeylElement) -> complex:
    """tau_theta(x) = f(0), read at the origin node."""
    return complex(x.symbol.values[x.symbol.grid.origin_index()])


def qft(x: WeylElement) -> SampledSymbol:
    """Fourier transform of the element: identically its symbol."""
    return x.symbol


def transform_psi(x: WeylElement, T: np.ndarray) -> WeylElement:
    """Change-of-variables isomorphism.

    Returns the element over theta_T = T^t theta T with symbol
    s -> |det T| f(T s), resampled onto the standard grid bilinearly.
    """
    T = np.asarray(T, dtype=np.float64)
    d = x.theta.d
    if T.shape != (d, d):
        raise ValueError(f"T must be {d}x{d}")
    det = np.linalg.det(T)
    if abs(det) <= 1e-12:
        raise ValueError("T is numerically singular")
    grid = x.symbol.grid
    theta_t = Theta(d, T.T @ x.theta.entries @ T)
    ax = grid.axis()
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1) @ T.T
    vals = abs(det) * interpolate_at(x.symbol, pts).reshape(grid.shape)
    return WeylElement(SampledSymbol(grid, vals), theta_t)
