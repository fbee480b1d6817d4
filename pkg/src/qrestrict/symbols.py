"""Grids, sampled functions, the classical Fourier transform, and sphere
quadrature.

Everything here is commutative: uniform grids on [-L, L]^d, Riemann-sum
norms with weight h^d, an FFT-based continuum Fourier transform in the
2*pi-exponent convention, and quadrature rules for the surface measure on
S^{d-1} (or an arc of S^1 given as a graph).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy import ndimage
from scipy.special import roots_legendre

_ROW_CHUNK = 256


@dataclass(frozen=True)
class Grid:
    """Uniform grid with nodes {-L + j h : 0 <= j < n} per axis, h = 2L/n.

    n is even, so the origin is the node with index n/2 on every axis.
    """

    d: int
    L: float
    n: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n % 2 != 0 or self.n < 16:
            raise ValueError(f"n must be even and >= 16, got {self.n}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"L must be positive and finite, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return -self.L + self.h * np.arange(self.n)

    def dual(self) -> "Grid":
        """Grid of the discrete Fourier dual: spacing 1/(2L), same n."""
        return Grid(self.d, self.n / (4.0 * self.L), self.n)

    def origin_index(self) -> tuple:
        return (self.n // 2,) * self.d


@dataclass(frozen=True)
class SampledSymbol:
    """Complex-valued function sampled on a Grid.

    values has shape (n,) * d in row-major axis order.  Norms and
    integrals use the Riemann weight h^d per node.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = self.values
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid "
                             f"{self.grid.shape}")
        if not np.issubdtype(v.dtype, np.complexfloating):
            object.__setattr__(self, "values", v.astype(np.complex128))
        if not _all_finite(self.values):
            raise ValueError("symbol values must be finite")

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "SampledSymbol":
        """Sample fn(x1, ..., xd) on the grid; fn must broadcast."""
        ax = grid.axis()
        if grid.d == 1:
            vals = np.asarray(fn(ax), dtype=np.complex128)
        else:
            # chunk along the first axis so huge grids never need a
            # full meshgrid in memory
            vals = np.empty(grid.shape, dtype=np.complex128)
            rest = np.meshgrid(*([ax] * (grid.d - 1)), indexing="ij",
                               sparse=True)
            for lo in range(0, grid.n, _ROW_CHUNK):
                hi = min(lo + _ROW_CHUNK, grid.n)
                x0 = ax[lo:hi].reshape((hi - lo,) + (1,) * (grid.d - 1))
                vals[lo:hi] = fn(x0, *rest)
        return cls(grid, vals)


def _all_finite(a: np.ndarray) -> bool:
    flat = a.reshape(-1)
    step = 1 << 22
    for lo in range(0, flat.size, step):
        if not np.all(np.isfinite(flat[lo:lo + step])):
            return False
    return True


def _parity_phase(n: int) -> np.ndarray:
    out = np.ones(n)
    out[1::2] = -1.0
    return out


def classical_ft(f: SampledSymbol, direction: str) -> SampledSymbol:
    """Continuum Fourier transform in the 2*pi convention.

    forward: (Ff)(xi) = int f(t) exp(-2*pi*i <t, xi>) dt
    inverse: (Ff)(s)  = int f(t) exp(+2*pi*i <t, s>) dt

    Returned on the dual grid (spacing 1/(2L), same n).  With nodes
    x_j = (j - n/2) h and xi_k = (k - n/2) / (2L) the exact phase factors
    reduce the Riemann sum to a plain DFT with (-1)^j pre/post twiddles.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', "
                         f"got {direction!r}")
    grid = f.grid
    if grid.d > 3:
        raise ValueError("dimension > 3 not supported")
    n = grid.n
    single = f.values.dtype == np.complex64
    sign = _parity_phase(n).astype(np.float32 if single else np.float64)
    work = f.values * sign.reshape((-1,) + (1,) * (grid.d - 1))
    for ax in range(1, grid.d):
        work *= sign.reshape((-1,) + (1,) * (grid.d - 1 - ax))
    if direction == "forward":
        work = sfft.fftn(work, overwrite_x=True)
    else:
        work = sfft.ifftn(work, overwrite_x=True)
        work *= float(n) ** grid.d
    for ax in range(grid.d):
        work *= sign.reshape((-1,) + (1,) * (grid.d - 1 - ax))
    # global constant: per axis exp(-sigma i pi n / 2) = (-1)^(n/2) for
    # even n, identical for both directions
    const = (-1.0) ** ((n // 2) * grid.d)
    work *= np.float32(const * grid.h ** grid.d) if single else \
        const * grid.h ** grid.d
    return SampledSymbol(grid.dual(), work)


def lp_norm(f: SampledSymbol, p) -> float:
    """(h^d sum |f_j|^p)^(1/p); max modulus for p = inf."""
    p = _check_exponent(p)
    flat = f.values.reshape(-1)
    step = 1 << 22
    if p == math.inf:
        best = 0.0
        for lo in range(0, flat.size, step):
            m = np.abs(flat[lo:lo + step]).max(initial=0.0)
            best = max(best, float(m))
        return best
    total = 0.0
    for lo in range(0, flat.size, step):
        a = np.abs(flat[lo:lo + step]).astype(np.float64)
        if p == 2.0:
            total += float(np.sum(a * a))
        elif p == 1.0:
            total += float(np.sum(a))
        else:
            total += float(np.sum(a ** p))
    return (f.grid.h ** f.grid.d * total) ** (1.0 / p)


def _check_exponent(p) -> float:
    p = float(p)
    if p != math.inf and (not math.isfinite(p) or p < 1.0):
        raise ValueError(f"exponent must satisfy p >= 1 or p = inf, got {p}")
    return p


def grid_convolve(f: SampledSymbol, g: SampledSymbol) -> SampledSymbol:
    """Ordinary convolution h^d sum_t f(t) g(s - t) on the common grid.

    Linear (zero-padded) convolution; the output is truncated back to the
    box, so mass convolved outside [-L, L]^d is dropped.
    """
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    grid = f.grid
    n = grid.n
    shape = (2 * n,) * grid.d
    axes = tuple(range(grid.d))
    F = np.fft.fftn(f.values, s=shape, axes=axes)
    F *= np.fft.fftn(g.values, s=shape, axes=axes)
    full = np.fft.ifftn(F, axes=axes)
    sl = tuple(slice(n // 2, n // 2 + n) for _ in range(grid.d))
    return SampledSymbol(grid, full[sl] * grid.h ** grid.d)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes/weights for surface measure on S^{d-1} or an arc.

    For arcs of S^1 the nodes come from the graph parametrization
    Gamma(t) = (t, sqrt(1 - t^2)) over the stated t-interval, with the
    arclength weight (1 + gamma'(t)^2)^(1/2) dt.
    """

    d: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    arc: tuple | None = None

    def __post_init__(self):
        if self.nodes.shape != (self.weights.size, self.d):
            raise ValueError("nodes/weights shape mismatch")
        r = np.linalg.norm(self.nodes, axis=1)
        if np.max(np.abs(r - 1.0), initial=0.0) > 1e-12:
            raise ValueError("rule nodes must lie on the unit sphere")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")


def sphere_rule(d: int, m: int, arc: tuple | None = None) -> SphereRule:
    """Quadrature for d*sigma on S^{d-1}.

    d=2: m equispaced angles, trapezoidal (= equal) weights.
    d=3: Gauss-Legendre in the polar cosine x trapezoid in azimuth
         (m x m nodes).
    arc (d=2 only): (t_lo, t_hi) interval of the graph parameter, e.g.
         (-1/2, 1/2) for the arc {(t, sqrt(1-t^2))}; Gauss-Legendre in t.
    """
    if d not in (2, 3):
        raise ValueError(f"d must be 2 or 3, got {d}")
    if m < 16:
        raise ValueError(f"resolution m must be >= 16, got {m}")
    if arc is not None:
        if d != 2:
            raise ValueError("arc mode requires d = 2")
        t_lo, t_hi = float(arc[0]), float(arc[1])
        if not -1.0 < t_lo < t_hi < 1.0:
            raise ValueError("arc interval must be inside (-1, 1)")
        x, w = roots_legendre(m)
        t = 0.5 * (t_hi - t_lo) * x + 0.5 * (t_hi + t_lo)
        w = w * 0.5 * (t_hi - t_lo)
        gamma = np.sqrt(1.0 - t * t)
        nodes = np.stack([t, gamma], axis=1)
        weights = w / gamma  # (1 + gamma'^2)^(1/2) = 1/sqrt(1-t^2)
        return SphereRule(2, nodes, weights, (t_lo, t_hi))
    if d == 2:
        ang = 2.0 * np.pi * np.arange(m) / m
        nodes = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        weights = np.full(m, 2.0 * np.pi / m)
        return SphereRule(2, nodes, weights)
    u, wu = roots_legendre(m)  # u = cos(polar)
    ang = 2.0 * np.pi * np.arange(m) / m
    su = np.sqrt(1.0 - u * u)
    x = np.outer(su, np.cos(ang)).reshape(-1)
    y = np.outer(su, np.sin(ang)).reshape(-1)
    z = np.repeat(u, m)
    nodes = np.stack([x, y, z], axis=1)
    # renormalize so radii are 1 to machine precision
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    weights = np.repeat(wu, m) * (2.0 * np.pi / m)
    return SphereRule(3, nodes, weights)


def lq_sphere_norm(g: np.ndarray, q, rule: SphereRule) -> float:
    """(sum_i w_i |g_i|^q)^(1/q); max for q = inf."""
    q = _check_exponent(q)
    g = np.asarray(g)
    if g.shape != rule.weights.shape:
        raise ValueError(f"g has {g.size} values, rule has "
                         f"{rule.weights.size} nodes")
    if not np.all(np.isfinite(g)):
        raise ValueError("g must be finite")
    a = np.abs(g).astype(np.float64)
    if q == math.inf:
        return float(a.max(initial=0.0))
    return float(np.sum(rule.weights * a ** q) ** (1.0 / q))


def interpolate_at(f: SampledSymbol, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of f at physical points (k, d).

    Points outside the box evaluate to 0.
    """
    grid = f.grid
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[None, :]
    if points.shape[1] != grid.d:
        raise ValueError("point dimension mismatch")
    coords = (points.T + grid.L) / grid.h
    re = ndimage.map_coordinates(f.values.real, coords, order=1,
                                 mode="constant", cval=0.0)
    im = ndimage.map_coordinates(f.values.imag, coords, order=1,
                                 mode="constant", cval=0.0)
    return re + 1j * im
