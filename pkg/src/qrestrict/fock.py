"""Truncated matrix representation on the harmonic-oscillator basis.

A d=2 Weyl element with parameter vartheta != 0 is modeled by the N x N
block of Q(f) = h^2 sum_t f(t) D(alpha(t)), where D is the displacement
operator and alpha(t) = kappa (t1 + i sign(vartheta) t2) with
kappa = sqrt(|vartheta|/2).  The operator trace corresponds to the
algebra trace through tau = c_tau Tr with c_tau = |vartheta| / (2 pi);
both constants are pinned by the calibration tests, not assumed.

Noncommutative L_p norms become Schatten norms of the truncated block;
theta = 0 dispatches to the classical route (L_p norm of the inverse
Fourier transform of the symbol).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import svdvals
from scipy.special import gammaln

from . import _kernels
from .symbols import SampledSymbol, classical_ft, lp_norm
from .symbols import SphereRule
from .weyl import WeylElement

_MAGIC = b"QROP\x01"

# quadrature cells larger than _COHERENCE_FRAC / (kappa sqrt(N)) are not
# merged: displacement matrix elements vary on the scale 1/(kappa sqrt(N))
_COHERENCE_FRAC = 0.15


@dataclass(frozen=True)
class TruncatedOperator:
    """N x N truncation of a quantized symbol or measure."""

    N: int
    matrix: np.ndarray = field(repr=False)
    vartheta: float
    trace_scale: float  # c_tau with tau = c_tau * Tr
    kappa: float

    def __post_init__(self):
        if self.matrix.shape != (self.N, self.N):
            raise ValueError("matrix must be N x N")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("matrix entries must be finite")
        if not (self.trace_scale > 0 and self.kappa > 0):
            raise ValueError("calibration constants must be positive")

    def trace(self) -> complex:
        return complex(self.trace_scale * np.trace(self.matrix))


def kappa_of(vartheta: float) -> float:
    return math.sqrt(abs(vartheta) / 2.0)


def trace_scale_of(vartheta: float) -> float:
    return abs(vartheta) / (2.0 * math.pi)


def displacement_elem(m: int, n: int, alpha: complex) -> complex:
    """<m|D(alpha)|n> via log-Gamma prefactor and Laguerre recurrence.

    For m >= n this is sqrt(n!/m!) alpha^(m-n) e^(-|alpha|^2/2)
    L_n^(m-n)(|alpha|^2); m < n follows from D(alpha)^* = D(-alpha).
    """
    if m < 0 or n < 0:
        raise ValueError("indices must be nonnegative")
    if m < n:
        # D(alpha)^* = D(-alpha), so <m|D(alpha)|n> = conj(<n|D(-alpha)|m>)
        return complex(np.conj(displacement_elem(n, m, -alpha)))
    alpha = complex(alpha)
    k = m - n
    x = abs(alpha) ** 2
    # upward Laguerre recurrence with renormalization guard
    lag_prev, lag, scale = 0.0, 1.0, 0.0
    for j in range(n):
        nxt = ((2 * j + k + 1 - x) * lag - (j + k) * lag_prev) / (j + 1)
        lag_prev, lag = lag, nxt
        if abs(lag) > 1e300:
            lag_prev *= 1e-300
            lag *= 1e-300
            scale += math.log(1e300)
    log_mag = 0.5 * (gammaln(n + 1) - gammaln(m + 1)) - 0.5 * x + scale
    if k > 0:
        if alpha == 0:
            return 0.0
        log_mag += k * math.log(abs(alpha))
        phase = (alpha / abs(alpha)) ** k
    else:
        phase = 1.0
    return complex(phase * lag * math.exp(log_mag))


def _alpha_map(vartheta: float):
    kap = kappa_of(vartheta)
    sgn = 1.0 if vartheta > 0 else -1.0

    def to_alpha(t1, t2):
        return kap * (t1 + 1j * sgn * t2)

    return to_alpha


def displacement_matrix(alpha: complex, N: int) -> np.ndarray:
    """Dense N x N block of D(alpha)."""
    out = np.zeros((N, N), dtype=np.complex128)
    _kernels.accumulate_displacement(
        np.array([alpha], dtype=np.complex128),
        np.array([1.0 + 0.0j]), out)
    return out


def quantize(f: SampledSymbol, vartheta: float, N: int) -> TruncatedOperator:
    """Q(f) = h^2 sum_t f(t) D(alpha(t)) on the leading N x N block.

    Nodes where |f| <= 1e-14 max|f| are skipped.  When the grid spacing
    is much finer than the coherence scale 1/(kappa sqrt(N)) of the
    displacement matrix elements, adjacent b x b node blocks are merged
    into a single displacement at the block center carrying the summed
    Riemann weight; the merge error is O((b h kappa sqrt(N))^2) and is
    kept below 1e-3.
    """
    grid = f.grid
    if grid.d != 2:
        raise ValueError("quantize requires d = 2")
    if vartheta == 0:
        raise ValueError("vartheta = 0 has no matrix representation; "
                         "use the classical branch of nc_lp_norm")
    if N < 32:
        raise ValueError("N must be >= 32")
    kap = kappa_of(vartheta)
    to_alpha = _alpha_map(vartheta)
    v = f.values
    n = grid.n
    # support bounding box from a chunked threshold scan
    row_any = np.zeros(n, dtype=bool)
    col_any = np.zeros(n, dtype=bool)
    vmax = 0.0
    step = max(1, (1 << 22) // n)
    for lo in range(0, n, step):
        a = np.abs(v[lo:lo + step])
        vmax = max(vmax, float(a.max(initial=0.0)))
    out = np.zeros((N, N), dtype=np.complex128)
    if vmax == 0.0:
        return TruncatedOperator(N, out, vartheta, trace_scale_of(vartheta),
                                 kap)
    eps = 1e-14 * vmax
    for lo in range(0, n, step):
        m = np.abs(v[lo:lo + step]) > eps
        row_any[lo:lo + step] = m.any(axis=1)
        col_any |= m.any(axis=0)
    r0, r1 = np.nonzero(row_any)[0][[0, -1]]
    c0, c1 = np.nonzero(col_any)[0][[0, -1]]
    box = v[r0:r1 + 1, c0:c1 + 1]
    ax = grid.axis()
    x1 = ax[r0:r1 + 1]
    x2 = ax[c0:c1 + 1]
    target = _COHERENCE_FRAC / (kap * math.sqrt(N))
    b = max(1, int(target / grid.h))
    if b > 1:
        pr = (-box.shape[0]) % b
        pc = (-box.shape[1]) % b
        box = np.pad(box, ((0, pr), (0, pc)))
        if pr:
            x1 = np.concatenate([x1, x1[-1] + grid.h * np.arange(1, pr + 1)])
        if pc:
            x2 = np.concatenate([x2, x2[-1] + grid.h * np.arange(1, pc + 1)])
        box = box.reshape(box.shape[0] // b, b, box.shape[1] // b, b)
        box = box.sum(axis=(1, 3))
        x1 = x1.reshape(-1, b).mean(axis=1)
        x2 = x2.reshape(-1, b).mean(axis=1)
    coeffs = (grid.h ** 2) * box
    alphas = to_alpha(x1[:, None], x2[None, :])
    keep = np.abs(coeffs) > (grid.h ** 2) * eps * 0.5
    _kernels.accumulate_displacement(
        np.ascontiguousarray(alphas[keep], dtype=np.complex128),
        np.ascontiguousarray(coeffs[keep], dtype=np.complex128), out)
    return TruncatedOperator(N, out, vartheta, trace_scale_of(vartheta), kap)


def quantize_measure(g: np.ndarray, rule: SphereRule, vartheta: float,
                     N: int) -> TruncatedOperator:
    """sum_i w_i g(xi_i) D(kappa xi_i)^* on the leading N x N block."""
    if rule.d != 2:
        raise ValueError("quantize_measure requires d = 2")
    if vartheta == 0:
        raise ValueError("vartheta must be nonzero")
    if N < 32:
        raise ValueError("N must be >= 32")
    g = np.asarray(g, dtype=np.complex128)
    if g.shape != rule.weights.shape:
        raise ValueError("g must have one value per rule node")
    to_alpha = _alpha_map(vartheta)
    # adjoint of D(alpha) is D(-alpha)
    alphas = -to_alpha(rule.nodes[:, 0], rule.nodes[:, 1])
    coeffs = rule.weights * g
    out = np.zeros((N, N), dtype=np.complex128)
    _kernels.accumulate_displacement(
        np.ascontiguousarray(alphas, dtype=np.complex128),
        np.ascontiguousarray(coeffs, dtype=np.complex128), out)
    return TruncatedOperator(N, out, vartheta, trace_scale_of(vartheta),
                             kappa_of(vartheta))


def schatten_norm(M: TruncatedOperator, p) -> float:
    """(c_tau sum s_i^p)^(1/p) over singular values; s_1 for p = inf."""
    p = float(p)
    if p != math.inf and p < 1.0:
        raise ValueError("p must be >= 1 or inf")
    s = svdvals(M.matrix)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    if p == math.inf:
        return float(s[0])
    return float((M.trace_scale * np.sum(s ** p)) ** (1.0 / p))


@dataclass(frozen=True)
class TruncationConfig:
    N: int = 256


def nc_lp_norm(x: WeylElement, p, opts: TruncationConfig | None = None
               ) -> float:
    """Noncommutative L_p norm of x.

    theta = 0 (any d): classical route, L_p norm of the inverse Fourier
    transform of the symbol.  d = 2 with vartheta != 0: Schatten norm of
    the truncated quantization.  d >= 3 with theta != 0 is unsupported.
    """
    opts = opts or TruncationConfig()
    if x.theta.is_zero():
        return lp_norm(classical_ft(x.symbol, "inverse"), p)
    if x.theta.d != 2:
        raise NotImplementedError("noncommutative norms with theta != 0 "
                                  "are implemented for d = 2 only")
    op = quantize(x.symbol, x.theta.vartheta, opts.N)
    return schatten_norm(op, p)


def convergence_report(f: SampledSymbol, p, N_list, vartheta: float = 1.0):
    """Schatten norms over an ascending list of truncation sizes.

    Returns a list of dicts with N, value, delta (relative change from
    the previous N, None for the first), and a final converged flag
    attached to every row (last delta <= 1e-3).
    """
    N_list = list(N_list)
    if N_list != sorted(N_list):
        raise ValueError("N_list must be ascending")
    rows = []
    prev = None
    for N in N_list:
        val = schatten_norm(quantize(f, vartheta, N), p)
        delta = None
        if prev is not None:
            denom = max(abs(val), abs(prev), 1e-300)
            delta = abs(val - prev) / denom
        rows.append({"N": N, "value": val, "delta": delta})
        prev = val
    last = rows[-1]["delta"]
    converged = bool((last is not None and last <= 1e-3)
                     or rows[-1]["value"] == 0.0)
    for r in rows:
        r["converged"] = converged
    return rows


def save_operator(op: TruncatedOperator, path) -> None:
    """Flat binary format: magic, N, vartheta, kappa, c_tau, then the
    row-major complex128 entries."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<q3d", op.N, op.vartheta, op.kappa,
                             op.trace_scale))
        np.ascontiguousarray(op.matrix, dtype=np.complex128).tofile(fh)


def load_operator(path) -> TruncatedOperator:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError("not a serialized operator file")
        N, vartheta, kap, c_tau = struct.unpack("<q3d",
                                                fh.read(8 + 3 * 8))
        mat = np.fromfile(fh, dtype=np.complex128,
                          count=N * N).reshape(N, N)
    op = TruncatedOperator(N, mat, vartheta, c_tau, kap)
    return op
