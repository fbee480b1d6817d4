"""Oracle and property tests for the truncated oscillator-basis
representation: displacement matrix elements, quantization, calibration
constants, Schatten norms, and serialization."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from qrestrict._kernels import BACKEND, fallback
from qrestrict._kernels import accumulate_displacement
from qrestrict.fock import (TruncatedOperator, TruncationConfig,
                            convergence_report, displacement_elem,
                            displacement_matrix, kappa_of, load_operator,
                            nc_lp_norm, quantize, quantize_measure,
                            save_operator, schatten_norm, trace_scale_of)
from qrestrict.symbols import Grid, SampledSymbol, SphereRule, lp_norm
from qrestrict.weyl import (Theta, WeylElement, adjoint_symbol,
                            twisted_convolve)

GRID = Grid(2, 8.0, 256)


def gauss(cx=0.0, cy=0.0, width=1.0, freq=(0.0, 0.0)):
    fx, fy = freq
    return SampledSymbol.from_function(
        GRID, lambda x, y: np.exp(-math.pi * ((x - cx) ** 2 + (y - cy) ** 2)
                                  / width ** 2)
        * np.exp(2j * math.pi * (fx * x + fy * y)))


def expm_displacement(alpha, N):
    """Matrix-exponential oracle for D(alpha) = exp(alpha a+ - conj a)."""
    lower = np.diag(np.sqrt(np.arange(1, N)), -1)  # a_dagger
    return expm(alpha * lower - np.conj(alpha) * lower.T)


# ---------------------------------------------------------------------------
# displacement matrix elements

def test_displacement_identity_at_zero():
    assert displacement_elem(5, 5, 0.0) == pytest.approx(1.0)
    assert displacement_elem(5, 3, 0.0) == 0.0


def test_displacement_vacuum_overlap():
    for alpha in (0.3, 1.0 + 0.5j, -2.2j):
        want = math.exp(-abs(alpha) ** 2 / 2.0)
        assert displacement_elem(0, 0, alpha) == pytest.approx(want,
                                                               rel=1e-14)


def test_displacement_elem_matches_expm_oracle():
    N = 32
    for alpha in (0.7, 0.4 - 1.1j, 2.0 + 0.3j):
        oracle = expm_displacement(alpha, N)
        # truncation of the oracle pollutes the highest modes; compare
        # the leading quarter block
        for m in range(8):
            for n in range(8):
                assert displacement_elem(m, n, alpha) == pytest.approx(
                    oracle[m, n], abs=1e-10)


def test_displacement_conjugate_symmetry():
    alpha = 0.8 - 0.6j
    a = displacement_elem(3, 7, alpha)
    b = displacement_elem(7, 3, -alpha)
    assert a == pytest.approx(np.conj(b), rel=1e-12)


def test_displacement_rejects_negative_indices():
    with pytest.raises(ValueError):
        displacement_elem(-1, 0, 0.1)


def test_displacement_matrix_column_norms():
    alpha = 1.3 + 0.4j
    small = displacement_matrix(alpha, 48)
    norms = np.linalg.norm(small[:, :8], axis=0)
    assert np.all(norms <= 1.0 + 1e-12)
    big = displacement_matrix(alpha, 128)
    norms_big = np.linalg.norm(big[:, :8], axis=0)
    assert np.all(norms_big >= norms - 1e-12)
    assert np.abs(norms_big - 1.0).max() <= 1e-10


def test_displacement_stable_at_large_index_and_alpha():
    # the naive row recurrence overflows here; entries must stay bounded
    # and match the scalar routine
    alpha = 3.5 + 1.2j
    M = displacement_matrix(alpha, 300)
    assert np.all(np.isfinite(M))
    assert np.abs(M).max() <= 1.0 + 1e-9
    assert M[255, 250] == pytest.approx(displacement_elem(255, 250, alpha),
                                        abs=1e-13)


def test_weyl_phase_of_representation():
    # D(a)D(b) = exp(i Im(a conj b)) D(a+b); with a = alpha(t),
    # b = alpha(s) the phase must equal (1/2)(s, theta t)
    vth = 1.0
    kap = kappa_of(vth)
    rng = np.random.default_rng(11)
    N = 192
    for _ in range(3):
        t = rng.uniform(-2.0, 2.0, 2)
        s = rng.uniform(-2.0, 2.0, 2)
        a = kap * (t[0] + 1j * t[1])
        b = kap * (s[0] + 1j * s[1])
        # exact arithmetic identity for the phase
        want_phase = 0.5 * vth * (s[0] * t[1] - s[1] * t[0])
        assert np.imag(a * np.conj(b)) == pytest.approx(want_phase,
                                                        abs=1e-12)
        lhs = displacement_matrix(a, N) @ displacement_matrix(b, N)
        rhs = np.exp(1j * want_phase) * displacement_matrix(a + b, N)
        block = slice(0, 64)
        assert np.abs(lhs[block, block] - rhs[block, block]).max() <= 1e-8


def test_compiled_and_fallback_kernels_agree():
    rng = np.random.default_rng(5)
    alphas = rng.uniform(-2, 2, 64) + 1j * rng.uniform(-2, 2, 64)
    coeffs = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    a = np.zeros((96, 96), dtype=np.complex128)
    b = np.zeros((96, 96), dtype=np.complex128)
    accumulate_displacement(alphas, coeffs.astype(complex), a)
    fallback.accumulate_displacement(alphas, coeffs.astype(complex), b)
    assert np.abs(a - b).max() <= 1e-12
    assert BACKEND in ("compiled", "fallback")


# ---------------------------------------------------------------------------
# quantize

def test_quantize_delta_like_symbol_is_identity():
    fine = Grid(2, 1.0, 256)  # the narrow bump needs h well below width
    w = 0.1
    narrow = SampledSymbol.from_function(
        fine, lambda x, y: (1.0 / w ** 2)
        * np.exp(-math.pi * (x * x + y * y) / w ** 2))
    op = quantize(narrow, 1.0, 64)
    block = op.matrix[:8, :8]
    assert np.linalg.norm(block - np.eye(8), 2) <= 0.05


def test_quantize_trace_calibration():
    f = gauss(cx=0.3, width=0.9, freq=(0.2, 0.1))
    op = quantize(f, 1.0, 128)
    want = complex(f.values[GRID.origin_index()])
    assert abs(op.trace() - want) <= 1e-3 * abs(want)


def test_quantize_plancherel():
    f = gauss()
    op = quantize(f, 1.0, 128)
    assert schatten_norm(op, 2) == pytest.approx(lp_norm(f, 2), rel=1e-3)


def test_quantize_negative_vartheta_plancherel():
    f = gauss(cx=0.4, freq=(0.3, 0.0))
    op = quantize(f, -1.0, 128)
    assert schatten_norm(op, 2) == pytest.approx(lp_norm(f, 2), rel=1e-3)


def test_quantize_rejects_bad_input():
    f = gauss()
    with pytest.raises(ValueError):
        quantize(f, 0.0, 64)
    with pytest.raises(ValueError):
        quantize(f, 1.0, 16)
    f1 = SampledSymbol(Grid(1, 8.0, 256), np.zeros(256, complex))
    with pytest.raises(ValueError):
        quantize(f1, 1.0, 64)


def test_quantize_homomorphism():
    theta = Theta.d2(1.0)
    f, g = gauss(width=0.9), gauss(cx=0.4, width=1.1)
    lhs = quantize(twisted_convolve(f, g, theta), 1.0, 128).matrix
    rhs = quantize(f, 1.0, 128).matrix @ quantize(g, 1.0, 128).matrix
    scale = lp_norm(f, 2) * lp_norm(g, 2)
    resid = math.sqrt(trace_scale_of(1.0)
                      * float(np.sum(np.abs(lhs - rhs) ** 2))) / scale
    assert resid <= 1e-3


def test_quantize_adjoint_intertwining():
    f = gauss(cx=0.3, cy=-0.2, freq=(0.25, 0.0))
    a = quantize(adjoint_symbol(f), 1.0, 128).matrix
    b = quantize(f, 1.0, 128).matrix.conj().T
    assert np.abs(a - b).max() <= 1e-8


def test_quantize_block_merge_matches_unmerged():
    # a grid much finer than the coherence scale triggers node-block
    # merging; the result must match a coarse unmerged quantization
    fine = Grid(2, 4.0, 1024)
    coarse = Grid(2, 4.0, 128)

    def fn(x, y):
        return np.exp(-math.pi * (x * x + y * y))

    qf = quantize(SampledSymbol.from_function(fine, fn), 1.0, 64)
    qc = quantize(SampledSymbol.from_function(coarse, fn), 1.0, 64)
    rel = (np.abs(qf.matrix - qc.matrix).max()
           / np.abs(qc.matrix).max())
    assert rel <= 1e-3


def test_schatten_norm_basics():
    z = TruncatedOperator(32, np.zeros((32, 32), complex), 1.0,
                          trace_scale_of(1.0), kappa_of(1.0))
    assert schatten_norm(z, 1) == 0.0
    f = gauss()
    op = quantize(f, 1.0, 128)
    assert schatten_norm(op, math.inf) <= lp_norm(f, 1) * (1.0 + 1e-2)
    with pytest.raises(ValueError):
        schatten_norm(op, 0.5)


def test_schatten_holder_inequality():
    a = quantize(gauss(width=0.9), 1.0, 96)
    b = quantize(gauss(cx=0.5), 1.0, 96)
    prod = TruncatedOperator(96, a.matrix @ b.matrix, 1.0, a.trace_scale,
                             a.kappa)
    lhs = schatten_norm(prod, 1)
    rhs = schatten_norm(a, 2) * schatten_norm(b, 2)
    assert lhs <= rhs * (1.0 + 1e-10)


def test_schatten_monotone_in_truncation():
    # blocks are nested, so trace and Frobenius norms are nondecreasing
    f = gauss(cx=0.6, width=0.8, freq=(0.3, -0.2))
    for p in (1.0, 2.0):
        vals = [schatten_norm(quantize(f, 1.0, N), p)
                for N in (32, 64, 96)]
        assert vals[0] <= vals[1] + 1e-10
        assert vals[1] <= vals[2] + 1e-10


def test_truncated_operator_validation():
    with pytest.raises(ValueError):
        TruncatedOperator(4, np.zeros((3, 3), complex), 1.0, 1.0, 1.0)
    bad = np.zeros((4, 4), complex)
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        TruncatedOperator(4, bad, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        TruncatedOperator(4, np.zeros((4, 4), complex), 1.0, -1.0, 1.0)


# ---------------------------------------------------------------------------
# nc_lp_norm dispatch

def test_nc_lp_norm_classical_route():
    from qrestrict.symbols import classical_ft
    f = gauss()
    x = WeylElement(f, Theta.zero(2))
    want = lp_norm(classical_ft(f, "inverse"), 2)
    assert nc_lp_norm(x, 2) == pytest.approx(want, rel=1e-12)
    # self-dual Gaussian: also equals lp_norm(f, 2)
    assert nc_lp_norm(x, 2) == pytest.approx(lp_norm(f, 2), rel=1e-6)


def test_nc_lp_norm_continuity_in_vartheta_at_p2():
    f = gauss()
    a = nc_lp_norm(WeylElement(f, Theta.zero(2)), 2)
    # the matrix route spreads over ~2 pi / vartheta oscillator states,
    # so vartheta must stay well above 2 pi / N for the truncation to
    # capture the norm
    b = nc_lp_norm(WeylElement(f, Theta.d2(0.1)), 2,
                   TruncationConfig(N=256))
    assert abs(a - b) <= 0.01 * a


def test_nc_lp_norm_rejects_high_dim_noncommutative():
    g3 = Grid(3, 4.0, 16)
    f = SampledSymbol(g3, np.zeros((16, 16, 16), complex))
    th = Theta(3, np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]], float))
    with pytest.raises(NotImplementedError):
        nc_lp_norm(WeylElement(f, th), 2)


# ---------------------------------------------------------------------------
# quantize_measure

def test_quantize_measure_zero_density():
    rule = SphereRule(2, np.array([[1.0, 0.0]]), np.array([1.0]))
    op = quantize_measure(np.array([0.0]), rule, 1.0, 32)
    assert np.all(op.matrix == 0)


def test_quantize_measure_single_node_is_displacement():
    xi = np.array([[0.6, 0.8]])
    rule = SphereRule(2, xi, np.array([1.0]))
    op = quantize_measure(np.array([1.0]), rule, 1.0, 48)
    kap = kappa_of(1.0)
    want = displacement_matrix(-kap * (0.6 + 0.8j), 48)
    assert np.abs(op.matrix - want).max() <= 1e-13


def test_quantize_measure_matches_mollified_symbol_route():
    # quantizing the uniform measure on the circle must agree with
    # quantizing a narrow ring symbol (the measure mollified radially)
    from qrestrict.symbols import sphere_rule
    N = 64
    rule = sphere_rule(2, 512)
    em = quantize_measure(np.ones(512), rule, 1.0, N)
    # the mollification width must sit below the coherence scale
    # 1/(kappa sqrt(N)) or the displacement averaging biases the norm
    eps = 0.02
    grid = Grid(2, 2.0, 768)

    def ring(x, y):
        r = np.hypot(x, y)
        return (np.exp(-(r - 1.0) ** 2 / (2.0 * eps ** 2))
                / (math.sqrt(2.0 * math.pi) * eps * np.maximum(r, 1e-9)))

    es = quantize(SampledSymbol.from_function(grid, ring), 1.0, N)
    # measure route applies adjoints; compare Schatten-2 (adjoint
    # invariant)
    a = schatten_norm(em, 2)
    b = schatten_norm(es, 2)
    assert abs(a - b) <= 0.02 * a


def test_quantize_measure_rejects_bad_input():
    rule = SphereRule(2, np.array([[1.0, 0.0]]), np.array([1.0]))
    with pytest.raises(ValueError):
        quantize_measure(np.array([1.0]), rule, 0.0, 32)
    with pytest.raises(ValueError):
        quantize_measure(np.array([1.0, 2.0]), rule, 1.0, 32)


# ---------------------------------------------------------------------------
# convergence report

def test_convergence_report_gaussian():
    f = gauss()
    rows = convergence_report(f, 2, [32, 64, 128])
    deltas = [r["delta"] for r in rows[1:]]
    assert deltas[0] is not None and deltas[1] is not None
    assert deltas[1] <= deltas[0]
    assert all(r["converged"] for r in rows)
    # limit is the Plancherel value
    assert rows[-1]["value"] == pytest.approx(lp_norm(f, 2), rel=1e-3)


def test_convergence_report_zero_symbol():
    f = SampledSymbol(GRID, np.zeros(GRID.shape, complex))
    rows = convergence_report(f, 2, [32, 64])
    assert all(r["value"] == 0.0 for r in rows)
    assert all(r["converged"] for r in rows)


def test_convergence_report_hard_case_reported_honestly():
    # sup norm of a delta-like symbol keeps drifting with N; the flag
    # must reflect whatever the data says, not assume convergence
    narrow = SampledSymbol.from_function(
        GRID, lambda x, y: (1.0 / 0.02 ** 2)
        * np.exp(-math.pi * (x * x + y * y) / 0.02 ** 2))
    rows = convergence_report(narrow, math.inf, [32, 64])
    assert isinstance(rows[-1]["converged"], bool)


def test_convergence_report_requires_ascending_sizes():
    with pytest.raises(ValueError):
        convergence_report(gauss(), 2, [64, 32])


# ---------------------------------------------------------------------------
# serialization

def test_save_load_round_trip(tmp_path):
    op = quantize(gauss(cx=0.2), 1.0, 64)
    path = tmp_path / "op.bin"
    save_operator(op, path)
    back = load_operator(path)
    assert back.N == op.N
    assert back.vartheta == op.vartheta
    assert back.kappa == op.kappa
    assert back.trace_scale == op.trace_scale
    assert np.array_equal(back.matrix, op.matrix)


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"not an operator")
    with pytest.raises(ValueError):
        load_operator(path)
