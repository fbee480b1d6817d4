"""Oracle and property tests for grids, sampled symbols, the classical
Fourier transform, and sphere quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrestrict.symbols import (Grid, SampledSymbol, classical_ft,
                               grid_convolve, interpolate_at, lp_norm,
                               lq_sphere_norm, sphere_rule)


def gaussian_2d(grid, width=1.0, cx=0.0, cy=0.0):
    return SampledSymbol.from_function(
        grid, lambda x, y: np.exp(-math.pi * ((x - cx) ** 2 + (y - cy) ** 2)
                                  / width ** 2))


# ---------------------------------------------------------------------------
# Grid / SampledSymbol construction

def test_grid_nodes_and_origin():
    g = Grid(1, 4.0, 16)
    assert g.h == 0.5
    ax = g.axis()
    assert ax[0] == -4.0
    assert ax[g.origin_index()[0]] == 0.0
    assert g.shape == (16,)


def test_grid_dual_spacing():
    g = Grid(2, 8.0, 64)
    d = g.dual()
    assert d.n == g.n
    assert d.h == pytest.approx(1.0 / (2.0 * g.L))


@pytest.mark.parametrize("d,L,n", [(0, 1.0, 16), (4, 1.0, 16),
                                   (1, 1.0, 15), (1, 1.0, 8),
                                   (1, -1.0, 16), (1, math.inf, 16)])
def test_grid_rejects_bad_parameters(d, L, n):
    with pytest.raises(ValueError):
        Grid(d, L, n)


def test_symbol_shape_and_finiteness_checked():
    g = Grid(1, 1.0, 16)
    with pytest.raises(ValueError):
        SampledSymbol(g, np.zeros(17))
    bad = np.zeros(16)
    bad[3] = np.inf
    with pytest.raises(ValueError):
        SampledSymbol(g, bad)


def test_from_function_matches_meshgrid():
    g = Grid(2, 2.0, 16)
    f = SampledSymbol.from_function(g, lambda x, y: x + 10.0 * y)
    X, Y = np.meshgrid(g.axis(), g.axis(), indexing="ij")
    assert np.allclose(f.values, X + 10.0 * Y)


# ---------------------------------------------------------------------------
# classical Fourier transform

def test_ft_self_dual_gaussian_2d():
    g = Grid(2, 8.0, 128)
    f = gaussian_2d(g)
    F = classical_ft(f, "forward")
    # the dual grid has spacing 1/16, nodes are a subset of physics points
    ref = SampledSymbol.from_function(F.grid, lambda x, y:
                                      np.exp(-math.pi * (x * x + y * y)))
    err = np.abs(F.values - ref.values).max()
    assert err <= 1e-12


def test_ft_round_trip():
    g = Grid(2, 6.0, 64)
    f = gaussian_2d(g, width=0.5)
    back = classical_ft(classical_ft(f, "inverse"), "forward")
    # the double transform lands back on a grid with the same spacing
    rel = (np.abs(back.values - f.values).max()
           / np.abs(f.values).max())
    assert rel <= 1e-10


def test_ft_modulated_gaussian_against_riemann_sum():
    # f(t) = e^{-pi|t|^2} e^{2 pi i t1}: transform peaks at (1, 0); the
    # oracle is the direct Riemann-sum integral at 5 sample points
    g = Grid(2, 8.0, 128)
    f = SampledSymbol.from_function(
        g, lambda x, y: np.exp(-math.pi * (x * x + y * y))
        * np.exp(2j * math.pi * x))
    F = classical_ft(f, "forward")
    peak = np.unravel_index(np.argmax(np.abs(F.values)), F.values.shape)
    ax = F.grid.axis()
    assert ax[peak[0]] == pytest.approx(1.0, abs=F.grid.h / 2)
    assert ax[peak[1]] == pytest.approx(0.0, abs=F.grid.h / 2)
    X, Y = np.meshgrid(g.axis(), g.axis(), indexing="ij")
    for xi in [(1.0, 0.0), (0.5, 0.0), (1.25, -0.25), (0.0, 0.0),
               (2.0, 1.0)]:
        oracle = np.sum(f.values
                        * np.exp(-2j * math.pi * (xi[0] * X + xi[1] * Y))
                        ) * g.h ** 2
        got = interpolate_at(F, np.array(xi))[0]
        assert abs(got - oracle) <= 1e-6


def test_ft_rejects_bad_direction():
    g = Grid(1, 1.0, 16)
    f = SampledSymbol(g, np.zeros(16, dtype=complex))
    with pytest.raises(ValueError):
        classical_ft(f, "sideways")


def test_ft_preserves_single_precision():
    g = Grid(2, 4.0, 32)
    f = SampledSymbol(g, gaussian_2d(g).values.astype(np.complex64))
    F = classical_ft(f, "inverse")
    assert F.values.dtype == np.complex64


def test_parseval():
    g = Grid(2, 8.0, 128)
    f = SampledSymbol.from_function(
        g, lambda x, y: (x + 1j) * np.exp(-math.pi * ((x - 0.3) ** 2
                                                      + y * y)))
    a = lp_norm(f, 2)
    b = lp_norm(classical_ft(f, "forward"), 2)
    assert abs(a - b) <= 1e-8 * a


def test_convolution_theorem():
    g = Grid(2, 8.0, 128)
    f = gaussian_2d(g, width=0.8)
    k = gaussian_2d(g, width=1.2, cx=0.4)
    lhs = classical_ft(grid_convolve(f, k), "forward")
    rhs = classical_ft(f, "forward").values * classical_ft(k,
                                                           "forward").values
    rel = np.abs(lhs.values - rhs).max() / np.abs(rhs).max()
    assert rel <= 1e-8


def test_grid_convolve_of_gaussians_matches_closed_form():
    # e^{-pi r^2/a} * e^{-pi r^2/b} = (ab/(a+b)) e^{-pi r^2/(a+b)} in d=2
    # (widths squared add)
    g = Grid(2, 8.0, 128)
    a, b = 0.8, 1.5
    f = SampledSymbol.from_function(
        g, lambda x, y: np.exp(-math.pi * (x * x + y * y) / a))
    k = SampledSymbol.from_function(
        g, lambda x, y: np.exp(-math.pi * (x * x + y * y) / b))
    got = grid_convolve(f, k)
    ref = SampledSymbol.from_function(
        g, lambda x, y: (a * b / (a + b))
        * np.exp(-math.pi * (x * x + y * y) / (a + b)))
    assert np.abs(got.values - ref.values).max() <= 1e-8


# ---------------------------------------------------------------------------
# lp norms

def test_lp_norm_plateau_measure():
    g = Grid(1, 4.0, 64)  # h = 1/8
    vals = np.zeros(64, dtype=complex)
    vals[16:32] = 1.0  # 16 nodes of measure 1/8 each -> total measure 2
    f = SampledSymbol(g, vals)
    assert lp_norm(f, 1) == pytest.approx(2.0, abs=1e-14)


def test_lp_norm_gaussian_l2():
    g = Grid(2, 8.0, 256)
    f = gaussian_2d(g)
    # int e^{-2 pi |t|^2} dt = 1/2 in d=2
    assert lp_norm(f, 2) == pytest.approx(2.0 ** -0.5, rel=1e-10)


def test_lp_norm_sup_is_max_modulus():
    g = Grid(1, 1.0, 16)
    vals = np.arange(16) * (1.0 + 1.0j)
    f = SampledSymbol(g, vals)
    assert lp_norm(f, math.inf) == pytest.approx(15.0 * math.sqrt(2.0))


def test_lp_norm_rejects_bad_exponent():
    g = Grid(1, 1.0, 16)
    f = SampledSymbol(g, np.zeros(16, dtype=complex))
    for p in (0.5, -1.0, math.nan):
        with pytest.raises(ValueError):
            lp_norm(f, p)


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(min_value=1e-3, max_value=1e3),
       p=st.floats(min_value=1.0, max_value=8.0),
       seed=st.integers(min_value=0, max_value=2 ** 16))
def test_lp_norm_homogeneity(scale, p, seed):
    g = Grid(1, 2.0, 32)
    rng = np.random.default_rng(seed)
    f = SampledSymbol(g, rng.standard_normal(32)
                      + 1j * rng.standard_normal(32))
    scaled = SampledSymbol(g, scale * f.values)
    assert lp_norm(scaled, p) == pytest.approx(scale * lp_norm(f, p),
                                               rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(p=st.floats(min_value=1.0, max_value=8.0),
       seed=st.integers(min_value=0, max_value=2 ** 16))
def test_lp_norm_triangle_inequality(p, seed):
    g = Grid(1, 2.0, 32)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    b = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    fa, fb = SampledSymbol(g, a), SampledSymbol(g, b)
    fab = SampledSymbol(g, a + b)
    assert lp_norm(fab, p) <= lp_norm(fa, p) + lp_norm(fb, p) + 1e-12


# ---------------------------------------------------------------------------
# sphere quadrature

def test_circle_rule_total_measure():
    rule = sphere_rule(2, 64)
    assert rule.weights.sum() == pytest.approx(2.0 * math.pi, abs=1e-12)


def test_sphere_rule_total_measure_and_moment():
    rule = sphere_rule(3, 32)
    assert rule.weights.sum() == pytest.approx(4.0 * math.pi, rel=1e-12)
    moment = np.sum(rule.weights * rule.nodes[:, 2] ** 2)
    assert moment == pytest.approx(4.0 * math.pi / 3.0, abs=1e-10)


def test_arc_rule_weight_sum():
    # int_{-1/2}^{1/2} (1 - t^2)^{-1/2} dt = pi/3
    rule = sphere_rule(2, 64, arc=(-0.5, 0.5))
    assert rule.weights.sum() == pytest.approx(math.pi / 3.0, abs=1e-8)
    assert np.all(np.abs(np.linalg.norm(rule.nodes, axis=1) - 1.0) <= 1e-12)


def test_sphere_rule_rejects_bad_input():
    with pytest.raises(ValueError):
        sphere_rule(4, 32)
    with pytest.raises(ValueError):
        sphere_rule(2, 8)
    with pytest.raises(ValueError):
        sphere_rule(3, 32, arc=(-0.5, 0.5))
    with pytest.raises(ValueError):
        sphere_rule(2, 32, arc=(-1.5, 0.5))


def test_lq_sphere_norm_constants():
    rule = sphere_rule(2, 128)
    ones = np.ones(rule.weights.size)
    assert lq_sphere_norm(ones, 2, rule) == pytest.approx(
        math.sqrt(2.0 * math.pi), rel=1e-12)
    assert lq_sphere_norm(ones, math.inf, rule) == pytest.approx(1.0)
    # g(xi) = xi_1, q=2: int cos^2 = pi
    assert lq_sphere_norm(rule.nodes[:, 0], 2, rule) == pytest.approx(
        math.sqrt(math.pi), rel=1e-12)


def test_lq_sphere_norm_rejects_mismatch():
    rule = sphere_rule(2, 32)
    with pytest.raises(ValueError):
        lq_sphere_norm(np.ones(31), 2, rule)
    with pytest.raises(ValueError):
        lq_sphere_norm(np.full(32, np.nan), 2, rule)


def test_quadrature_refinement_stability():
    rule1 = sphere_rule(2, 128)
    rule2 = sphere_rule(2, 256)

    def g(nodes):
        return np.exp(np.sin(3.0 * np.arctan2(nodes[:, 1], nodes[:, 0])))

    v1 = lq_sphere_norm(g(rule1.nodes), 3.0, rule1)
    v2 = lq_sphere_norm(g(rule2.nodes), 3.0, rule2)
    assert abs(v1 - v2) <= 1e-8 * v1


# ---------------------------------------------------------------------------
# interpolation

def test_interpolate_linear_function_exact():
    g = Grid(2, 2.0, 32)
    f = SampledSymbol.from_function(g, lambda x, y: 2.0 * x - 3.0 * y + 1.0)
    pts = np.array([[0.1, 0.2], [-1.33, 0.77], [0.0, 0.0]])
    got = interpolate_at(f, pts)
    want = 2.0 * pts[:, 0] - 3.0 * pts[:, 1] + 1.0
    assert np.abs(got - want).max() <= 1e-12


def test_interpolate_outside_box_is_zero():
    g = Grid(2, 1.0, 16)
    f = SampledSymbol(g, np.ones((16, 16), dtype=complex))
    assert interpolate_at(f, np.array([5.0, 5.0]))[0] == 0.0


def test_interpolate_rejects_dimension_mismatch():
    g = Grid(2, 1.0, 16)
    f = SampledSymbol(g, np.ones((16, 16), dtype=complex))
    with pytest.raises(ValueError):
        interpolate_at(f, np.zeros((3, 3)))
