"""Property-based checks of the invariants every module promises."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from minsupport.cli import _fmt, to_jsonable
from minsupport.core_model import Ball, GridFunction, Interval, Potential, conjugate, gradient_norm_sq, make_grid
from minsupport.extremals import mt_functional, rayleigh_quotient
from minsupport.norms import F_of_lambda, OrliczContext, holder_product, luxemburg_norm, young_gap
from minsupport.verify import Certificate

FAST = settings(max_examples=40, deadline=None)
finite = st.floats(min_value=0.0, max_value=30.0, allow_nan=False)

DISK = Ball(2, 1.0)
DISK_GRID = make_grid(DISK, 32)
BALL_GRID = make_grid(Ball(3, 1.0), 48)


def random_profile(grid, seed, zero_outer=True):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=grid.nodes.size)
    if zero_outer:
        vals[-1] = 0.0
    return GridFunction(grid, vals, zero_outer=zero_outer)


@FAST
@given(finite, st.floats(min_value=0.0, max_value=1e12, allow_nan=False))
def test_young_gap_nonnegative(U, v):
    assert young_gap(U, v) >= 0.0


@FAST
@given(finite)
def test_young_gap_vanishes_on_exponential(U):
    v = math.exp(U)
    assert young_gap(U, v) <= 1e-12 * v


@FAST
@given(st.integers(0, 10**6), st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_F_convex_in_lambda(seed, l1, l2):
    V = Potential(GridFunction(DISK_GRID, np.random.default_rng(seed).uniform(-2, 20, 33)))
    mid = F_of_lambda(V, 0.5 * (l1 + l2))
    assert mid <= 0.5 * (F_of_lambda(V, l1) + F_of_lambda(V, l2)) + 1e-10


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_luxemburg_triangle_and_homogeneity(seed):
    rng = np.random.default_rng(seed)
    ctx = OrliczContext(DISK, C2=2.5)
    V = Potential(GridFunction(DISK_GRID, rng.uniform(0, 10, 33) * rng.integers(1, 4)))
    W = Potential(GridFunction(DISK_GRID, rng.exponential(3.0, 33)))
    nV, _ = luxemburg_norm(V, ctx)
    nW, _ = luxemburg_norm(W, ctx)
    nVW, _ = luxemburg_norm(Potential(GridFunction(DISK_GRID, V.values + W.values)), ctx)
    assert nVW <= nV + nW + 1e-8
    n2, _ = luxemburg_norm(V.scaled(2.0), ctx)
    assert abs(n2 - 2 * nV) <= 1e-8 * max(1.0, nV)


@FAST
@given(st.integers(0, 10**6), st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3))
def test_gradient_norm_homogeneous(seed, c):
    u = random_profile(BALL_GRID, seed)
    assert math.isclose(gradient_norm_sq(c * u), c * c * gradient_norm_sq(u), rel_tol=1e-12)


@FAST
@given(st.integers(0, 10**6), st.floats(1.0, 2.9), st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3))
def test_rayleigh_scale_invariant(seed, q, c):
    u = random_profile(BALL_GRID, seed)
    assert math.isclose(rayleigh_quotient(c * u, q), rayleigh_quotient(u, q), rel_tol=1e-12)


@FAST
@given(st.integers(0, 10**6), st.floats(0.1, 10.0))
def test_mt_functional_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    vals = np.concatenate([np.cumsum(rng.uniform(0, 1, 32))[::-1], [0.0]]) / 32
    u = GridFunction(DISK_GRID, vals, zero_outer=True)
    assert math.isclose(mt_functional(c * u), mt_functional(u), rel_tol=1e-10)


@FAST
@given(st.floats(1.0 + 1e-9, 1e6))
def test_conjugate_identity(p):
    q = conjugate(p)
    assert math.isclose(1 / p + 1 / q, 1.0, rel_tol=1e-12)
    assert math.isclose(conjugate(q), p, rel_tol=1e-9)


@FAST
@given(st.integers(0, 10**6), st.sampled_from([1.0, 1.2, 1.5, 2.0, 3.0]))
def test_hoelder_step(seed, q):
    rng = np.random.default_rng(seed)
    u = random_profile(BALL_GRID, seed)
    V = Potential(GridFunction(BALL_GRID, rng.normal(size=49) * 5))
    lhs, rhs = holder_product(u, V, q)
    assert lhs <= rhs * (1 + 1e-12) + 1e-14


@FAST
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(1e-9, 1e-2), st.booleans(), st.booleans())
def test_certificate_pass_consistent(lhs, rhs, tol, strict, vacuous):
    c = Certificate("main", [], [], lhs, rhs, tol, strict, vacuous)
    expected = (not vacuous) and (lhs - rhs >= -tol) and (not strict or lhs - rhs > tol)
    assert c.passed == expected
    assert c.to_dict()["slack"] == lhs - rhs


@FAST
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_float_roundtrip(x):
    assert float(_fmt(x)) == x


@given(st.sampled_from([math.inf, -math.inf, math.nan]))
def test_json_nonfinite_as_strings(x):
    out = to_jsonable({"v": [x, np.float64(x)]})
    assert all(isinstance(s, str) for s in out["v"])


@FAST
@given(st.floats(0.2, 5.0), st.floats(-3, 3))
def test_interval_volume_and_weights(b, c):
    g = make_grid(Interval(b, c), 16)
    assert math.isclose(g.weights.sum(), 2 * b, rel_tol=1e-12)
    assert np.all(g.weights > 0)
