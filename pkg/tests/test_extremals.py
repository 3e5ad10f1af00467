import math

import mpmath
import numpy as np
import pytest

from minsupport.core_model import Annulus, Ball, GridFunction, Interval, gradient_norm_sq, make_grid, sphere_area, unit_volume_ball
from minsupport.extremals import (
    UNIT,
    WeightPair,
    bessel_relation,
    bessel_zero,
    closed_form_constant,
    dilation_scale,
    estimate_mt_constant,
    euler_lagrange_potential,
    maximize_constant,
    moser_grid,
    moser_profile,
    mt_extremal_data,
    mt_functional,
    observed_order,
    radial_constant_relation,
    rayleigh_quotient,
    talenti_constant,
)
from minsupport.norms import lebesgue_norm, young_gap

UNIT_INTERVAL = Interval(0.5, 0.5)


def test_rayleigh_sine():
    g = make_grid(UNIT_INTERVAL, 512)
    u = GridFunction.sample(g, lambda x: np.sin(math.pi * x))
    assert rayleigh_quotient(u, 1.0) == pytest.approx(1 / math.pi, rel=1e-5)
    assert rayleigh_quotient(2.0 * u, 1.0) == pytest.approx(rayleigh_quotient(u, 1.0), rel=1e-15)


def test_rayleigh_zero_gradient():
    g = make_grid(UNIT_INTERVAL, 32)
    with pytest.raises(ValueError):
        rayleigh_quotient(GridFunction.zeros(g), 1.0)


def test_maximize_interval_q1():
    res = maximize_constant(UNIT_INTERVAL, 1.0, size=256)
    assert res.K == pytest.approx(1 / math.pi, abs=1e-4)
    assert np.all(res.u.values >= 0)
    assert res.K == rayleigh_quotient(res.u, 1.0)
    assert gradient_norm_sq(res.u) == pytest.approx(1.0, rel=1e-12)


def test_maximize_q_infinity():
    res = maximize_constant(Interval(1.0), math.inf)
    assert res.K == pytest.approx(math.sqrt(0.5), abs=1e-3)


def test_maximize_rejects_critical():
    with pytest.raises(ValueError):
        maximize_constant(Ball(3, 1.0), 3.0)
    with pytest.raises(ValueError):
        maximize_constant(Ball(3, 1.0), math.inf)


def test_unit_volume_ball_bessel():
    res = maximize_constant(unit_volume_ball(3), 1.0, size=512, refine=True)
    omega = 4 * math.pi / 3
    assert res.extrapolated == pytest.approx(1 / (math.pi * omega ** (1 / 3)), rel=1e-5)


def test_monotone_ascent_and_symmetry():
    res = maximize_constant(Interval(1.0), 2.5, size=128)
    h = np.array(res.history)
    assert np.all(np.diff(h) >= -1e-12)
    assert np.allclose(res.u.values, res.u.values[::-1], atol=1e-8)


@pytest.mark.parametrize("domain,q", [(UNIT_INTERVAL, 2.0), (Ball(3, 1.0), 2.0), (Annulus(3, 0.5, 1.0), 2.0)])
def test_refinement_ratio(domain, q):
    Ks = [maximize_constant(domain, q, size=s).K for s in (64, 128, 256)]
    ratio = (Ks[1] - Ks[0]) / (Ks[2] - Ks[1])
    assert 3.5 <= ratio <= 4.5
    assert 1.8 <= observed_order(Ks) <= 2.2


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 3.0])
def test_euler_lagrange_equality(q):
    res = maximize_constant(UNIT_INTERVAL, q, size=128)
    V = euler_lagrange_potential(res)
    r = q / (q - 1) if q > 1 else math.inf
    assert res.K**2 * lebesgue_norm(V, r) == pytest.approx(1.0, abs=1e-6)
    assert np.all(V.values >= 0)
    if q == 1.0:
        assert np.ptp(V.values) <= 1e-8 * V.values.max()
        assert V.values[0] == pytest.approx(math.pi**2, rel=1e-3)


def test_euler_lagrange_rejects_infinity():
    res = maximize_constant(Interval(1.0), math.inf)
    with pytest.raises(ValueError):
        euler_lagrange_potential(res)


def test_weighted_maximize():
    w = WeightPair(lambda x: 1 + np.asarray(x) ** 2, lambda x: 2 - np.asarray(x))
    res = maximize_constant(UNIT_INTERVAL, 2.0, w, size=128)
    V = euler_lagrange_potential(res)
    assert res.K**2 * lebesgue_norm(V, 2.0, w.b) == pytest.approx(1.0, abs=1e-10)
    assert res.K < maximize_constant(UNIT_INTERVAL, 2.0, size=128).K * 1.5


def test_talenti_constant_high_precision():
    mpmath.mp.dps = 50
    ref = (3 * mpmath.pi) ** mpmath.mpf(-0.5) * (mpmath.gamma(3) / mpmath.gamma(mpmath.mpf(1.5))) ** (mpmath.mpf(1) / 3)
    assert talenti_constant(3) == pytest.approx(float(ref), abs=1e-12)
    for n in (4, 5, 7):
        ref = (n * (n - 2) * mpmath.pi) ** mpmath.mpf(-0.5) * (mpmath.gamma(n) / mpmath.gamma(mpmath.mpf(n) / 2)) ** (mpmath.mpf(1) / n)
        assert talenti_constant(n) == pytest.approx(float(ref), rel=1e-13)
    with pytest.raises(ValueError):
        talenti_constant(2)


def test_bessel_zero_oracle():
    assert bessel_zero(0.0) == pytest.approx(float(mpmath.besseljzero(0, 1)), abs=1e-13)
    assert bessel_zero(1.0) == pytest.approx(float(mpmath.besseljzero(1, 1)), abs=1e-13)
    assert bessel_zero(0.5) == math.pi


def test_closed_forms():
    assert closed_form_constant(Interval(2.0), 1.0) == pytest.approx(4 / math.pi)
    assert closed_form_constant(Interval(2.0), math.inf) == 1.0
    assert closed_form_constant(Ball(3, 1.0), 3.0) == talenti_constant(3)
    assert closed_form_constant(Annulus(3, 0.5, 1), 2.0) is None


def test_radial_relation():
    assert radial_constant_relation(0.7, 1.0, 5) == 0.7
    assert radial_constant_relation(1.0, 2.0, 3) == pytest.approx((4 * math.pi) ** -0.25)


def test_radial_relation_consistency():
    # the 1D weighted quotient of u_* times the conversion equals the full radial quotient
    res = maximize_constant(Annulus(3, 0.5, 1.0), 2.0, size=128)
    one_d = rayleigh_quotient(res.u, 2.0, full=False)
    assert radial_constant_relation(one_d, 2.0, 3) == pytest.approx(rayleigh_quotient(res.u, 2.0), rel=1e-10)


def test_dilation():
    assert dilation_scale(0.3, 5.0, 3, 3.0) == 0.3
    assert dilation_scale(0.3, 1.0, 3, 2.0) == 0.3
    assert dilation_scale(math.sqrt(0.5), 2.0, 1, math.inf) == pytest.approx(1.0)
    K1 = maximize_constant(Ball(3, 1.0), 2.0, size=128).K
    K2 = maximize_constant(Ball(3, 2.0), 2.0, size=128).K
    assert dilation_scale(K1, 2.0, 3, 2.0) == pytest.approx(K2, rel=1e-12)


def test_bessel_relation_convention():
    rep = bessel_relation()
    assert rep["convention"] == "unit_ball_volume"
    for row in rep["dimensions"].values():
        assert row["K_squared_matches_inverse_eigenvalue"]
        assert not row["K_matches_inverse_eigenvalue"]
    assert rep["dimensions"][1]["K"] == pytest.approx(1 / math.pi, abs=1e-3)


def test_mt_functional_scale_invariance():
    g = make_grid(Ball(2, 1.0), 128)
    u = GridFunction.sample(g, lambda r: 1 - r**2)
    assert mt_functional(u) > 0
    assert mt_functional(3.0 * u) == pytest.approx(mt_functional(u), rel=1e-10)
    with pytest.raises(ValueError):
        mt_functional(GridFunction.zeros(g))


def test_mt_extremal_data_identity():
    g = make_grid(Ball(2, 1.0), 128)
    u = GridFunction.sample(g, lambda r: np.cos(math.pi * r / 2))
    U, V, lam = mt_extremal_data(u)
    assert g.integrate(U * V.values) == pytest.approx(4 * math.pi, abs=1e-8)
    assert np.all(V.values > 0)
    assert np.max(np.abs(young_gap(U, V.values / lam))) <= 1e-10


def test_moser_profile_unit_energy():
    d = 0.01
    g = moser_grid(d, 256)
    u = GridFunction.sample(g, moser_profile(d), zero_inner=False, zero_outer=True)
    assert gradient_norm_sq(u) == pytest.approx(1.0, rel=1e-3)


@pytest.mark.slow
def test_mt_constant_refinement_stable():
    C1, d1, _ = estimate_mt_constant(cells=256)
    C2, d2, _ = estimate_mt_constant(cells=512)
    assert abs(C1 - C2) <= 1e-3 * C2
    assert C1 > 1.0
