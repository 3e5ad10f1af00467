import math

import numpy as np
import pytest
from scipy.special import gamma

from minsupport.core_model import (
    Annulus,
    Ball,
    ExponentPair,
    Grading,
    GridFunction,
    Interval,
    Potential,
    conjugate,
    critical_index,
    gradient_norm_sq,
    laplacian,
    make_grid,
    sphere_area,
    unit_ball_volume,
)


def test_sphere_area_oracle():
    for n in range(1, 8):
        assert sphere_area(n) == pytest.approx(2 * math.pi ** (n / 2) / gamma(n / 2), rel=1e-14)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)


def test_domain_volumes_and_diameters():
    assert Ball(3, 2.0).volume == pytest.approx(4 * math.pi / 3 * 8)
    assert Ball(3, 2.0).diameter == 4.0
    assert Interval(1.5).volume == 3.0
    assert Interval(1.5).diameter == 3.0
    ann = Annulus(3, 0.5, 1.0)
    assert ann.volume == pytest.approx(4 * math.pi / 3 * (1 - 0.125))


@pytest.mark.parametrize("bad", [lambda: Annulus(3, 1.0, 0.5), lambda: Annulus(3, 0.0, 1.0), lambda: Ball(3, -1), lambda: Interval(0)])
def test_domain_validation(bad):
    with pytest.raises(ValueError):
        bad()


def test_exponents():
    assert conjugate(1.0) == math.inf
    assert conjugate(math.inf) == 1.0
    assert conjugate(3.0) == pytest.approx(1.5)
    assert critical_index(3) == 3.0
    assert critical_index(2) == math.inf
    e = ExponentPair(1.5, 3)
    assert e.q == pytest.approx(3.0) and e.critical and not e.subcritical
    e = ExponentPair.from_q(2.0, 3, beta=2.0)
    assert 1 / e.q + 1 / e.r == pytest.approx(1.0)
    assert e.q_hat == pytest.approx(3.0)


def test_grid_ball_volume():
    g = make_grid(Ball(3, 1.0), 100)
    assert g.weights.sum() == pytest.approx(1 / 3, abs=1e-12)
    assert g.measure_factor * g.weights.sum() == pytest.approx(4 * math.pi / 3, abs=1e-12)
    assert np.all(g.weights > 0)


def test_grid_interval_spans_with_unit_weight():
    g = make_grid(Interval(1.0), 64)
    assert g.nodes[0] == -1.0 and g.nodes[-1] == 1.0
    assert g.weights.sum() == pytest.approx(2.0, abs=1e-14)


def test_geometric_grading_toward_origin():
    g = make_grid(Ball(3, 1.0), 64, Grading("geometric", 0.0, 1.05))
    w = np.diff(g.nodes)
    assert w[0] < 1 / 64
    assert np.allclose(w[1:] / w[:-1], 1.05)


def test_grid_errors():
    with pytest.raises(ValueError):
        make_grid(Ball(3, 1.0), 8)
    with pytest.raises(ValueError):
        make_grid(Ball(3, 1.0), 64, Grading("geometric", 0.5))


def test_annulus_weight_polynomial_exact():
    g = make_grid(Annulus(4, 0.3, 1.2), 33)
    assert g.weights.sum() == pytest.approx((1.2**4 - 0.3**4) / 4, rel=1e-14)


def test_gradient_norm_sine():
    # int_0^1 pi^2 cos^2(pi x) dx = pi^2 / 2, P1 error O(h^2)
    errs = []
    for cells in (64, 128, 256):
        g = make_grid(Interval(0.5, 0.5), cells)
        u = GridFunction.sample(g, lambda x: np.sin(math.pi * x))
        errs.append(abs(gradient_norm_sq(u) - math.pi**2 / 2))
    assert errs[-1] < 1e-4
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_gradient_norm_zero_and_homogeneous():
    g = make_grid(Ball(3, 1.0), 32)
    assert gradient_norm_sq(GridFunction.zeros(g)) == 0.0
    u = GridFunction.sample(g, lambda r: np.cos(math.pi * r / 2))
    assert gradient_norm_sq(3.0 * u) == pytest.approx(9.0 * gradient_norm_sq(u), rel=1e-14)


def test_gradient_norm_rejects_bad_weight():
    g = make_grid(Ball(3, 1.0), 32)
    u = GridFunction.sample(g, lambda r: 1 - r**2)
    with pytest.raises(ValueError):
        gradient_norm_sq(u, lambda r: r - 0.5)


def test_laplacian_harmonic_and_quadratic():
    g = make_grid(Annulus(3, 0.5, 1.0), 64)
    lap = laplacian(GridFunction(g, 1 / g.nodes))
    assert np.max(np.abs(lap.values[lap.defined])) < 1e-2
    assert not lap.defined[0] and not lap.defined[-1]
    g = make_grid(Ball(3, 1.0), 64)
    lap = laplacian(GridFunction.sample(g, lambda r: 1 - r**2))
    assert np.allclose(lap.values[lap.defined], -6.0, atol=1e-10)


def test_laplacian_bubble_ratio_second_order():
    errs = []
    for cells in (64, 128):
        g = make_grid(Ball(3, 2.0), cells)
        v = GridFunction.sample(g, lambda r: (1 + r**2) ** -0.5, zero_outer=False)
        lap = laplacian(v)
        x = g.nodes[lap.defined]
        ratio = -lap.values[lap.defined] / v.values[lap.defined]
        errs.append(np.max(np.abs(ratio - 3 / (1 + x**2) ** 2)))
    assert errs[1] < 1e-3
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_gridfunction_boundary_invariants():
    g = make_grid(Interval(0.5, 0.5), 32)
    with pytest.raises(ValueError):
        GridFunction(g, np.ones(33), zero_outer=True)
    with pytest.raises(ValueError):
        GridFunction(g, np.full(33, np.nan))


def test_potential_atoms_only_in_1d():
    g = make_grid(Ball(3, 1.0), 32)
    with pytest.raises(ValueError):
        Potential(grid=g, atoms=((0.5, 1.0),))
    g1 = make_grid(Interval(1.0), 32)
    V = Potential(GridFunction(g1, g1.nodes), atoms=((0.0, -2.0),))
    assert V.positive_part().atoms == ()
    assert V.negative_part().atoms == ((0.0, 2.0),)
