import math

import numpy as np
import pytest

from minsupport.constructions import (
    CATALOG_CLAIMS,
    build,
    euler_lagrange_pair,
    hardy_potential,
    hardy_trial,
    hat_1d,
    manufactured_solution,
    truncated_bubble,
)
from minsupport.core_model import Annulus, Ball, GridFunction, Interval, Potential, make_grid
from minsupport.verify import (
    KINDS,
    Case,
    Certificate,
    Form,
    check_certificate,
    default_residual_tol,
    green_identity_gap,
    minigreen_gap,
    pde_residual,
    record_green_gap,
)

UNIT_INTERVAL = Interval(0.5, 0.5)


def sine(cells=128):
    g = make_grid(UNIT_INTERVAL, cells)
    return g, GridFunction.sample(g, lambda x: np.sin(math.pi * x))


def const(g, c):
    return Potential.from_profile(g, lambda x: np.full_like(np.asarray(x, float), c))


def test_residual_examples():
    g, u = sine()
    assert pde_residual(u, const(g, math.pi**2)) <= 10 * g.h**2
    assert pde_residual(hat_1d().u, hat_1d().V) <= 1e-12
    wrong = [pde_residual(*sine(c)[1:], const(sine(c)[0], 2 * math.pi**2)) for c in (64, 256)]
    assert min(wrong) > 0.5


def test_residual_incompatible_grids():
    _, u = sine(64)
    g2, _ = sine(128)
    with pytest.raises(ValueError):
        pde_residual(u, const(g2, 1.0))


def test_green_gap_sine_second_order():
    gaps = []
    for c in (64, 128):
        g, u = sine(c)
        gaps.append(green_identity_gap(u, const(g, math.pi**2)))
    assert gaps[1] <= 10 * (1 / 128) ** 2
    assert 3.5 <= gaps[0] / gaps[1] <= 4.5


def test_green_gap_hat_exact():
    rec = hat_1d(1.0)
    assert green_identity_gap(rec.u, rec.V) <= 1e-14


def test_green_refuses_non_solution():
    g, u = sine()
    with pytest.raises(ValueError, match="residual"):
        green_identity_gap(u, const(g, 1.0))


def test_minigreen_examples():
    g, u = sine()
    assert minigreen_gap(u, lambda x: np.zeros_like(np.asarray(x, float))) == 0.0
    g = make_grid(Interval(1.0), 128)
    u = GridFunction.sample(g, lambda x: np.sin(math.pi * x))
    assert minigreen_gap(u, lambda x: np.asarray(x, float)) <= 10 * g.h**2
    rng = np.random.default_rng(7)
    for _ in range(5):
        cells = 128
        u = hardy_trial(Ball(3, 1.0), int(rng.integers(1000)), cells=cells)
        assert minigreen_gap(u, lambda r: np.asarray(r, float) ** 2) <= 10 * u.grid.h**2


def test_main_on_sine():
    g, u = sine()
    cert = check_certificate("main", Case(u, const(g, math.pi**2), exponent={"r": math.inf}))
    assert cert.quantity("K") == pytest.approx(1 / math.pi, rel=1e-14)
    assert cert.lhs == pytest.approx(1.0, abs=1e-6)
    assert cert.passed and not cert.vacuous
    assert cert.metadata["K_provenance"] == "closed_form"


def test_main_zero_potential_is_vacuous():
    g, u = sine()
    cert = check_certificate("main", Case(u, Potential(GridFunction.zeros(g)), exponent={"q": 1.0}))
    assert cert.lhs == 0.0
    assert cert.vacuous and not cert.passed
    assert "vacuous" in cert.metadata["annotation"]


def test_critical_on_truncated_bubble():
    prev = math.inf
    for R in (10.0, 100.0):
        cert = check_certificate("critical", truncated_bubble(3, R))
        assert cert.strict and cert.strict_margin and cert.passed
        assert 1 < cert.lhs < prev
        prev = cert.lhs


def test_one_d_hat_equality():
    cert = check_certificate("one_d_measure", hat_1d(1.0))
    assert cert.lhs == pytest.approx(2.0, abs=1e-12)
    assert cert.slack == pytest.approx(0.0, abs=1e-12)
    assert cert.passed


def test_one_d_mollified_side_conditions():
    cert = check_certificate("one_d_measure", build("mollified_hat"))
    assert cert.strict_margin
    assert all(c["holds"] for c in cert.metadata["side_conditions"])


def test_first_order_zero_W_matches_main():
    rec = euler_lagrange_pair(UNIT_INTERVAL, 2.0)
    a = check_certificate("main", rec)
    b = check_certificate("first_order", Case.from_record(rec, W=lambda x: np.zeros_like(np.asarray(x, float))))
    assert a.quantities == b.quantities
    assert a.lhs == b.lhs and a.steps == b.steps


def test_first_order_manufactured():
    g = make_grid(Ball(3, 1.0), 128)
    u = GridFunction.sample(g, lambda r: np.cos(math.pi * r / 2))
    rec = manufactured_solution(u, W=lambda r: 0.5 * np.asarray(r, float))
    cert = check_certificate("first_order", Case.from_record(rec, exponent={"q": 2.0}))
    assert cert.passed and cert.slack >= 0
    assert all(s["holds"] for s in cert.steps)
    rough = check_certificate("first_order_rough", Case.from_record(rec, exponent={"q": 2.0}))
    assert rough.passed


def test_eigen_shift_monotone_in_E():
    g = make_grid(Ball(3, 1.0), 64)
    u = GridFunction.sample(g, lambda r: np.cos(math.pi * r / 2))
    V = manufactured_solution(u, E=-2.0).V
    certs = [check_certificate("eigen_shift", Case(u, V, exponent={"q": 1.5}, E=E)) for E in (0.0, -0.5, -1.0, -2.0)]
    lhs = [c.lhs for c in certs]
    assert all(a >= b for a, b in zip(lhs, lhs[1:]))
    # only E = -2 makes (u, V) a solution
    assert [c.vacuous for c in certs] == [True, True, True, False]
    assert certs[-1].passed


def test_eigen_shift_rejects_positive_E():
    g, u = sine()
    with pytest.raises(ValueError, match="'E'"):
        check_certificate("eigen_shift", Case(u, const(g, math.pi**2), exponent={"q": 1}, E=1.0))


def test_volume_scaling_covariance():
    vals = []
    for t in (1.0, 2.0, 0.5):
        dom = Ball(3, t)
        g = make_grid(dom, 128)
        u = GridFunction.sample(g, lambda r, t=t: np.cos(math.pi * r / (2 * t)))
        rec = manufactured_solution(u)
        vals.append(check_certificate("volume", Case(rec.u, rec.V, exponent={"q": 2.0})).lhs)
    assert vals[1] == pytest.approx(vals[0], rel=1e-8)
    assert vals[2] == pytest.approx(vals[0], rel=1e-8)


def test_hardy_certificate_with_potential():
    dom = Ball(3, 1.0)
    g = make_grid(dom, 128)
    V = hardy_potential(3, "origin", dom, margin=0.5, grid=g)
    for seed in range(10):
        u = hardy_trial(dom, seed, grid=g)
        cert = check_certificate("hardy", Case(u, V, hardy_weight="origin"))
        assert cert.quantity("obstruction") > 0
        assert cert.passed


def test_annulus_radial_equality():
    rec = euler_lagrange_pair(Annulus(3, 0.5, 1.0), 2.0, cells=128)
    cert = check_certificate("annulus_radial", rec)
    assert abs(cert.slack) <= 1e-6


def test_gradient_power_manufactured():
    g = make_grid(UNIT_INTERVAL, 128)
    u = GridFunction.sample(g, lambda x: np.sin(math.pi * x))
    for beta, q in ((1.0, 2.0), (1.5, 4.0), (2.0, 2.0)):
        # slopes vanish only at the midpoint, where the cell average stays positive
        rec = manufactured_solution(u, gradient_power=True, beta=beta)
        cert = check_certificate("gradient_power", Case.from_record(rec, exponent={"q": q}))
        assert cert.passed, (beta, cert.lhs)


def test_unknown_kind_and_missing_fields():
    g, u = sine()
    with pytest.raises(ValueError, match="unknown certificate kind"):
        check_certificate("nope", Case(u, const(g, 1.0)))
    with pytest.raises(ValueError, match="'exponent'"):
        check_certificate("main", Case(u, const(g, math.pi**2)))
    with pytest.raises(ValueError, match="'beta'"):
        check_certificate("nonlinear_power", Case(u, const(g, 1.0), exponent={"q": 2}))


def test_certificate_roundtrip():
    cert = check_certificate("main", build("sine_eigenpair"))
    d = cert.to_dict()
    back = Certificate.from_dict(d)
    assert back.to_dict() == d
    assert d["pass"] == cert.passed
    assert d["slack"] == cert.lhs - cert.rhs


def test_chain_coherence_on_catalog():
    for name, claims in CATALOG_CLAIMS.items():
        rec = build(name)
        for kind in claims:
            cert = check_certificate(kind, rec)
            for step in cert.steps:
                assert step["holds"], (name, kind, step)
            assert cert.slack == cert.lhs - cert.rhs


def test_equality_witnesses():
    for name, claims in CATALOG_CLAIMS.items():
        rec = build(name)
        for kind, tol in claims.items():
            cert = check_certificate(kind, rec)
            assert cert.passed, (name, kind)
            if tol is not None:
                assert abs(cert.slack) <= tol, (name, kind, cert.slack)


def test_green_gap_all_claimed_records():
    for name, claims in CATALOG_CLAIMS.items():
        if not claims:
            continue
        rec = build(name)
        assert record_green_gap(rec) <= default_residual_tol(rec.grid), name


def test_form_validation():
    with pytest.raises(ValueError):
        Form("nope")
    with pytest.raises(ValueError):
        Form("power")
    with pytest.raises(ValueError):
        Form("first_order")


def test_kinds_listed():
    assert len(KINDS) == 15 and len(set(KINDS)) == 15
