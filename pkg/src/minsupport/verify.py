"""Certificates: each theorem's inequality chain evaluated on a concrete pair.

A certificate records every intermediate quantity of the chain

    ||u||_{2q}^2 <= K^2 ||grad u||^2 = K^2 int V u^2 <= K^2 int V_+ u^2 <= K^2 ||u||_{2q}^2 ||V_+||_r

(or its variant for the kind at hand), the headline ``lhs >= rhs``, and the
weak residual of the equation.  Certificates on pairs that do not solve the
equation are *vacuous*: they never pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .core_model import (
    Annulus,
    Ball,
    Domain,
    ExponentPair,
    GridFunction,
    Interval,
    Potential,
    RadialGrid,
    conjugate,
    critical_index,
    divergence,
    first_order_load,
    gradient_norm_sq,
    gradient_power_average,
    stiffness_apply,
    unit_volume_ball,
)
from .extremals import (
    UNIT,
    WeightPair,
    closed_form_constant,
    dilation_scale,
    maximize_constant,
    radial_constant_relation,
    rayleigh_quotient,
    talenti_constant,
)
from .norms import (
    F_of_lambda,
    M,
    OrliczContext,
    lebesgue_norm,
    luxemburg_norm,
    total_variation,
)

KINDS = (
    "main",
    "volume",
    "eigen_shift",
    "critical",
    "hardy",
    "orlicz_lambda",
    "orlicz_norm",
    "weighted",
    "annulus_radial",
    "first_order",
    "first_order_rough",
    "exact_W",
    "nonlinear_power",
    "gradient_power",
    "one_d_measure",
)

STRICT_KINDS = {"critical", "hardy"}


# ---------------------------------------------------------------------------
# Scenario and certificate records
# ---------------------------------------------------------------------------


@dataclass
class Case:
    """Everything a certificate may need.  Only ``u`` and ``V`` are always required."""

    u: GridFunction
    V: Optional[Potential] = None
    exponent: object = None
    W: object = None
    phi: Optional[Callable] = None
    beta: Optional[float] = None
    E: float = 0.0
    weights: Optional[WeightPair] = None
    K: Optional[float] = None
    K_provenance: Optional[str] = None
    hardy_weight: Optional[str] = None
    C2: Optional[float] = None
    s: Optional[float] = None
    lambda_scan: int = 50
    tol: float = 1e-6
    residual_tol: Optional[float] = None

    @classmethod
    def from_record(cls, rec, **overrides) -> "Case":
        sc = dict(rec.scenario)
        fields = {
            "u": rec.u,
            "V": rec.V,
            "exponent": sc.get("exponent"),
            "W": sc.get("W"),
            "phi": sc.get("phi"),
            "beta": sc.get("beta"),
            "E": sc.get("E", 0.0) or 0.0,
            "weights": sc.get("weights"),
            "K": sc.get("K"),
            "K_provenance": sc.get("K_provenance"),
        }
        fields.update(overrides)
        return cls(**fields)

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @property
    def domain(self) -> Domain:
        return self.u.grid.domain

    @property
    def q(self) -> float:
        e = self.exponent
        if e is None:
            raise ValueError("scenario is missing the field 'exponent'")
        if isinstance(e, ExponentPair):
            return e.q
        if isinstance(e, dict):
            if "q" in e:
                return float(e["q"])
            if "r" in e:
                return conjugate(float(e["r"]))
            raise ValueError("field 'exponent' needs 'q' or 'r'")
        return float(e)

    @property
    def r(self) -> float:
        return conjugate(self.q)

    def need(self, *names) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ValueError(f"scenario is missing the field {name!r}")


@dataclass
class Certificate:
    kind: str
    quantities: List[Tuple[str, float]]
    steps: List[dict]
    lhs: float
    rhs: float
    tol: float
    strict: bool
    vacuous: bool = False
    residual: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        if self.vacuous or not math.isfinite(self.slack):
            return False
        ok = self.slack >= -self.tol
        if self.strict:
            ok = ok and self.strict_margin
        extra = self.metadata.get("side_conditions")
        if extra:
            ok = ok and all(c["holds"] for c in extra)
        return bool(ok)

    @property
    def strict_margin(self) -> bool:
        """Whether the slack clears +tol (sharpness cannot be told from 0 below tol)."""
        return bool(self.slack > self.tol)

    def quantity(self, name: str) -> float:
        for k, v in self.quantities:
            if k == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "quantities": [[k, v] for k, v in self.quantities],
            "steps": self.steps,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "tol": self.tol,
            "strict": self.strict,
            "strict_margin": self.strict_margin,
            "vacuous": self.vacuous,
            "residual": self.residual,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        return cls(
            d["kind"],
            [(k, v) for k, v in d["quantities"]],
            d["steps"],
            d["lhs"],
            d["rhs"],
            d["tol"],
            d["strict"],
            d["vacuous"],
            d["residual"],
            d["metadata"],
        )


# ---------------------------------------------------------------------------
# Weak residuals and Green identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Form:
    """Which equation the residual tests.

    ``plain``: -Lap u = (V + E) u; ``weighted``: -div(a grad u) = b V u;
    ``first_order``: -Lap u = V u + W . grad u; ``power``: -Lap u = V |u|^{beta-1} u;
    ``gradient_power``: -Lap u = V |grad u|^beta.
    """

    kind: str = "plain"
    weights: WeightPair = UNIT
    W: object = None
    beta: Optional[float] = None
    E: float = 0.0

    def __post_init__(self):
        if self.kind not in ("plain", "weighted", "first_order", "power", "gradient_power"):
            raise ValueError(f"unknown form {self.kind!r}")
        if self.kind == "first_order" and self.W is None:
            raise ValueError("the first-order form needs W")
        if self.kind in ("power", "gradient_power") and self.beta is None:
            raise ValueError(f"the {self.kind} form needs beta")


def _atom_loads(u: GridFunction, V: Potential, power: float = 1.0) -> np.ndarray:
    """Atoms contribute ``mass * u(x)|u(x)|^{p-1} * phi_i(x)``."""
    out = np.zeros(u.grid.nodes.size)
    x = u.grid.nodes
    for loc, mass in V.atoms:
        k = int(np.clip(np.searchsorted(x, loc) - 1, 0, x.size - 2))
        t = (loc - x[k]) / (x[k + 1] - x[k])
        uval = float(u(loc))
        val = mass * uval * abs(uval) ** (power - 1.0)
        out[k] += val * (1.0 - t)
        out[k + 1] += val * t
    return out


def _exact_mode(u: GridFunction, V: Potential) -> bool:
    """Both u and V carry exact formulas, so the weak form can use them directly."""
    return u.profile is not None and (V.density is None or V.profile is not None)


def profile_slopes(u: GridFunction) -> np.ndarray:
    """u' at the Gauss points: fourth-order central differences of the exact profile.

    Gauss points are interior to their cells and breakpoints sit on nodes, so
    the stencil (a thousandth of the cell width) never straddles a kink.
    """
    grid = u.grid
    x = grid.gauss_points
    d = 1e-3 * grid.widths[:, None] * np.ones_like(x)
    f = u.profile
    return (8.0 * (f(x + d) - f(x - d)) - (f(x + 2 * d) - f(x - 2 * d))) / (12.0 * d)


def _slopes_at_gauss(u: GridFunction, exact: bool) -> np.ndarray:
    if exact:
        return profile_slopes(u)
    return u.slopes()[:, None] * np.ones_like(u.grid.gauss_points)


def _load(u: GridFunction, V: Potential, form: Form, exact: bool = False) -> np.ndarray:
    """``int rhs * phi_i`` for every node (sphere-area factor omitted)."""
    grid = u.grid
    if form.E:
        V = V.shifted(form.E)
    b = form.weights.b if form.kind == "weighted" else None
    if form.kind == "gradient_power":
        if V.atoms:
            raise ValueError("atoms are not supported in the gradient-power form")
        if V.density is not None and V.profile is not None:
            g = np.abs(_slopes_at_gauss(u, exact)) ** form.beta
            gw = grid.gauss_weights * np.asarray(V.profile(grid.gauss_points), dtype=float) * g
            return _scatter(grid, gw)
        return grid.weights * gradient_power_average(u, form.beta) * V.values
    p = form.beta if form.kind == "power" else 1.0
    if V.density is not None and V.profile is not None:
        ug = u.at_gauss()
        vg = np.asarray(V.profile(grid.gauss_points), dtype=float) * np.ones_like(ug)
        gw = grid.gauss_weights * grid.weight_at_gauss(b) * vg * ug * np.abs(ug) ** (p - 1.0)
        load = _scatter(grid, gw)
    else:
        load = grid.mass(b) * V.values * u.values * np.abs(u.values) ** (p - 1.0)
    load = load + _atom_loads(u, V, p)
    if form.kind == "first_order":
        if exact:
            gw = grid.gauss_weights * grid.weight_at_gauss(form.W) * profile_slopes(u)
            load = load + _scatter(grid, gw)
        else:
            load = load + first_order_load(u, form.W)
    return load


def _scatter(grid: RadialGrid, gw: np.ndarray) -> np.ndarray:
    from .core_model import _PHI_L, _PHI_R

    out = np.zeros(grid.nodes.size)
    out[:-1] += gw @ _PHI_L
    out[1:] += gw @ _PHI_R
    return out


def _stiffness_load(u: GridFunction, a, exact: bool) -> np.ndarray:
    """``int a u' psi_i'`` for every node."""
    grid = u.grid
    if not exact:
        return stiffness_apply(grid, u.values, a)
    flux = (grid.gauss_weights * grid.weight_at_gauss(a) * profile_slopes(u)).sum(axis=1) / grid.widths
    out = np.zeros(grid.nodes.size)
    out[:-1] -= flux
    out[1:] += flux
    return out


def residual_vector(u: GridFunction, V: Potential, form: Form = Form()) -> Tuple[np.ndarray, np.ndarray]:
    """Weak residual ``r_i`` and the stiffness part ``int a u' psi_i'`` on the hat basis."""
    if not V.grid.same_as(u.grid):
        raise ValueError("u and V live on incompatible grids")
    exact = _exact_mode(u, V)
    a = form.weights.a if form.kind == "weighted" else None
    lhs = _stiffness_load(u, a, exact)
    return lhs - _load(u, V, form, exact), lhs


def pde_residual(u: GridFunction, V: Potential, form: Form = Form()) -> float:
    """Relative weak residual ``max_i |r_i| / max_i |(A u)_i|`` over free nodes.

    ``r_i = int a u' psi_i' - int rhs psi_i`` on the hat basis psi_i.  Both
    vectors are loads (integrals against hats), so the ratio is O(h^2) for an
    exact pair and O(1) for a wrong potential.
    """
    r, lhs = residual_vector(u, V, form)
    free = u.free
    den = float(np.max(np.abs(lhs[free])))
    num = float(np.max(np.abs(r[free])))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def default_residual_tol(grid: RadialGrid) -> float:
    return 10.0 * grid.h**2


def _potential_energy(u: GridFunction, V: Potential, b=None, power: float = 1.0) -> float:
    """``int V |u|^{1+p} b`` (atoms included); exact profiles use Gauss quadrature."""
    grid = u.grid
    if V.density is not None and V.profile is not None:
        ug = u.at_gauss()
        val = grid.integrate(lambda x: np.asarray(V.profile(x), dtype=float) * np.abs(ug) ** (1.0 + power), weight=b)
    else:
        val = grid.measure_factor * float(np.dot(grid.mass(b), V.values * np.abs(u.values) ** (1.0 + power)))
    for loc, mass in V.atoms:
        val += mass * abs(float(u(loc))) ** (1.0 + power)
    return val


def green_identity_gap(u: GridFunction, V: Potential, w: WeightPair = UNIT, tol: Optional[float] = None, form: Optional[Form] = None) -> float:
    """``|int a |grad u|^2 - int V u^2 b|`` relative to the energy; refuses non-solutions."""
    form = form or (Form("weighted", w) if not w.unit else Form())
    tol = default_residual_tol(u.grid) if tol is None else tol
    res = pde_residual(u, V, form)
    if not res <= tol:
        raise ValueError(f"Green's identity needs a solution; measured residual {res:.3e} > {tol:.3e}")
    energy = gradient_norm_sq(u, w.a)
    pot = _potential_energy(u, V, w.b, form.beta if form.kind == "power" else 1.0)
    return abs(energy - pot) / energy


def record_form(rec) -> Form:
    """The equation a construction record solves, read off its scenario."""
    sc = rec.scenario
    kind = sc.get("form")
    w = sc.get("weights") or UNIT
    if kind is None:
        if sc.get("W") is not None and sc.get("weights") is None:
            kind = "first_order"
        elif not w.unit:
            kind = "weighted"
        else:
            kind = "plain"
    return Form(kind, w, sc.get("W") if kind == "first_order" else None, sc.get("beta"), sc.get("E") or 0.0)


def record_green_gap(rec) -> float:
    """Green's identity gap in whichever form the record solves."""
    form = record_form(rec)
    w = form.weights if form.kind == "weighted" else UNIT
    return green_identity_gap(rec.u, rec.V, w, form=form)


def minigreen_gap(u: GridFunction, W) -> float:
    """``|int grad(u^2) . W + int u^2 div W|`` relative to the larger term.

    ``W`` is the radial component w(rho) of W = w x/rho, as a callable or a
    GridFunction.  The first integral uses Gauss quadrature of the P1
    interpolant, the second the nodal rule with a three-point divergence.
    """
    grid = u.grid
    if not (u.values[0] == 0.0 or not grid.domain.dirichlet[0]) or u.values[-1] != 0.0:
        raise ValueError("u must vanish on the boundary")
    wg = grid.weight_at_gauss(W)
    ug = grid.interpolate(u.values)
    t1 = grid.measure_factor * float(np.sum(grid.gauss_weights * wg * 2.0 * ug * u.slopes()[:, None]))
    wf = W if isinstance(W, GridFunction) else GridFunction(grid, np.asarray(W(grid.nodes), dtype=float) * np.ones(grid.nodes.size))
    div = divergence(wf)
    t2 = grid.measure_factor * float(np.dot(grid.weights, u.values**2 * div.values))
    scale = max(abs(t1), abs(t2))
    return 0.0 if scale == 0.0 else abs(t1 + t2) / scale


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def sobolev_constant(case: Case, q: float, weights: WeightPair = UNIT, kind: str = "main") -> Tuple[float, str]:
    """K with provenance: supplied, closed form, or variational on the case grid."""
    domain = case.domain
    if case.K is not None:
        return float(case.K), case.K_provenance or "supplied"
    if kind in ("critical",) or (domain.n >= 3 and math.isclose(q, critical_index(domain.n), rel_tol=1e-12)):
        return talenti_constant(domain.n), "closed_form:talenti"
    has_profile = case.V is not None and (case.V.density is None or case.V.profile is not None)
    if weights.unit and has_profile:
        cf = closed_form_constant(domain, q)
        if cf is not None:
            return cf, "closed_form"
    res = maximize_constant(domain, q, weights, grid=case.grid)
    return res.K, "variational"


def _norm_quadrature(provenance: str, V: Potential) -> str:
    if provenance.startswith("closed_form") and V.density is not None and V.profile is not None and not V.atoms:
        return "gauss"
    return "nodal"


def _potential_norm(V: Potential, r: float, quad: str, b=None) -> float:
    """||V||_r of a potential; atoms count toward r = 1 (total variation)."""
    if V.atoms:
        if r != 1:
            raise ValueError("potentials with atoms only have the r = 1 (measure) norm")
        return total_variation(V)
    if V.density is None:
        return 0.0
    if quad == "gauss" and math.isfinite(r):
        return lebesgue_norm(V, r, b, quadrature="gauss")
    return lebesgue_norm(V, r, b)


def _u_norm(u: GridFunction, p: float, quad: str, b=None) -> float:
    if quad == "gauss" and math.isfinite(p) and u.profile is not None:
        return lebesgue_norm(u, p, b, quadrature="gauss")
    return lebesgue_norm(u, p, b)


def _step(name, left, relation, right, tol) -> dict:
    if relation == "<=":
        slack = right - left
    elif relation == ">=":
        slack = left - right
    else:
        slack = -abs(left - right)
    scale = max(1.0, abs(left), abs(right))
    return {"name": name, "left": left, "relation": relation, "right": right, "slack": slack, "holds": bool(slack >= -tol * scale)}


# ---------------------------------------------------------------------------
# Certificate kinds
# ---------------------------------------------------------------------------


def _gate(case: Case, form: Form) -> Tuple[float, float, bool]:
    tol = case.residual_tol if case.residual_tol is not None else default_residual_tol(case.grid)
    res = pde_residual(case.u, case.V, form)
    return res, tol, not res <= tol


def _chain(case: Case, V: Potential, q: float, K: float, quad: str, weights: WeightPair = UNIT, use_positive: bool = True, step_tol: Optional[float] = None):
    """Sobolev, Green, positivity and Hoelder steps of the basic chain.

    Steps compare exact constants with P1 quantities, so by default they are
    held to the discretization scale ``max(tol, 10 h^2)``.
    """
    if step_tol is None:
        step_tol = max(case.tol, default_residual_tol(case.grid))
    u = case.u
    r = conjugate(q)
    u2q = _u_norm(u, 2.0 * q, quad, weights.b) if math.isfinite(q) else float(np.max(np.abs(u.values)))
    energy = gradient_norm_sq(u, weights.a)
    Vp = V.positive_part()
    pot = _potential_energy(u, V, weights.b)
    pot_plus = _potential_energy(u, Vp, weights.b)
    normV = _potential_norm(Vp if use_positive else V.absolute(), r, quad, weights.b)
    q_list = [
        ("K", K),
        ("norm_u_2q_sq", u2q**2),
        ("energy", energy),
        ("potential_energy", pot),
        ("positive_potential_energy", pot_plus),
        ("norm_V_r", normV),
    ]
    steps = [
        _step("sobolev", u2q**2, "<=", K * K * energy, step_tol),
        _step("green", energy, "=", pot, step_tol),
        _step("positive_part", pot, "<=", pot_plus, step_tol),
        _step("hoelder", pot_plus, "<=", u2q**2 * normV, step_tol),
    ]
    return q_list, steps, normV


def _meta(case: Case, provenance: str, quad: str, **extra) -> dict:
    return {
        "cells": case.grid.size,
        "h": case.grid.h,
        "domain": repr(case.domain),
        "K_provenance": provenance,
        "norm_quadrature": quad,
        **extra,
    }


def _finish(kind, case, q_list, steps, lhs, rhs, form=None, strict=False, gate=True, meta=None) -> Certificate:
    residual = None
    vacuous = False
    meta = dict(meta or {})
    if gate:
        residual, rtol, vacuous = _gate(case, form or Form())
        meta["residual_tol"] = rtol
        if vacuous:
            meta["annotation"] = "vacuous-or-trivial: the pair does not solve the equation"
    if lhs == 0.0 and not vacuous:
        meta["annotation"] = "vacuous-or-trivial: zero potential admits only trivial solutions"
    q_list = list(q_list) + [("lhs", lhs), ("rhs", rhs)]
    return Certificate(kind, q_list, steps, float(lhs), float(rhs), case.tol, strict, vacuous, residual, meta)


def _check_main(case: Case, kind: str = "main") -> Certificate:
    case.need("V")
    q = case.q
    K, prov = sobolev_constant(case, q)
    quad = _norm_quadrature(prov, case.V)
    V = case.V
    q_list, steps, normV = _chain(case, V, q, K, quad)
    lhs = K * K * normV
    return _finish(kind, case, q_list, steps, lhs, 1.0, meta=_meta(case, prov, quad, q=q, r=conjugate(q)))


def _check_eigen_shift(case: Case) -> Certificate:
    case.need("V")
    if case.E > 0:
        raise ValueError(f"field 'E' must be <= 0, got {case.E}")
    q = case.q
    K, prov = sobolev_constant(case, q)
    quad = _norm_quadrature(prov, case.V)
    Vs = case.V.shifted(case.E)
    q_list, steps, normVs = _chain(case, Vs, q, K, quad)
    normV = _potential_norm(case.V.positive_part(), conjugate(q), quad)
    steps.append(_step("shift_monotone", normVs, "<=", normV, case.tol))
    q_list.append(("E", case.E))
    q_list.append(("norm_V_unshifted", normV))
    lhs = K * K * normVs
    return _finish("eigen_shift", case, q_list, steps, lhs, 1.0, Form("plain", E=case.E), meta=_meta(case, prov, quad, E=case.E))


def unit_volume_constant(n: int, q: float, cells: int) -> Tuple[float, str]:
    dom = unit_volume_ball(n)
    cf = closed_form_constant(dom, q)
    if cf is not None:
        return cf, "closed_form"
    return maximize_constant(dom, q, size=cells).K, "variational"


def _check_volume(case: Case) -> Certificate:
    case.need("V")
    q = case.q
    r = conjugate(q)
    domain = case.domain
    n = domain.n
    if isinstance(domain, (Ball, Interval)):
        K, prov = sobolev_constant(case, q)
        t = (1.0 / domain.volume) ** (1.0 / n)
        Kstar = dilation_scale(K, t, n, q)
        prov = prov + "+dilation"
    else:
        Kstar, prov = unit_volume_constant(n, q, case.grid.size)
    quad = _norm_quadrature(prov, case.V)
    normV = _potential_norm(case.V.positive_part(), r, quad)
    expo = 2.0 / n - (0.0 if math.isinf(r) else 1.0 / r)
    vol = domain.volume
    lhs = Kstar**2 * vol**expo * normV
    q_list = [("K_star", Kstar), ("volume", vol), ("volume_exponent", expo), ("norm_V_r", normV)]
    return _finish("volume", case, q_list, [], lhs, 1.0, meta=_meta(case, prov, quad, q=q))


def _check_critical(case: Case) -> Certificate:
    case.need("V")
    n = case.domain.n
    if n < 3:
        raise ValueError("the critical kind needs n >= 3")
    qbar = critical_index(n)
    K = talenti_constant(n)
    prov = "closed_form:talenti"
    quad = _norm_quadrature(prov, case.V)
    q_list, steps, normV = _chain(case, case.V, qbar, K, quad)
    lhs = K * K * normV
    q_list.append(("power_form", lhs ** (n / 2.0)))
    return _finish("critical", case, q_list, steps, lhs, 1.0, strict=True, meta=_meta(case, prov, quad, q=qbar))


def _hardy_integral(u: GridFunction, w: Callable, c: float) -> float:
    """``c int u_I^2 / w^2`` by Gauss quadrature of the P1 interpolant."""
    grid = u.grid
    ug = grid.interpolate(u.values)
    wg = np.asarray(w(grid.gauss_points), dtype=float)
    return c * grid.measure_factor * float(np.sum(grid.gauss_weights * ug**2 / wg**2))


def _check_hardy(case: Case) -> Certificate:
    from .constructions import hardy_coefficient, hardy_weight

    kind = case.hardy_weight or "origin"
    domain = case.domain
    n = domain.n
    c = hardy_coefficient(n, kind)
    w = hardy_weight(domain, kind)
    u = case.u
    energy = gradient_norm_sq(u)
    hardy_term = _hardy_integral(u, w, c)
    remainder = energy - hardy_term
    q_list = [("energy", energy), ("hardy_constant", c), ("hardy_term", hardy_term), ("remainder", remainder)]
    lhs = remainder
    if case.V is not None:
        pot = _potential_energy(u, case.V.positive_part())
        q_list += [("potential_energy", pot), ("obstruction", energy - pot)]
        lhs = energy - pot
    rhs = 0.0
    if kind == "boundary":
        l2 = lebesgue_norm(u.with_values(u.values), 2.0)
        rhs = l2**2 / (4.0 * domain.diameter**2)
        q_list.append(("remainder_lower_bound", rhs))
    steps = [_step("hardy_remainder_nonnegative", remainder, ">=", 0.0, case.tol)]
    return _finish("hardy", case, q_list, steps, lhs, rhs, strict=True, gate=False, meta=_meta(case, "none", "gauss", weight=kind))


def lambda_grid(V: Potential, count: int) -> np.ndarray:
    top = float(np.max(np.maximum(V.values, 0.0)))
    if top == 0.0:
        return np.geomspace(1e-3, 1.0, count)
    return np.geomspace(top * 1e-4, top * 10.0, count)


def _check_orlicz_lambda(case: Case) -> Certificate:
    case.need("V")
    u, V = case.u, case.V
    if u.grid.n != 2:
        raise ValueError("the Orlicz kinds are set in dimension 2")
    energy = gradient_norm_sq(u)
    U = 4.0 * math.pi * u.values**2 / energy
    Vp = V.positive_part()
    grid = u.grid
    intUV = grid.measure_factor * float(np.dot(grid.weights, U * Vp.values))
    intMU = grid.measure_factor * float(np.dot(grid.weights, M(U)))
    lams = lambda_grid(V, case.lambda_scan)
    vals = np.array([lam * intMU + F_of_lambda(Vp, lam) for lam in lams])
    k = int(np.argmin(vals))
    pot = _potential_energy(u, V)
    q_list = [
        ("energy", energy),
        ("potential_energy", pot),
        ("int_U_V", intUV),
        ("int_M_U", intMU),
        ("argmin_lambda", float(lams[k])),
        ("min_value", float(vals[k])),
    ]
    steps = [
        _step("green", 4.0 * math.pi, "=", 4.0 * math.pi * pot / energy, case.tol),
        _step("young", intUV, "<=", float(vals[k]), case.tol),
    ]
    return _finish("orlicz_lambda", case, q_list, steps, float(vals.min()), 4.0 * math.pi, meta=_meta(case, "none", "nodal", lambdas=len(lams)))


def _check_orlicz_norm(case: Case) -> Certificate:
    case.need("V")
    ctx = OrliczContext(case.domain, case.C2)
    C2 = ctx.constant
    value, lam = luxemburg_norm(case.V.positive_part(), ctx)
    vol = case.domain.volume
    lhs = C2 * vol / (4.0 * math.pi) * value
    q_list = [("C2", C2), ("volume", vol), ("luxemburg_norm", value), ("argmin_lambda", lam)]
    prov = "supplied" if case.C2 is not None else "estimated_lower_bound"
    return _finish("orlicz_norm", case, q_list, [], lhs, 1.0, meta=_meta(case, "none", "nodal", C2_provenance=prov))


def _check_weighted(case: Case) -> Certificate:
    case.need("V", "weights")
    q = case.q
    w = case.weights
    K, prov = sobolev_constant(case, q, w)
    q_list, steps, _ = _chain(case, case.V, q, K, "nodal", w)
    normV = lebesgue_norm(case.V, conjugate(q), w.b)
    q_list.append(("norm_V_r_b", normV))
    lhs = K * K * normV
    return _finish("weighted", case, q_list, steps, lhs, 1.0, Form("weighted", w), meta=_meta(case, prov, "nodal", q=q))


def _check_annulus(case: Case) -> Certificate:
    case.need("V")
    domain = case.domain
    if not isinstance(domain, Annulus):
        raise ValueError("annulus_radial needs an Annulus domain")
    q = case.q
    if case.K is not None:
        Krad, prov = float(case.K), case.K_provenance or "supplied"
        K1 = Krad / radial_constant_relation(1.0, q, domain.n)
    else:
        res = maximize_constant(domain, q, grid=case.grid)
        K1 = rayleigh_quotient(res.u, q, full=False)
        Krad, prov = radial_constant_relation(K1, q, domain.n), "variational"
    q_list, steps, normV = _chain(case, case.V, q, Krad, "nodal")
    q_list.insert(0, ("K_one_dimensional", K1))
    lhs = Krad**2 * normV
    return _finish("annulus_radial", case, q_list, steps, lhs, 1.0, meta=_meta(case, prov, "nodal", q=q))


def _divergence_values(case: Case) -> np.ndarray:
    grid = case.grid
    W = case.W
    wf = W if isinstance(W, GridFunction) else GridFunction(grid, np.asarray(W(grid.nodes), dtype=float) * np.ones(grid.nodes.size))
    return divergence(wf).values


def _w_is_zero(case: Case) -> bool:
    if case.W is None:
        return True
    vals = case.W.values if isinstance(case.W, GridFunction) else np.asarray(case.W(case.grid.gauss_points), dtype=float)
    return bool(np.all(vals == 0.0))


def _check_first_order(case: Case) -> Certificate:
    case.need("V")
    if _w_is_zero(case):
        cert = _check_main(case, "first_order")
        cert.metadata["reduced_to"] = "main"
        return cert
    q = case.q
    K, prov = sobolev_constant(case, q)
    div = _divergence_values(case)
    Veff = Potential(GridFunction(case.grid, case.V.values - 0.5 * div))
    u = case.u
    q_list, steps, normVeff = _chain(case, Veff, q, K, "nodal", use_positive=False)
    energy = gradient_norm_sq(u)
    pot = _potential_energy(u, case.V)
    drift = u.grid.measure_factor * float(np.dot(first_order_load(u, case.W), u.values))
    half_div = -0.5 * u.grid.measure_factor * float(np.dot(u.grid.weights, u.values**2 * div))
    # the Green step for this form includes the drift term
    steps[1] = _step("green", energy, "=", pot + drift, max(case.tol, default_residual_tol(case.grid)))
    steps.insert(2, _step("minigreen", drift, "=", half_div, max(case.tol, default_residual_tol(case.grid))))
    q_list += [("drift_term", drift), ("half_divergence_term", half_div), ("norm_V_minus_half_div_W", normVeff)]
    lhs = K * K * normVeff
    return _finish("first_order", case, q_list, steps, lhs, 1.0, Form("first_order", W=case.W), meta=_meta(case, prov, "nodal", q=q))


def _check_first_order_rough(case: Case) -> Certificate:
    case.need("V")
    q = case.q
    r = conjugate(q)
    n = case.domain.n
    s = case.s if case.s is not None else (math.inf if math.isinf(r) else max(2.0 * r, float(n)))
    if not (s >= 2.0 * r >= n) and not (n == 2 and r > 1 and s >= 2 * r):
        raise ValueError(f"field 's' must satisfy s >= 2r >= n, got s={s}, r={r}, n={n}")
    K, prov = sobolev_constant(case, q)
    normV = _potential_norm(case.V.absolute(), r, "nodal")
    if case.W is None:
        normW = 0.0
    else:
        wv = case.W.values if isinstance(case.W, GridFunction) else np.asarray(case.W(case.grid.nodes), dtype=float)
        normW = lebesgue_norm(GridFunction(case.grid, np.abs(wv) * np.ones(case.grid.nodes.size)), s)
    expo = (0.0 if math.isinf(r) else 1.0 / (2.0 * r)) - (0.0 if math.isinf(s) else 1.0 / s)
    vol = case.domain.volume
    lhs = K * (K * normV + vol**expo * normW)
    q_list = [("K", K), ("norm_V_r", normV), ("norm_W_s", normW), ("s", s), ("volume_factor", vol**expo)]
    form = Form("first_order", W=case.W) if case.W is not None else Form()
    return _finish("first_order_rough", case, q_list, [], lhs, 1.0, form, meta=_meta(case, prov, "nodal", q=q, s=s))


def _check_exact_W(case: Case) -> Certificate:
    case.need("V", "phi")
    q = case.q
    w = case.weights or WeightPair(lambda r: np.exp(case.phi(r)), lambda r: np.exp(case.phi(r)))
    K, prov = sobolev_constant(case, q, w)
    q_list, steps, normV = _chain(case, case.V, q, K, "nodal", w)
    lhs = K * K * normV
    return _finish("exact_W", case, q_list, steps, lhs, 1.0, Form("weighted", w), meta=_meta(case, prov, "nodal", q=q))


def _check_nonlinear_power(case: Case) -> Certificate:
    case.need("V", "beta")
    beta = float(case.beta)
    q = case.q
    q_hat = q * (beta + 1.0) / 2.0
    n = case.domain.n
    if q_hat > critical_index(n) or (n <= 2 and math.isinf(q_hat)):
        raise ValueError(f"q_hat = {q_hat} exceeds the critical index")
    K, prov = sobolev_constant(case, q_hat)
    r = conjugate(q)
    u = case.u
    normV = _potential_norm(case.V.positive_part(), r, "nodal")
    nu = lebesgue_norm(u, q * (beta + 1.0))
    energy = gradient_norm_sq(u)
    pot = _potential_energy(u, case.V, power=beta)
    pot_plus = _potential_energy(u, case.V.positive_part(), power=beta)
    lhs = K * K * normV * nu ** (beta - 1.0)
    q_list = [("K_q_hat", K), ("q_hat", q_hat), ("norm_V_r", normV), ("norm_u_q_beta_plus_1", nu), ("energy", energy), ("potential_energy", pot)]
    tol = max(case.tol, default_residual_tol(case.grid))
    steps = [
        _step("sobolev", nu**2, "<=", K * K * energy, tol),
        _step("green", energy, "=", pot, tol),
        _step("positive_part", pot, "<=", pot_plus, tol),
        _step("hoelder", pot_plus, "<=", nu ** (beta + 1.0) * normV, tol),
    ]
    return _finish("nonlinear_power", case, q_list, steps, lhs, 1.0, Form("power", beta=beta), meta=_meta(case, prov, "nodal", q=q, beta=beta))


def _check_gradient_power(case: Case) -> Certificate:
    case.need("V", "beta")
    beta = float(case.beta)
    u, V = case.u, case.V
    if not 0 < beta <= 2:
        raise ValueError(f"field 'beta' must lie in (0, 2], got {beta}")
    form = Form("gradient_power", beta=beta)
    if beta == 2:
        free = u.free
        sup = float(np.max(np.abs(V.values[free] * u.values[free])))
        return _finish("gradient_power", case, [("sup_Vu", sup)], [], sup, 1.0, form, meta=_meta(case, "none", "nodal", beta=beta))
    q = case.q
    n = case.domain.n
    inv_r = 1.0 - 0.5 * beta - (0.0 if math.isinf(q) else 1.0 / (2.0 * q))
    if not inv_r > 0:
        raise ValueError(f"no admissible r for q={q}, beta={beta}")
    r = 1.0 / inv_r
    if n >= 3 and math.isclose(q, critical_index(n), rel_tol=1e-12):
        K, prov = talenti_constant(n), "closed_form:talenti"
    else:
        K, prov = sobolev_constant(case, q)
    grad = math.sqrt(gradient_norm_sq(u))
    normV = lebesgue_norm(V, r)
    lhs = K * grad ** (beta - 1.0) * normV
    q_list = [("K", K), ("r", r), ("gradient_norm", grad), ("norm_V_r", normV)]
    return _finish("gradient_power", case, q_list, [], lhs, 1.0, form, meta=_meta(case, prov, "nodal", q=q, beta=beta))


def _split_mass(case: Case, c_index: int) -> Tuple[float, float]:
    """``int_{-b}^{c} |V|`` and ``int_c^b |V|`` for an atom-free potential."""
    grid = case.grid
    V = case.V
    if V.profile is not None:
        c = grid.nodes[c_index]
        f = lambda x: np.abs(np.asarray(V.profile(x), dtype=float))  # noqa: E731
        left = grid.integrate(lambda x: np.where(x < c, f(x), 0.0))
        right = grid.integrate(lambda x: np.where(x >= c, f(x), 0.0))
        return left, right
    from_left, from_right = grid.half_masses()
    a = np.abs(V.values)
    left = float(np.dot(from_left[: c_index + 1], a[: c_index + 1]) + np.dot(from_right[:c_index], a[:c_index]))
    right = float(np.dot(from_right[c_index:], a[c_index:]) + np.dot(from_left[c_index + 1 :], a[c_index + 1 :]))
    return left, right


def _check_one_d(case: Case) -> Certificate:
    case.need("V")
    domain = case.domain
    if not isinstance(domain, Interval):
        raise ValueError("one_d_measure needs an Interval domain")
    b = domain.b
    tv = total_variation(case.V)
    if case.V.profile is not None and case.V.density is not None:
        tv = case.grid.integrate(lambda x: np.abs(np.asarray(case.V.profile(x), dtype=float))) + sum(abs(m) for _, m in case.V.atoms)
    lhs = b * tv
    q_list = [("b", b), ("total_variation", tv)]
    meta = _meta(case, "none", "gauss" if case.V.profile is not None else "nodal")
    strict = False
    if not case.V.atoms:
        vals = np.abs(case.u.values)
        top = vals.max()
        peaks = np.nonzero(vals == top)[0]
        ci = int(peaks[0])
        c = float(case.grid.nodes[ci]) - domain.center
        if peaks.size > 1:
            meta["peak_tie"] = True
        left, right = _split_mass(case, ci)
        q_list += [("peak", c), ("mass_left", left), ("mass_right", right)]
        meta["side_conditions"] = [
            {"name": "right_mass", "value": right, "bound": 1.0 / (b - c), "holds": bool(right > 1.0 / (b - c))},
            {"name": "left_mass", "value": left, "bound": 1.0 / (b + c), "holds": bool(left > 1.0 / (b + c))},
        ]
        strict = True
    return _finish("one_d_measure", case, q_list, [], lhs, 2.0, strict=strict, meta=meta)


_DISPATCH = {
    "main": _check_main,
    "volume": _check_volume,
    "eigen_shift": _check_eigen_shift,
    "critical": _check_critical,
    "hardy": _check_hardy,
    "orlicz_lambda": _check_orlicz_lambda,
    "orlicz_norm": _check_orlicz_norm,
    "weighted": _check_weighted,
    "annulus_radial": _check_annulus,
    "first_order": _check_first_order,
    "first_order_rough": _check_first_order_rough,
    "exact_W": _check_exact_W,
    "nonlinear_power": _check_nonlinear_power,
    "gradient_power": _check_gradient_power,
    "one_d_measure": _check_one_d,
}


def check_certificate(kind: str, scenario) -> Certificate:
    """Evaluate one certificate kind on a :class:`Case` or a construction record."""
    if kind not in _DISPATCH:
        raise ValueError(f"unknown certificate kind {kind!r}; known: {', '.join(KINDS)}")
    case = scenario if isinstance(scenario, Case) else Case.from_record(scenario)
    return _DISPATCH[kind](case)
