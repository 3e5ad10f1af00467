"""Explicit (u, V) pairs: extremals, sharpness families and counterexamples.

Every builder returns a :class:`ConstructionRecord`, which carries the
sampled profile, the potential, the scenario fields a certificate needs, and
the certificate kinds the pair is expected to satisfy (with the tolerance on
``|slack|`` when the kind is attained with equality, ``None`` otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from scipy.special import beta as beta_fn, betainc

from .core_model import (
    Annulus,
    Ball,
    Domain,
    Grading,
    GridFunction,
    Interval,
    Piecewise,
    Potential,
    RadialGrid,
    composite_grid,
    conjugate,
    critical_index,
    first_order_load,
    gradient_power_average,
    make_grid,
    singular_sample,
    sphere_area,
    stiffness_apply,
)
from .extremals import (
    UNIT,
    WeightPair,
    euler_lagrange_potential,
    maximize_constant,
    talenti_constant,
)
from .norms import lebesgue_norm


@dataclass
class ConstructionRecord:
    name: str
    u: GridFunction
    V: Potential
    domain: Domain
    parameters: dict
    claims: Dict[str, Optional[float]]
    exact: Optional[Callable] = None
    scenario: dict = field(default_factory=dict)
    quantities: dict = field(default_factory=dict)

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    def evaluator_gap(self) -> float:
        """Largest node-wise difference between the exact profile and the stored values."""
        if self.exact is None:
            return 0.0
        vals = np.asarray(self.exact(self.grid.nodes), dtype=float)
        free = self.u.free
        return float(np.max(np.abs(vals[free] - self.u.values[free]), initial=0.0))

    def refined(self) -> "ConstructionRecord":
        """The same construction on the bisected grid."""
        params = dict(self.parameters)
        params["cells"] = 2 * params.get("cells", self.grid.size)
        return build(self.name, **params)


# ---------------------------------------------------------------------------
# Talenti bubble
# ---------------------------------------------------------------------------


def bubble(n: int) -> Callable:
    return lambda rho: (1.0 + np.asarray(rho, dtype=float) ** 2) ** ((2.0 - n) / 2.0)


def bubble_potential(n: int) -> Callable:
    return lambda rho: n * (n - 2.0) / (1.0 + np.asarray(rho, dtype=float) ** 2) ** 2


def bubble_tail(n: int, p: float, rho_max: float) -> float:
    """Exact ``int_{|x| > rho_max} V_v^p dx`` via t = 1/(1 + rho^2) (an incomplete beta)."""
    alpha = 2.0 * p - n / 2.0
    if not alpha > 0:
        raise ValueError(f"V_v is not in L^{p}(R^{n})")
    t = 1.0 / (1.0 + rho_max**2)
    return sphere_area(n) * (n * (n - 2.0)) ** p * 0.5 * beta_fn(alpha, n / 2.0) * betainc(alpha, n / 2.0, t)


def bubble_tail_bound(n: int, p: float, rho_max: float) -> float:
    """Crude certified bound ``(n(n-2))^p omega_n rho_max^{n-4p} / (4p - n)``."""
    return (n * (n - 2.0)) ** p * sphere_area(n) * rho_max ** (n - 4.0 * p) / (4.0 * p - n)


def bubble_grid(n: int, rho_max: float, cells: int) -> RadialGrid:
    ratio = (rho_max / 1e-2) ** (1.0 / cells)
    return composite_grid(Ball(n, rho_max), [(0.0, 1.0, max(16, cells // 4), 1.0, "lo"), (1.0, rho_max, cells, ratio, "lo")])


def talenti_bubble(n: int, rho_max: float = 1e3, cells: int = 256) -> ConstructionRecord:
    """The critical extremal on R^n, truncated at ``rho_max`` with an exact tail."""
    if n < 3:
        raise ValueError(f"the bubble needs n >= 3, got n={n}")
    grid = bubble_grid(n, rho_max, cells)
    f = bubble(n)
    u = GridFunction.sample(grid, f, zero_inner=False, zero_outer=False)
    V = Potential.from_profile(grid, bubble_potential(n))
    p = n / 2.0
    body = lebesgue_norm(V, p, quadrature="gauss") ** p
    tail = bubble_tail(n, p, rho_max)
    K = talenti_constant(n)
    return ConstructionRecord(
        "talenti_bubble",
        u,
        V,
        grid.domain,
        {"n": n, "rho_max": rho_max, "cells": cells},
        {},
        exact=f,
        scenario={"whole_space": True, "exponent": {"q": critical_index(n)}},
        quantities={
            "potential_power_integral": body + tail,
            "tail": tail,
            "tail_bound": bubble_tail_bound(n, p, rho_max),
            "talenti_identity": K**n * (body + tail),
        },
    )


def talenti_identity(n: int, rho_max: float = 1e3, cells: int = 256) -> float:
    """``K^n int_{R^n} V_v^{n/2}``; equals 1."""
    return talenti_bubble(n, rho_max, cells).quantities["talenti_identity"]


# ---------------------------------------------------------------------------
# Truncated bubble
# ---------------------------------------------------------------------------


def truncated_bubble_coefficients(n: int, R: float) -> dict:
    s = (R * R + 1.0) ** (-n / 2.0)
    a = (2.0 - n) * R * s
    b = s * (R * R * (n - 1.0) + 1.0)
    c = R * (R + 1.0) ** (n - 1.0) * s
    d = ((1.0 - n) * R + 1.0) * s
    if d >= 0:
        raise ValueError(f"d = {d} >= 0: no zero crossing for R = {R}")
    R_hat = (c / -d) ** (1.0 / (n - 2.0))
    return {"a": a, "b": b, "c": c, "d": d, "R_hat": R_hat}


def truncated_bubble(n: int, R: float, cells: int = 128) -> ConstructionRecord:
    """Bubble on [0, R], linear bridge on (R, R+1), harmonic tail vanishing at R_hat."""
    if n < 3:
        raise ValueError(f"the truncated bubble needs n >= 3, got n={n}")
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    co = truncated_bubble_coefficients(n, R)
    a, b, c, d, R_hat = co["a"], co["b"], co["c"], co["d"], co["R_hat"]
    domain = Ball(n, R_hat)
    u_exact = Piecewise(
        [R, R + 1.0],
        [bubble(n), lambda r: a * r + b, lambda r: c * r ** (2.0 - n) + d],
    )
    V_exact = Piecewise(
        [R, R + 1.0],
        [bubble_potential(n), lambda r: -a * (n - 1.0) / (r * (a * r + b)), lambda r: np.zeros_like(r)],
    )
    inner = max(16, cells)
    grid = composite_grid(
        domain,
        [
            (0.0, R, inner, (R / 1e-2) ** (1.0 / inner) if R > 1 else 1.0, "lo"),
            (R, R + 1.0, max(16, cells // 4), 1.0, "lo"),
            (R + 1.0, R_hat, inner, ((R_hat - R - 1.0) / 1e-1) ** (1.0 / inner), "lo"),
        ],
    )
    u = GridFunction.sample(grid, u_exact, zero_inner=False, zero_outer=True)
    V = Potential(GridFunction.sample(grid, V_exact, zero_inner=False, zero_outer=False))
    qbar = critical_index(n)
    K = talenti_constant(n)
    norm = lebesgue_norm(V, n / 2.0, quadrature="gauss")
    bridge = grid.integrate(lambda r: np.where((r > R) & (r < R + 1.0), np.abs(V_exact(r)) ** (n / 2.0), 0.0))
    return ConstructionRecord(
        "truncated_bubble",
        u,
        V,
        domain,
        {"n": n, "R": R, "cells": cells},
        {"critical": None},
        exact=u_exact,
        scenario={"exponent": {"q": qbar}},
        quantities={
            **co,
            "critical_power_integral": K**n * norm ** (n / 2.0),
            "bridge_integral": bridge,
        },
    )


# ---------------------------------------------------------------------------
# Small-support counterexample
# ---------------------------------------------------------------------------


def counterexample_coefficients(n: int, eps: float) -> dict:
    if n == 2:
        b = 1.0 / (2.0 * eps**2)
        a = 0.5 - math.log(eps)
    else:
        b = (n - 2.0) * eps ** (-n) / 2.0
        a = (n / 2.0) * eps ** (2.0 - n) - 1.0
    return {"a": a, "b": b}


def small_support_counterexample(n: int, eps: float, r: Optional[float] = None, cells: int = 128) -> ConstructionRecord:
    """C^1 profile on the unit ball whose potential lives on B_eps.

    ``r`` selects the Lebesgue exponent reported in ``quantities["norm"]``
    (default 1 for n = 2 and 1.4 for n = 3, otherwise (n/2 + 1)/2).
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    co = counterexample_coefficients(n, eps)
    a, b = co["a"], co["b"]
    if not a > b * eps**2:
        raise ValueError(f"positivity fails on the cap: a = {a} <= b eps^2 = {b * eps**2}")
    if n == 2:
        outer = lambda r: -np.log(r)  # noqa: E731
    else:
        outer = lambda r: r ** (2.0 - n) - 1.0  # noqa: E731
    u_exact = Piecewise([eps], [lambda r: a - b * r**2, outer])
    V_exact = Piecewise([eps], [lambda r: 2.0 * n * b / (a - b * r**2), lambda r: np.zeros_like(r)])
    inner = max(16, cells // 2)
    grid = composite_grid(
        Ball(n, 1.0),
        [(0.0, eps, inner, 1.0, "lo"), (eps, 1.0, cells, (1.0 / eps) ** (1.0 / cells), "lo")],
    )
    u = GridFunction.sample(grid, u_exact, zero_inner=False, zero_outer=True)
    V = Potential(GridFunction.sample(grid, V_exact, zero_inner=False, zero_outer=False))
    if r is None:
        r = 1.0 if n == 2 else (1.4 if n == 3 else (n / 2.0 + 1.0) / 2.0)
    norm = lebesgue_norm(V, r, quadrature="gauss")
    quantities = {**co, "r": r, "norm": norm, "norm_power": norm**r}
    if n == 2:
        quantities["exact_L1"] = 4.0 * math.pi * math.log((0.5 - math.log(eps)) / (-math.log(eps)))
        quantities["weighted_sup"] = float(np.max(grid.nodes**2 * V.values))
        quantities["weighted_sup_bound"] = 2.0 / math.log(1.0 / eps)
    r_check = n / 2.0 + 0.5
    return ConstructionRecord(
        "small_support_counterexample",
        u,
        V,
        Ball(n, 1.0),
        {"n": n, "eps": eps, "r": r, "cells": cells},
        {"main": None},
        exact=u_exact,
        scenario={"exponent": {"r": r_check}},
        quantities=quantities,
    )


# ---------------------------------------------------------------------------
# Hardy potentials
# ---------------------------------------------------------------------------


def hardy_coefficient(n: int, kind: str) -> float:
    if kind == "origin":
        return ((n - 2.0) / 2.0) ** 2
    if kind == "boundary":
        return 0.25
    raise ValueError(f"unknown Hardy kind {kind!r}; expected 'origin' or 'boundary'")


def hardy_weight(domain: Domain, kind: str) -> Callable:
    """The distance function w in c / w^2."""
    if kind == "origin":
        return lambda r: np.abs(np.asarray(r, dtype=float))
    return domain.dist


def hardy_potential(n: int, kind: str, domain: Domain, margin: float = 1.0, grid: Optional[RadialGrid] = None, cells: int = 128) -> Potential:
    """``margin * c / w^2`` with ``w = |x|`` or the distance to the boundary."""
    if n != domain.n:
        raise ValueError(f"dimension {n} does not match {domain}")
    if not 0 < margin <= 1:
        raise ValueError(f"margin must lie in (0, 1], got {margin}")
    if kind == "origin" and n < 2:
        raise ValueError("the origin Hardy potential needs n >= 2")
    if kind == "origin" and not isinstance(domain, Ball):
        raise ValueError("the origin Hardy potential is set up on balls")
    c = margin * hardy_coefficient(n, kind)
    grid = grid or make_grid(domain, cells)
    w = hardy_weight(domain, kind)

    def f(r):
        with np.errstate(divide="ignore"):
            return c / w(r) ** 2

    if c == 0.0:
        return Potential(GridFunction.zeros(grid))
    if kind == "origin":
        values = singular_sample(grid, f, [0])
    else:
        with np.errstate(divide="ignore"):
            values = np.asarray(f(grid.nodes), dtype=float)
        inner, outer = domain.dirichlet
        if inner:
            values[0] = 0.0
        if outer:
            values[-1] = 0.0
    return Potential(GridFunction(grid, values, profile=f))


def hardy_trial(domain: Domain, seed: int, modes: int = 6, cells: int = 128, grid: Optional[RadialGrid] = None) -> GridFunction:
    """Pseudo-random smooth profile vanishing on the boundary."""
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=modes) / (1.0 + np.arange(modes)) ** 1.5
    grid = grid or make_grid(domain, cells)
    k = np.arange(1, modes + 1)
    if isinstance(domain, Interval):
        lo, hi = domain.extent
        f = lambda x: np.sin(np.multiply.outer((np.asarray(x) - lo) / (hi - lo), k) * math.pi) @ coef  # noqa: E731
    elif isinstance(domain, Ball):
        f = lambda r: np.cos(np.multiply.outer(np.asarray(r) / domain.R, k - 0.5) * math.pi) @ coef  # noqa: E731
    else:
        lo, hi = domain.extent
        f = lambda r: np.sin(np.multiply.outer((np.asarray(r) - lo) / (hi - lo), k) * math.pi) @ coef  # noqa: E731
    return GridFunction.sample(grid, f, tol=1e-8)


# ---------------------------------------------------------------------------
# One dimension
# ---------------------------------------------------------------------------


def hat_1d(b: float = 1.0, cells: int = 64) -> ConstructionRecord:
    """``u = 1 - |x|/b`` with ``V = (2/b) delta_0``."""
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    if cells % 2:
        raise ValueError("use an even number of cells so that 0 is a node")
    grid = make_grid(Interval(b), cells)
    f = lambda x: 1.0 - np.abs(np.asarray(x, dtype=float)) / b  # noqa: E731
    u = GridFunction.sample(grid, f)
    V = Potential(None, ((0.0, 2.0 / b),), grid)
    return ConstructionRecord(
        "hat_1d", u, V, grid.domain, {"b": b, "cells": cells}, {"one_d_measure": 1e-12, "main": 1e-12}, exact=f,
        scenario={"exponent": {"q": math.inf}},
    )


def mollified_hat(b: float = 1.0, width: float = 0.1, cells: int = 128) -> ConstructionRecord:
    """The hat with a C^1 quadratic cap on |x| < width; V is integrable and b ||V||_1 > 2."""
    if not 0 < width < b:
        raise ValueError(f"width must lie in (0, b), got {width}")
    beta = 1.0 / (2.0 * b * width)
    alpha = 1.0 - width / (2.0 * b)
    u_exact = Piecewise([-width, width], [lambda x: 1.0 + x / b, lambda x: alpha - beta * x**2, lambda x: 1.0 - x / b])
    V_exact = Piecewise(
        [-width, width], [lambda x: np.zeros_like(x), lambda x: 2.0 * beta / (alpha - beta * x**2), lambda x: np.zeros_like(x)]
    )
    domain = Interval(b)
    side = max(16, cells // 2)
    cap = max(16, cells // 2)
    grid = composite_grid(
        domain,
        [(-b, -width, side, 1.0, "lo"), (-width, width, cap, 1.0, "lo"), (width, b, side, 1.0, "lo")],
    )
    u = GridFunction.sample(grid, u_exact)
    V = Potential(GridFunction.sample(grid, V_exact, zero_inner=False, zero_outer=False))
    exact_l1 = 2.0 * beta * 2.0 / math.sqrt(alpha * beta) * math.atanh(width * math.sqrt(beta / alpha))
    return ConstructionRecord(
        "mollified_hat",
        u,
        V,
        domain,
        {"b": b, "width": width, "cells": cells},
        {"one_d_measure": None},
        exact=u_exact,
        scenario={"exponent": {"q": math.inf}},
        quantities={"exact_L1": exact_l1, "b_times_norm": b * exact_l1},
    )


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------


def manufactured_solution(
    u: GridFunction,
    W=None,
    E: float = 0.0,
    weights: Optional[WeightPair] = None,
    beta: Optional[float] = None,
    gradient_power: bool = False,
    delta: Optional[float] = None,
    name: str = "manufactured",
) -> ConstructionRecord:
    """Potential that makes ``u`` an exact discrete solution of the chosen form.

    Forms: ``-div(a grad u) = b (V + E) u |u|^{beta-1}`` (weights and power
    optional), ``-Lap u = (V + E) u + W . grad u`` (``W`` given as the radial
    component w(rho) of W = w x/rho), or ``-Lap u = V |grad u|^beta``
    (``gradient_power=True``).  V is computed node-wise from the discrete
    operator, so the weak residual vanishes to rounding.
    """
    if E > 0:
        raise ValueError(f"the shift E must be <= 0, got {E}")
    weights = weights or UNIT
    if W is not None and not weights.unit:
        raise ValueError("combine W with weights through the exact-W form instead")
    if gradient_power and beta is None:
        raise ValueError("the gradient-power form needs beta")
    grid = u.grid
    weights.validate(grid)
    lhs = stiffness_apply(grid, u.values, weights.a)
    if W is not None:
        lhs = lhs - first_order_load(u, W)
    mb = grid.mass(weights.b)
    free = u.free
    scale = float(np.max(np.abs(u.values)))
    delta = 1e-6 * scale if delta is None else delta
    if gradient_power:
        denom_core = gradient_power_average(u, beta)
        floor = (1e-6 * float(np.max(np.abs(u.slopes())))) ** beta
        small = free & (denom_core <= floor)
        denom = mb * denom_core
    else:
        small = free & (np.abs(u.values) < delta)
        p = 1.0 if beta is None else beta
        denom = mb * u.values * np.abs(u.values) ** (p - 1.0)
    if np.any(small):
        i = int(np.nonzero(small)[0][0])
        if gradient_power:
            raise ValueError(f"grad u is too small at node {i} (rho = {grid.nodes[i]:.6g}); division unsafe")
        raise ValueError(f"u is too small at node {i} (rho = {grid.nodes[i]:.6g}, u = {u.values[i]:.3e}); division unsafe")
    vals = np.zeros(grid.nodes.size)
    shift = 0.0 if gradient_power else E * mb * u.values
    vals[free] = (lhs[free] - (shift[free] if not gradient_power else 0.0)) / denom[free]
    V = Potential(GridFunction(grid, vals))
    form = "plain"
    if gradient_power:
        form = "gradient_power"
    elif W is not None:
        form = "first_order"
    elif beta is not None and beta != 1:
        form = "power"
    elif not weights.unit:
        form = "weighted"
    claims = {
        "plain": {"main": None, "eigen_shift": None},
        "first_order": {"first_order": None, "first_order_rough": None},
        "power": {"nonlinear_power": None},
        "gradient_power": {"gradient_power": None},
        "weighted": {"weighted": None},
    }[form]
    scenario = {"form": form, "E": E, "W": W, "beta": beta, "weights": weights}
    return ConstructionRecord(name, u, V, grid.domain, {"form": form, "E": E, "beta": beta}, claims, u.profile, scenario)


# ---------------------------------------------------------------------------
# Extremal pairs
# ---------------------------------------------------------------------------


def euler_lagrange_pair(domain: Domain, q: float, weights: WeightPair = UNIT, cells: int = 128) -> ConstructionRecord:
    """The discrete extremal with its Euler-Lagrange potential (equality in the main chain)."""
    res = maximize_constant(domain, q, weights, size=cells)
    V = euler_lagrange_potential(res)
    kind = "annulus_radial" if isinstance(domain, Annulus) else ("main" if weights.unit else "weighted")
    return ConstructionRecord(
        "euler_lagrange_pair",
        res.u,
        V,
        domain,
        {"q": q, "cells": cells},
        {kind: 1e-6},
        scenario={"exponent": {"q": q}, "weights": weights, "K": res.K, "K_provenance": "variational"},
        quantities={"K": res.K, "iterations": res.iterations},
    )


def weighted_extremal_pair(domain: Domain, phi: Callable, dphi: Callable, q: float, cells: int = 128) -> ConstructionRecord:
    """Extremal for the weights a = b = e^phi; u solves -Lap u - phi' u' = V u."""
    w = WeightPair(lambda r: np.exp(phi(r)), lambda r: np.exp(phi(r)))
    res = maximize_constant(domain, q, w, size=cells)
    V = euler_lagrange_potential(res)
    return ConstructionRecord(
        "weighted_extremal_pair",
        res.u,
        V,
        domain,
        {"q": q, "cells": cells},
        {"exact_W": 1e-3, "weighted": 1e-6},
        scenario={"exponent": {"q": q}, "weights": w, "phi": phi, "W": dphi, "K": res.K, "K_provenance": "variational"},
        quantities={"K": res.K},
    )


def nonlinear_equality_family(domain: Domain, beta: float, q: float, cells: int = 128) -> ConstructionRecord:
    """``u_*`` extremal for q_hat = q (beta + 1)/2 and ``V = c u_*^{(q-1)(beta+1)}``."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    q_hat = q * (beta + 1.0) / 2.0
    if not q_hat < critical_index(domain.n):
        raise ValueError(f"q_hat = {q_hat} is not subcritical")
    res = maximize_constant(domain, q_hat, size=cells)
    u = res.u
    from .core_model import gradient_norm_sq

    S = lebesgue_norm(u, 2.0 * q_hat) ** (2.0 * q_hat)
    c = gradient_norm_sq(u) / S
    V = Potential(GridFunction(u.grid, c * np.abs(u.values) ** ((q - 1.0) * (beta + 1.0))))
    r = conjugate(q)
    return ConstructionRecord(
        "nonlinear_equality_family",
        u,
        V,
        domain,
        {"beta": beta, "q": q, "cells": cells},
        {"nonlinear_power": 1e-3},
        scenario={"exponent": {"q": q}, "beta": beta, "form": "power", "K": res.K, "K_provenance": "variational"},
        quantities={
            "c": c,
            "q_hat": q_hat,
            "K_hat": res.K,
            "norm_V": lebesgue_norm(V, r),
            "predicted_norm_V": c * lebesgue_norm(u, 2.0 * q_hat) ** (2.0 * q_hat - beta - 1.0),
        },
    )


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _sine_pair(cells: int = 128) -> ConstructionRecord:
    grid = make_grid(Interval(0.5, 0.5), cells)
    f = lambda x: np.sin(math.pi * np.asarray(x, dtype=float))  # noqa: E731
    u = GridFunction.sample(grid, f)
    V = Potential.from_profile(grid, lambda x: np.full_like(np.asarray(x, dtype=float), math.pi**2))
    return ConstructionRecord(
        "sine_eigenpair", u, V, grid.domain, {"cells": cells}, {"main": 1e-6}, exact=f,
        scenario={"exponent": {"q": 1.0}},
    )


def _domain_from(params: dict) -> Domain:
    kind = params.pop("domain", "interval")
    if isinstance(kind, Domain):
        return kind
    if kind == "interval":
        return Interval(params.pop("half_length", 0.5), params.pop("center", 0.5))
    if kind == "ball":
        return Ball(int(params.pop("n")), params.pop("radius", 1.0))
    if kind == "annulus":
        return Annulus(int(params.pop("n")), params.pop("inner"), params.pop("outer"))
    raise ValueError(f"unknown domain kind {kind!r}")


def _el_builder(**p):
    p = dict(p)
    dom = _domain_from(p)
    return euler_lagrange_pair(dom, p.get("q", 2.0), cells=p.get("cells", 128))


def _nl_builder(**p):
    p = dict(p)
    dom = _domain_from(p)
    return nonlinear_equality_family(dom, p.get("beta", 2.0), p.get("q", 2.0), cells=p.get("cells", 128))


def _weighted_builder(**p):
    p = dict(p)
    dom = _domain_from(p)
    s = p.get("strength", 1.0)
    return weighted_extremal_pair(dom, lambda x: s * np.asarray(x) ** 2, lambda x: 2 * s * np.asarray(x), p.get("q", 2.0), p.get("cells", 128))


CATALOG = {
    "euler_lagrange_pair": (_el_builder, {"domain": "interval", "q": 2.0, "cells": 128}),
    "hat_1d": (hat_1d, {"b": 1.0, "cells": 64}),
    "mollified_hat": (mollified_hat, {"b": 1.0, "width": 0.1, "cells": 128}),
    "nonlinear_equality_family": (_nl_builder, {"domain": "interval", "beta": 2.0, "q": 2.0, "cells": 128}),
    "sine_eigenpair": (_sine_pair, {"cells": 128}),
    "small_support_counterexample": (small_support_counterexample, {"n": 3, "eps": 0.1, "cells": 128}),
    "talenti_bubble": (talenti_bubble, {"n": 3, "rho_max": 1e3, "cells": 256}),
    "truncated_bubble": (truncated_bubble, {"n": 3, "R": 10.0, "cells": 128}),
    "weighted_extremal_pair": (_weighted_builder, {"domain": "interval", "q": 2.0, "strength": 1.0, "cells": 128}),
}

# claims each name advertises (checked against the verify module's kinds)
CATALOG_CLAIMS = {
    "euler_lagrange_pair": {"main": 1e-6},
    "hat_1d": {"one_d_measure": 1e-12, "main": 1e-12},
    "mollified_hat": {"one_d_measure": None},
    "nonlinear_equality_family": {"nonlinear_power": 1e-3},
    "sine_eigenpair": {"main": 1e-6},
    "small_support_counterexample": {"main": None},
    "talenti_bubble": {},
    "truncated_bubble": {"critical": None},
    "weighted_extremal_pair": {"exact_W": 1e-3, "weighted": 1e-6},
}


def build(name: str, **params) -> ConstructionRecord:
    if name not in CATALOG:
        raise KeyError(f"unknown construction {name!r}; known: {', '.join(sorted(CATALOG))}")
    builder, defaults = CATALOG[name]
    merged = {**defaults, **params}
    rec = builder(**merged)
    rec.parameters = {**merged, **{k: v for k, v in rec.parameters.items() if k not in merged}}
    return rec
