"""Lebesgue and Orlicz norms of radial profiles and potentials."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .core_model import Domain, GridFunction, Potential, RadialGrid


def _values_and_grid(f) -> Tuple[np.ndarray, RadialGrid, Optional[callable]]:
    if isinstance(f, Potential):
        if f.atoms:
            raise ValueError("Lebesgue norms are defined for densities; this potential has atoms")
        return f.values, f.grid, f.profile if f.density is not None else None
    if isinstance(f, GridFunction):
        return f.values, f.grid, f.profile
    raise TypeError(f"expected a GridFunction or Potential, got {type(f).__name__}")


def lebesgue_norm(f, p: float, b=None, quadrature: str = "nodal") -> float:
    """Full n-dimensional ``(int |f|^p b dx)^{1/p}``; ``p = inf`` gives the node maximum.

    ``quadrature="nodal"`` uses the lumped masses (the rule every discrete
    identity in the package is built on); ``"gauss"`` integrates the exact
    profile when one is attached.
    """
    if not p >= 1:
        raise ValueError(f"exponent must be >= 1, got p={p}")
    values, grid, profile = _values_and_grid(f)
    if isinstance(b, GridFunction) and not b.grid.same_as(grid):
        raise ValueError("function and weight live on different grids")
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    if quadrature == "gauss":
        if profile is None:
            raise ValueError("Gauss quadrature needs an exact profile")
        vals = np.abs(np.asarray(profile(grid.gauss_points), dtype=float)) ** p
        total = grid.measure_factor * np.sum(grid.gauss_weights * grid.weight_at_gauss(b) * vals)
    elif quadrature == "nodal":
        if b is not None and np.any(grid.weight_at_gauss(b) <= 0):
            raise ValueError("weight must be positive")
        total = grid.measure_factor * np.dot(grid.mass(b), np.abs(values) ** p)
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    return float(total ** (1.0 / p))


def total_variation(V: Potential) -> float:
    """||V||_M: integral of |density| plus the absolute atom masses."""
    dens = 0.0
    if V.density is not None:
        dens = V.grid.measure_factor * float(np.dot(V.grid.weights, np.abs(V.values)))
    return dens + sum(abs(m) for _, m in V.atoms)


# ---------------------------------------------------------------------------
# The Young pair M(t) = e^t - 1, N(y) = (y log y - y + 1)_{y >= 1}
# ---------------------------------------------------------------------------


def _nonneg(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError(f"{name} must be nonnegative")
    return x


def M(t):
    return np.expm1(_nonneg(t, "t"))


def N(y):
    y = _nonneg(y, "y")
    out = np.zeros_like(y)
    big = y > 1
    yb = y[big]
    # y log y - (y - 1) with log1p for accuracy near y = 1
    out[big] = yb * np.log1p(yb - 1.0) - (yb - 1.0)
    return out


def young_functions(t, y):
    """Return ``(M(t), N(y))``; scalars in, scalars out."""
    m, n = M(t), N(y)
    if np.ndim(t) == 0 and np.ndim(y) == 0:
        return float(m), float(n)
    return m, n


def young_gap(U, v):
    """``M(U) + N(v) - U v >= 0``, evaluated without catastrophic cancellation.

    For v >= 1 the gap equals ``v (e^s - 1 - s)`` with ``s = U - log v``.
    """
    U = _nonneg(U, "U")
    v = _nonneg(v, "v")
    U, v = np.broadcast_arrays(U, v)
    out = np.empty(U.shape)
    big = v >= 1
    s = U[big] - np.log(v[big])
    out[big] = v[big] * (np.expm1(s) - s)
    out[~big] = np.expm1(U[~big]) - U[~big] * v[~big]
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def F_of_lambda(V: Potential, lam: float, domain: Optional[Domain] = None) -> float:
    """``lam * int N(V_+ / lam) dx``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if V.atoms:
        raise ValueError("F(lambda) is defined for densities only; potential has atoms")
    if domain is not None and domain != V.grid.domain:
        raise ValueError("potential lives on a different domain")
    vp = np.maximum(V.values, 0.0)
    return float(lam * V.grid.measure_factor * np.dot(V.grid.weights, N(vp / lam)))


# ---------------------------------------------------------------------------
# Luxemburg-type norm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrliczContext:
    """Domain plus the Moser-Trudinger constant used to scale the Orlicz norm.

    ``C2=None`` means the runtime lower-bound estimate from the extremals module.
    """

    domain: Domain
    C2: Optional[float] = None
    lam: float = 1.0

    def __post_init__(self):
        if self.C2 is not None and not self.C2 > 0:
            raise ValueError(f"C2 must be positive, got {self.C2}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def constant(self) -> float:
        if self.C2 is not None:
            return float(self.C2)
        from .extremals import default_mt_constant

        return default_mt_constant()


def luxemburg_objective(V: Potential, lam: float, ctx: OrliczContext) -> float:
    return lam + F_of_lambda(V.absolute(), lam) / (ctx.constant * ctx.domain.volume)


def luxemburg_norm(V: Potential, ctx: OrliczContext, xtol: float = 1e-10) -> Tuple[float, float]:
    """``inf_lam lam + F_|V|(lam) / (C2 |D|)``; returns ``(value, argmin)``.

    The objective is convex in lam, equals lam for lam >= max|V| and blows up
    as lam -> 0, so a bracket is found on a geometric scan and refined by
    golden-section search in log lam.
    """
    if V.atoms:
        raise ValueError("the Orlicz norm is defined for densities only")
    if V.grid.domain != ctx.domain:
        raise ValueError("potential lives on a different domain than the context")
    top = float(np.max(np.abs(V.values)))
    if top == 0.0:
        return 0.0, 0.0
    absV = V.absolute()
    scale = ctx.constant * ctx.domain.volume

    def phi(log_lam):
        lam = math.exp(log_lam)
        return lam + F_of_lambda(absV, lam) / scale

    l1 = total_variation(absV)
    lo = math.log(max(l1 / (math.e * ctx.domain.volume), top * 1e-300, 1e-300))
    hi = math.log(top)
    lo = min(lo, hi - 1.0)
    for _ in range(60):
        grid = np.linspace(lo, hi, 41)
        vals = np.array([phi(x) for x in grid])
        k = int(np.argmin(vals))
        if 0 < k < grid.size - 1:
            break
        if k == 0:
            lo -= 2.0 * (hi - lo)
        else:  # pragma: no cover - phi is increasing beyond max|V|
            hi += 1.0
    else:
        raise RuntimeError(f"could not bracket the Luxemburg minimizer on [{math.exp(lo)}, {math.exp(hi)}]")
    res = minimize_scalar(phi, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden", tol=xtol)
    best = min((float(res.fun), float(res.x)), (float(vals[k]), float(grid[k])))
    return best[0], math.exp(best[1])


def holder_product(u: GridFunction, V: Potential, q: float) -> Tuple[float, float]:
    """``(int u^2 V_+, ||u^2||_q ||V_+||_r)``: the two sides of the Hoelder step."""
    from .core_model import conjugate

    vp = V.positive_part()
    lhs = u.grid.measure_factor * float(np.dot(u.grid.weights, u.values**2 * vp.values))
    u2 = u.with_values(u.values**2)
    return lhs, lebesgue_norm(u2, q) * lebesgue_norm(vp, conjugate(q))


Number = Union[int, float]
