"""Sobolev constants and their extremals.

The discrete constant on a grid is the maximum of the Rayleigh quotient
``||u||_{2q,b} / ||grad u||_{2,a}`` over P1 functions, with the nonlinear
norm taken by the lumped rule.  It is found by the inverse iteration

    A_a v = m_b * u^{2q-1},   u <- v / ||grad v||_{2,a},

whose quotient increases monotonically and whose fixed points satisfy the
discrete Euler-Lagrange equation exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded
from scipy.special import gammaln, jv
from scipy.optimize import brentq

from .core_model import (
    Annulus,
    Ball,
    Domain,
    Grading,
    GridFunction,
    Interval,
    Potential,
    RadialGrid,
    composite_grid,
    conjugate,
    critical_index,
    gradient_norm_sq,
    make_grid,
    sphere_area,
    stiffness_coefficients,
    unit_ball_volume,
    unit_volume_ball,
)
from .norms import lebesgue_norm


@dataclass(frozen=True)
class WeightPair:
    """Weights ``a`` (energy) and ``b`` (target norm); ``None`` means 1."""

    a: object = None
    b: object = None

    def bounds(self, grid: RadialGrid) -> dict:
        out = {}
        for name in ("a", "b"):
            w = getattr(self, name)
            if w is None:
                out[name] = (1.0, 1.0)
                continue
            vals = np.concatenate([grid.weight_at_gauss(w).ravel(), _nodal(w, grid)])
            out[name] = (float(vals.min()), float(vals.max()))
        return out

    def validate(self, grid: RadialGrid) -> None:
        for name, (lo, hi) in self.bounds(grid).items():
            if not (lo > 0 and math.isfinite(hi)):
                raise ValueError(f"weight {name} must be positive and bounded, got range [{lo}, {hi}]")

    @property
    def unit(self) -> bool:
        return self.a is None and self.b is None


UNIT = WeightPair()


def _nodal(w, grid: RadialGrid) -> np.ndarray:
    if w is None:
        return np.ones(grid.nodes.size)
    if isinstance(w, GridFunction):
        return w.values
    if callable(w):
        return np.asarray(w(grid.nodes), dtype=float) * np.ones(grid.nodes.size)
    return np.asarray(w, dtype=float)


def rayleigh_quotient(u: GridFunction, q: float, w: WeightPair = UNIT, full: bool = True) -> float:
    """``||u||_{2q,b} / ||grad u||_{2,a}``.

    ``full=False`` drops the sphere-area factor, giving the one-dimensional
    quotient with weights ``rho^(n-1) a`` and ``rho^(n-1) b``.
    """
    g = gradient_norm_sq(u, w.a)
    if not g > 0:
        raise ValueError("the gradient norm vanishes; the quotient is undefined")
    if math.isinf(q):
        num = float(np.max(np.abs(u.values)))
    else:
        num = lebesgue_norm(u, 2.0 * q, w.b)
    if not full:
        omega = u.grid.measure_factor
        num = num / omega ** (0.0 if math.isinf(q) else 1.0 / (2.0 * q))
        g = g / omega
    return num / math.sqrt(g)


@dataclass
class ExtremalResult:
    K: float
    u: GridFunction
    q: float
    weights: WeightPair
    iterations: int
    residual: float
    history: List[float] = field(default_factory=list)
    refinement_order: Optional[float] = None
    refinement: List[Tuple[int, float]] = field(default_factory=list)
    converged: bool = True

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    @property
    def extrapolated(self) -> Optional[float]:
        """Richardson extrapolation of the refinement table (second order)."""
        if len(self.refinement) < 2:
            return None
        k1, k2 = self.refinement[-2][1], self.refinement[-1][1]
        return k2 + (k2 - k1) / 3.0


# ---------------------------------------------------------------------------
# Linear algebra on the free nodes
# ---------------------------------------------------------------------------


def _free_mask(grid: RadialGrid) -> np.ndarray:
    inner, outer = grid.domain.dirichlet
    mask = np.ones(grid.nodes.size, dtype=bool)
    mask[0] = not inner
    mask[-1] = not outer
    return mask


def _banded(grid: RadialGrid, a, free: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal, off-diagonal and banded storage of the stiffness on the free nodes."""
    k = stiffness_coefficients(grid, a)
    diag = np.zeros(grid.nodes.size)
    diag[:-1] += k
    diag[1:] += k
    off = -k
    idx = np.nonzero(free)[0]
    d = diag[idx]
    e = off[idx[:-1]]  # free nodes are contiguous
    ab = np.zeros((3, d.size))
    ab[0, 1:] = e
    ab[1] = d
    ab[2, :-1] = e
    return d, e, ab


def _embed(grid, free, vals, inner_zero, outer_zero, profile=None) -> GridFunction:
    full = np.zeros(grid.nodes.size)
    full[free] = vals
    return GridFunction(grid, full, inner_zero, outer_zero, profile)


def first_eigenpair(grid: RadialGrid, w: WeightPair = UNIT) -> Tuple[float, GridFunction]:
    """Smallest eigenpair of ``A_a u = lam M_b u`` (lumped mass), u >= 0 and ||grad u||_{2,a} = 1."""
    free = _free_mask(grid)
    d, e, _ = _banded(grid, w.a, free)
    m = grid.mass(w.b)[free]
    s = 1.0 / np.sqrt(m)
    lam, vec = eigh_tridiagonal(d * s * s, e * s[:-1] * s[1:], select="i", select_range=(0, 0))
    v = vec[:, 0] * s
    v = np.abs(v) if v.sum() >= 0 else np.abs(-v)
    inner, outer = grid.domain.dirichlet
    u = _embed(grid, free, v, inner, outer)
    u = u * (1.0 / math.sqrt(gradient_norm_sq(u, w.a)))
    return float(lam[0]), u


def _check_exponent(domain: Domain, q: float) -> None:
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if math.isinf(q):
        if domain.n != 1:
            raise ValueError("q = inf is only admissible in dimension 1")
        return
    qbar = critical_index(domain.n)
    if isinstance(domain, Annulus):
        return
    if q >= qbar:
        raise ValueError(
            f"q = {q} is not subcritical (critical index {qbar}); no extremal exists, use talenti_constant"
        )


def maximize_constant(
    domain: Domain,
    q: float,
    w: WeightPair = UNIT,
    size: int = 256,
    grading: Optional[Grading] = None,
    grid: Optional[RadialGrid] = None,
    tol: float = 1e-13,
    max_iter: int = 10_000,
    refine: bool = False,
    levels: int = 3,
) -> ExtremalResult:
    """Discrete maximizer of the Rayleigh quotient on ``domain``.

    ``refine=True`` repeats the computation on ``levels`` nested bisections
    and stores the observed convergence order.
    """
    _check_exponent(domain, q)
    grid = grid if grid is not None else make_grid(domain, size, grading)
    if grid.domain != domain:
        raise ValueError("grid does not belong to the domain")
    w.validate(grid)
    res = _maximize_on(grid, q, w, tol, max_iter)
    if refine:
        table = [(grid.size, res.K)]
        g = grid
        for _ in range(levels - 1):
            g = g.refine()
            table.append((g.size, _maximize_on(g, q, w, tol, max_iter).K))
        res.refinement = table
        res.refinement_order = observed_order([k for _, k in table])
    return res


def observed_order(values) -> Optional[float]:
    """log2 of the ratio of successive differences of the last three values."""
    if len(values) < 3:
        return None
    d1 = values[-3] - values[-2]
    d2 = values[-2] - values[-1]
    if d2 == 0 or d1 == 0 or d1 / d2 <= 0:
        return None
    return math.log2(d1 / d2)


def _maximize_on(grid: RadialGrid, q: float, w: WeightPair, tol: float, max_iter: int) -> ExtremalResult:
    if math.isinf(q):
        return _green_argmax(grid, w)
    lam, u = first_eigenpair(grid, w)
    K = rayleigh_quotient(u, q, w)
    history = [K]
    if q == 1:
        return ExtremalResult(K, u, q, w, 0, 0.0, history)
    free = _free_mask(grid)
    _, _, ab = _banded(grid, w.a, free)
    mb = grid.mass(w.b)[free]
    inner, outer = grid.domain.dirichlet
    change = math.inf
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        rhs = mb * u.values[free] ** (2.0 * q - 1.0)
        v = solve_banded((1, 1), ab, rhs)
        v = np.maximum(v, 0.0)
        nxt = _embed(grid, free, v, inner, outer)
        nxt = nxt * (1.0 / math.sqrt(gradient_norm_sq(nxt, w.a)))
        K_new = rayleigh_quotient(nxt, q, w)
        if K_new < K - 1e-12 * K:
            raise RuntimeError(f"quotient decreased at iteration {it}: {K} -> {K_new}")
        change = float(np.max(np.abs(nxt.values - u.values)) / np.max(np.abs(nxt.values)))
        rel = abs(K_new - K) / K_new
        u, K = nxt, K_new
        history.append(K)
        if rel < tol and change < 1e-9:
            converged = True
            break
    if not converged:
        raise RuntimeError(f"no convergence after {max_iter} iterations (last change {change:.3e})")
    return ExtremalResult(K, u, q, w, it, change, history)


def _green_argmax(grid: RadialGrid, w: WeightPair) -> ExtremalResult:
    """q = inf in one dimension: K^2 = max_i G_ii with G the discrete Green function."""
    k = stiffness_coefficients(grid, w.a)
    resist = 1.0 / k
    left = np.concatenate([[0.0], np.cumsum(resist)])
    total = left[-1]
    right = total - left
    gii = left * right / total
    i = int(np.argmax(gii))
    # discrete Green function with pole at node i
    vals = np.where(np.arange(grid.nodes.size) <= i, left * right[i], right * left[i]) / total
    vals[0] = vals[-1] = 0.0
    u = GridFunction(grid, vals, True, True)
    u = u * (1.0 / math.sqrt(gradient_norm_sq(u, w.a)))
    K = rayleigh_quotient(u, math.inf, w)
    return ExtremalResult(K, u, math.inf, w, 1, 0.0, [K])


# ---------------------------------------------------------------------------
# Euler-Lagrange potentials
# ---------------------------------------------------------------------------


def euler_lagrange_potential(res: ExtremalResult, q: Optional[float] = None, w: Optional[WeightPair] = None) -> Potential:
    """``V = u^{2q-2} ||grad u||^2_{2,a} / ||u||^{2q}_{2q,b}``; then ``K^2 ||V||_{r,b} = 1``."""
    q = res.q if q is None else q
    w = res.weights if w is None else w
    if math.isinf(q):
        raise ValueError("q = inf has no Euler-Lagrange potential; use the hat construction")
    u = res.u
    G = gradient_norm_sq(u, w.a)
    S = lebesgue_norm(u, 2.0 * q, w.b) ** (2.0 * q)
    vals = np.abs(u.values) ** (2.0 * q - 2.0) * (G / S)
    if q == 1:
        vals = np.full(u.values.size, G / S)
    return Potential(GridFunction(u.grid, vals))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def talenti_constant(n: int) -> float:
    """Sharp critical Sobolev constant on R^n."""
    if n < 3:
        raise ValueError(f"the critical constant needs n >= 3, got n={n}")
    return math.exp(-0.5 * math.log(n * (n - 2) * math.pi) + (gammaln(n) - gammaln(n / 2.0)) / n)


def bessel_zero(nu: float) -> float:
    """First positive zero of J_nu (nu > -1)."""
    if nu == -0.5:
        return math.pi / 2.0
    if nu == 0.5:
        return math.pi
    # j_{nu,1} lies in (nu, nu + 2 sqrt(nu + 1) + 2) for nu > -1
    lo = max(nu, 0.0) + 1e-9
    hi = max(nu, 0.0) + 2.0 * math.sqrt(nu + 1.0) + 2.5
    xs = np.linspace(lo, hi, 400)
    ys = jv(nu, xs)
    k = int(np.nonzero(np.sign(ys[:-1]) != np.sign(ys[1:]))[0][0])
    return brentq(lambda x: jv(nu, x), xs[k], xs[k + 1], xtol=1e-15)


def closed_form_constant(domain: Domain, q: float) -> Optional[float]:
    """Known exact constants, or None."""
    if isinstance(domain, Interval):
        if q == 1:
            return 2.0 * domain.b / math.pi
        if math.isinf(q):
            return math.sqrt(domain.b / 2.0)
        return None
    if isinstance(domain, Ball):
        if q == 1:
            return domain.R / bessel_zero(domain.n / 2.0 - 1.0)
        if domain.n >= 3 and math.isclose(q, critical_index(domain.n), rel_tol=1e-12):
            return talenti_constant(domain.n)
    return None


def radial_constant_relation(K: float, q: float, n: int) -> float:
    """Convert a 1D weighted constant into the radial one: ``omega_n^{1/(2q) - 1/2} K``."""
    expo = (0.0 if math.isinf(q) else 1.0 / (2.0 * q)) - 0.5
    return sphere_area(n) ** expo * K


def dilation_scale(K: float, t: float, n: int, q: float) -> float:
    """Constant of the dilated domain tD: ``K t^{1 - n/2 + n/(2q)}``."""
    if not t > 0:
        raise ValueError(f"scale must be positive, got {t}")
    expo = 1.0 - n / 2.0 + (0.0 if math.isinf(q) else n / (2.0 * q))
    if n >= 3 and math.isclose(q, critical_index(n), rel_tol=1e-12):
        expo = 0.0
    return K * t**expo


def bessel_relation(dims=(1, 3), size: int = 512) -> dict:
    """Compare the variational K_1 of the unit-volume ball with ``(j omega^{1/n})^{-1}``.

    Both readings of omega are tried (sphere area and unit-ball volume), and
    ``K`` as well as ``K^2`` are compared with the reciprocal first Dirichlet
    eigenvalue.  The entry ``convention`` names the reading that matches in
    every dimension, if exactly one does.
    """
    rows = {}
    matches = {"sphere_area": True, "unit_ball_volume": True}
    for n in dims:
        domain = unit_volume_ball(n)
        res = maximize_constant(domain, 1.0, size=size, refine=True)
        K = res.extrapolated
        j = bessel_zero(n / 2.0 - 1.0)
        pred = {
            "sphere_area": 1.0 / (j * sphere_area(n) ** (1.0 / n)),
            "unit_ball_volume": 1.0 / (j * unit_ball_volume(n) ** (1.0 / n)),
        }
        lam1, _ = first_eigenpair(make_grid(domain, size))
        ok = {k: abs(v - K) <= 1e-3 * K for k, v in pred.items()}
        for k in matches:
            matches[k] = matches[k] and ok[k]
        rows[n] = {
            "K": K,
            "K_squared": K * K,
            "inverse_eigenvalue": 1.0 / lam1,
            "bessel_zero": j,
            "predicted": pred,
            "matches": ok,
            "K_matches_inverse_eigenvalue": abs(K - 1.0 / lam1) <= 1e-3 / lam1,
            "K_squared_matches_inverse_eigenvalue": abs(K * K - 1.0 / lam1) <= 1e-3 / lam1,
        }
    names = [k for k, v in matches.items() if v]
    distinguishing = [k for k in names if any(not rows[n]["matches"][other] for n in rows for other in matches if other != k)]
    return {"dimensions": rows, "matching": names, "convention": distinguishing[0] if len(distinguishing) == 1 else None}


# ---------------------------------------------------------------------------
# Moser-Trudinger
# ---------------------------------------------------------------------------


def mt_functional(u: GridFunction, domain: Optional[Domain] = None) -> float:
    """``int (exp(4 pi u^2 / ||grad u||^2) - 1) dx / |D|``, a lower bound for C2."""
    domain = domain or u.grid.domain
    g = gradient_norm_sq(u)
    if not g > 0:
        raise ValueError("the gradient norm vanishes")
    U = 4.0 * math.pi * u.values**2 / g
    return u.grid.integrate(np.expm1(U)) / domain.volume


def mt_extremal_data(u: GridFunction) -> Tuple[np.ndarray, Potential, float]:
    """Normalize u, then return ``(U, V, lam)`` with ``U = 4 pi u^2``,
    ``V = e^U / int u^2 e^U`` and ``lam = 1 / int u^2 e^U`` (so ``e^U = V / lam``)."""
    g = gradient_norm_sq(u)
    if not g > 0:
        raise ValueError("the gradient norm vanishes")
    un = u.values / math.sqrt(g)
    U = 4.0 * math.pi * un**2
    denom = u.grid.integrate(un**2 * np.exp(U))
    if not denom > 1e-300:
        raise FloatingPointError("normalizing integral underflowed; u is too small")
    V = Potential(GridFunction(u.grid, np.exp(U) / denom))
    return U, V, 1.0 / denom


def mt_extremal_potential(u: GridFunction, domain: Optional[Domain] = None) -> Potential:
    """Potential built from a Moser-Trudinger trial profile; ``int U V = 4 pi``."""
    return mt_extremal_data(u)[1]


def moser_profile(delta: float):
    """Truncated logarithm on the unit disk with unit Dirichlet energy."""
    L = math.log(1.0 / delta)
    top = math.sqrt(L / (2.0 * math.pi))
    scale = 1.0 / math.sqrt(2.0 * math.pi * L)

    def f(rho):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.log(1.0 / np.maximum(rho, delta)) * scale
        return np.where(rho < delta, top, out)

    return f


def moser_grid(delta: float, cells: int = 64) -> RadialGrid:
    disk = Ball(2, 1.0)
    inner = max(16, cells // 4)
    return composite_grid(disk, [(0.0, delta, inner, 1.0, "lo"), (delta, 1.0, cells, _ratio(delta, cells), "lo")])


def _ratio(delta: float, cells: int) -> float:
    """Geometric ratio that spreads ``cells`` cells log-uniformly over [delta, 1]."""
    return max(1.0 + 1e-9, (1.0 / delta) ** (1.0 / cells))


def estimate_mt_constant(deltas=None, cells: int = 256) -> Tuple[float, float, List[Tuple[float, float]]]:
    """Lower bound for C2: max of the MT functional over Moser profiles.

    Returns ``(C2_hat, best_delta, table)``.
    """
    if deltas is None:
        deltas = np.geomspace(0.5, 1e-6, 41)
    table = []
    for d in deltas:
        g = moser_grid(float(d), cells)
        u = GridFunction.sample(g, moser_profile(float(d)), zero_inner=False, zero_outer=True)
        table.append((float(d), mt_functional(u)))
    best = max(table, key=lambda t: t[1])
    return best[1], best[0], table


@lru_cache(maxsize=1)
def default_mt_constant() -> float:
    return estimate_mt_constant()[0]
