"""Radial domains, graded grids, quadrature and discrete differential operators.

Every problem in the package is radial: a function on a ball or annulus is stored
as a profile ``u(rho)`` on a 1D grid over the radial extent, and n-dimensional
integrals carry the measure ``omega_n * rho**(n-1) d rho``.  Intervals are the
n = 1 case with the grid spanning the whole interval and unit measure factor.

The discretization is continuous piecewise-linear (P1).  Cell integrals of the
weight ``rho**(n-1)`` times any smooth coefficient are taken with 8-point
Gauss-Legendre rules, so energies of P1 functions are exact for polynomial
coefficients.  Nonlinear integrands of nodal data use the lumped (nodal) rule
``sum_i m_i f(u_i)`` with ``m_i = int phi_i rho**(n-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

GAUSS_POINTS = 8
_GX, _GW = leggauss(GAUSS_POINTS)
_PHI_L = 0.5 * (1.0 - _GX)
_PHI_R = 0.5 * (1.0 + _GX)

MIN_CELLS = 16


def sphere_area(n: int) -> float:
    """|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def unit_ball_volume(n: int) -> float:
    return sphere_area(n) / n


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


class Domain:
    """Common interface of the radial domains."""

    kind = "domain"
    n: int

    @property
    def extent(self) -> Tuple[float, float]:
        raise NotImplementedError

    @property
    def volume(self) -> float:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def measure_factor(self) -> float:
        return sphere_area(self.n)

    @property
    def sphere_area(self) -> float:
        return sphere_area(self.n)

    @property
    def unit_ball_volume(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def dirichlet(self) -> Tuple[bool, bool]:
        """Which radial endpoints carry the homogeneous Dirichlet condition."""
        return (True, True)

    def dist(self, rho):
        """Distance to the boundary as a function of the radial coordinate."""
        raise NotImplementedError

    def scaled(self, t: float) -> "Domain":
        raise NotImplementedError


@dataclass(frozen=True)
class Interval(Domain):
    """The interval (center - b, center + b)."""

    b: float
    center: float = 0.0
    kind = "interval"

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ValueError(f"Interval half-length must be positive, got b={self.b}")

    @property
    def n(self) -> int:
        return 1

    @property
    def extent(self):
        return (self.center - self.b, self.center + self.b)

    @property
    def volume(self):
        return 2.0 * self.b

    @property
    def diameter(self):
        return 2.0 * self.b

    @property
    def measure_factor(self):
        # the grid already spans both sides of the interval
        return 1.0

    def dist(self, x):
        return self.b - np.abs(np.asarray(x, dtype=float) - self.center)

    def scaled(self, t):
        return Interval(self.b * t, self.center * t)


@dataclass(frozen=True)
class Ball(Domain):
    n: int
    R: float
    kind = "ball"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"Ball dimension must be a positive integer, got n={self.n}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ValueError(f"Ball radius must be positive, got R={self.R}")

    @property
    def extent(self):
        return (0.0, float(self.R))

    @property
    def volume(self):
        return unit_ball_volume(self.n) * self.R**self.n

    @property
    def diameter(self):
        return 2.0 * self.R

    @property
    def dirichlet(self):
        return (False, True)

    def dist(self, rho):
        return self.R - np.asarray(rho, dtype=float)

    def scaled(self, t):
        return Ball(self.n, self.R * t)


@dataclass(frozen=True)
class Annulus(Domain):
    n: int
    c: float
    d: float
    kind = "annulus"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"Annulus dimension must be an integer >= 2, got n={self.n}")
        if not (0 < self.c < self.d < math.inf):
            raise ValueError(f"Annulus needs 0 < c < d < inf, got c={self.c}, d={self.d}")

    @property
    def extent(self):
        return (float(self.c), float(self.d))

    @property
    def volume(self):
        return unit_ball_volume(self.n) * (self.d**self.n - self.c**self.n)

    @property
    def diameter(self):
        return 2.0 * self.d

    def dist(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.minimum(rho - self.c, self.d - rho)

    def scaled(self, t):
        return Annulus(self.n, self.c * t, self.d * t)


def unit_volume_ball(n: int) -> Domain:
    """The ball of volume one; an interval centred at 0 when n = 1."""
    if n == 1:
        return Interval(0.5)
    return Ball(n, (1.0 / unit_ball_volume(n)) ** (1.0 / n))


# ---------------------------------------------------------------------------
# Exponents
# ---------------------------------------------------------------------------


def conjugate(p: float) -> float:
    """Hoelder conjugate with 1* = inf and inf* = 1."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    return p / (p - 1.0)


def critical_index(n: int) -> float:
    return n / (n - 2.0) if n >= 3 else math.inf


@dataclass(frozen=True)
class ExponentPair:
    """Conjugate exponents (r, q) in dimension n, plus the nonlinear extras.

    ``r`` is the Lebesgue exponent of the potential and ``q = r*``; Sobolev
    constants embed into L^{2q}.
    """

    r: float
    n: int
    beta: Optional[float] = None
    s: Optional[float] = None

    def __post_init__(self):
        if not self.r >= 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.beta is not None and self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @classmethod
    def from_q(cls, q: float, n: int, beta=None, s=None) -> "ExponentPair":
        return cls(conjugate(q), n, beta, s)

    @property
    def q(self) -> float:
        return conjugate(self.r)

    @property
    def q_bar(self) -> float:
        return critical_index(self.n)

    @property
    def q_hat(self) -> Optional[float]:
        if self.beta is None:
            return None
        return self.q * (self.beta + 1.0) / 2.0

    @property
    def subcritical(self) -> bool:
        return self.q < self.q_bar

    @property
    def critical(self) -> bool:
        return self.n >= 3 and math.isclose(self.q, self.q_bar, rel_tol=1e-12)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grading:
    """Node distribution: ``uniform`` or ``geometric`` clustering toward a point.

    For geometric grading consecutive cell widths grow by ``ratio`` away from
    ``toward``, which must be a radial endpoint (or the centre of an interval,
    which clusters symmetrically).
    """

    kind: str = "uniform"
    toward: Optional[float] = None
    ratio: float = 1.05

    def __post_init__(self):
        if self.kind not in ("uniform", "geometric"):
            raise ValueError(f"unknown grading kind {self.kind!r}")
        if self.kind == "geometric" and not self.ratio > 1:
            raise ValueError("geometric grading needs ratio > 1")


def _geometric_widths(count: int, length: float, ratio: float) -> np.ndarray:
    w = ratio ** np.arange(count, dtype=float)
    return w * (length / w.sum())


def geometric_nodes(lo: float, hi: float, count: int, ratio: float, toward: str = "lo") -> np.ndarray:
    """``count`` cells on [lo, hi] with widths growing by ``ratio`` away from ``toward``."""
    w = _geometric_widths(count, hi - lo, ratio)
    if toward == "hi":
        w = w[::-1]
    nodes = lo + np.concatenate([[0.0], np.cumsum(w)])
    nodes[-1] = hi
    return nodes


def make_grid(domain: Domain, size: int, grading: Optional[Grading] = None) -> "RadialGrid":
    """Grid with ``size`` cells over the radial extent of ``domain``."""
    grading = grading or Grading()
    size = int(size)
    if size < MIN_CELLS:
        raise ValueError(f"grid needs at least {MIN_CELLS} cells, got {size}")
    lo, hi = domain.extent
    if grading.kind == "uniform":
        nodes = np.linspace(lo, hi, size + 1)
        return RadialGrid(nodes, domain, grading)

    toward = grading.toward if grading.toward is not None else lo
    scale = max(abs(lo), abs(hi), 1.0)
    if math.isclose(toward, lo, abs_tol=1e-14 * scale):
        nodes = geometric_nodes(lo, hi, size, grading.ratio, "lo")
    elif math.isclose(toward, hi, abs_tol=1e-14 * scale):
        nodes = geometric_nodes(lo, hi, size, grading.ratio, "hi")
    elif isinstance(domain, Interval) and math.isclose(toward, domain.center, abs_tol=1e-14 * scale):
        if size % 2:
            raise ValueError("centre-clustered interval grids need an even number of cells")
        right = geometric_nodes(domain.center, hi, size // 2, grading.ratio, "lo")
        left = 2 * domain.center - right[::-1]
        nodes = np.concatenate([left[:-1], right])
        nodes[0], nodes[-1] = lo, hi
    else:
        raise ValueError(f"grading endpoint {toward} is not a boundary point or origin of {domain}")
    return RadialGrid(nodes, domain, grading)


class RadialGrid:
    """Nodes over the radial extent of a domain, with P1 quadrature data.

    ``weights`` are the lumped masses ``int phi_i rho**(n-1) d rho`` (without
    the sphere-area factor, which lives in ``measure_factor``).
    """

    def __init__(self, nodes, domain: Domain, grading: Optional[Grading] = None):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < MIN_CELLS + 1:
            raise ValueError(f"grid needs at least {MIN_CELLS} cells")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        lo, hi = domain.extent
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if abs(nodes[0] - lo) > tol or abs(nodes[-1] - hi) > tol:
            raise ValueError(f"grid [{nodes[0]}, {nodes[-1]}] does not span {domain}")
        nodes[0], nodes[-1] = lo, hi
        nodes.setflags(write=False)
        self.nodes = nodes
        self.domain = domain
        self.grading = grading

    def __repr__(self):
        return f"RadialGrid({self.domain}, cells={self.size})"

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def size(self) -> int:
        return self.nodes.size - 1

    @property
    def power(self) -> int:
        return self.n - 1

    @property
    def measure_factor(self) -> float:
        return self.domain.measure_factor

    @cached_property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        """Largest cell width relative to the radial extent."""
        return float(self.widths.max() / (self.nodes[-1] - self.nodes[0]))

    @cached_property
    def gauss_points(self) -> np.ndarray:
        mid = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        half = 0.5 * self.widths
        return mid[:, None] + half[:, None] * _GX[None, :]

    @cached_property
    def gauss_weights(self) -> np.ndarray:
        """Gauss weights including the radial measure rho**(n-1)."""
        half = 0.5 * self.widths
        w = half[:, None] * _GW[None, :]
        if self.power:
            w = w * self.gauss_points**self.power
        return w

    def weight_at_gauss(self, weight) -> np.ndarray:
        """Evaluate a weight (None, callable, GridFunction or nodal array) at Gauss points."""
        if weight is None:
            return np.ones_like(self.gauss_points)
        if isinstance(weight, GridFunction):
            if weight.profile is not None:
                return np.asarray(weight.profile(self.gauss_points), dtype=float) * np.ones_like(self.gauss_points)
            return self.interpolate(weight.values)
        if callable(weight):
            return np.asarray(weight(self.gauss_points), dtype=float) * np.ones_like(self.gauss_points)
        return self.interpolate(np.asarray(weight, dtype=float))

    def interpolate(self, values: np.ndarray) -> np.ndarray:
        """P1 interpolant of nodal values at the Gauss points, shape (cells, points)."""
        return values[:-1, None] * _PHI_L[None, :] + values[1:, None] * _PHI_R[None, :]

    def half_masses(self, weight=None) -> Tuple[np.ndarray, np.ndarray]:
        """Contributions to each nodal mass from the cell on its left and on its right."""
        gw = self.gauss_weights * self.weight_at_gauss(weight)
        left_part = gw @ _PHI_L  # cell k -> node k
        right_part = gw @ _PHI_R  # cell k -> node k+1
        from_left = np.zeros(self.nodes.size)
        from_right = np.zeros(self.nodes.size)
        from_left[1:] = right_part
        from_right[:-1] = left_part
        return from_left, from_right

    def mass(self, weight=None) -> np.ndarray:
        """Lumped masses ``int phi_i * weight * rho**(n-1)``."""
        a, b = self.half_masses(weight)
        return a + b

    @cached_property
    def weights(self) -> np.ndarray:
        m = self.mass()
        m.setflags(write=False)
        return m

    def cell_integrals(self, weight=None) -> np.ndarray:
        """``int_cell weight * rho**(n-1)`` for every cell."""
        return (self.gauss_weights * self.weight_at_gauss(weight)).sum(axis=1)

    def integrate(self, f, weight=None) -> float:
        """Full n-dimensional integral of ``f`` over the domain.

        A callable is integrated with the Gauss rule; nodal values with the
        lumped rule.
        """
        if callable(f) and not isinstance(f, GridFunction):
            vals = np.asarray(f(self.gauss_points), dtype=float) * self.weight_at_gauss(weight)
            return float(self.measure_factor * np.sum(self.gauss_weights * vals))
        values = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
        return float(self.measure_factor * np.dot(self.mass(weight), values))

    def refine(self) -> "RadialGrid":
        """Bisect every cell (nested refinement)."""
        mid = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        nodes = np.empty(2 * self.size + 1)
        nodes[0::2] = self.nodes
        nodes[1::2] = mid
        return RadialGrid(nodes, self.domain, self.grading)

    def scaled(self, t: float) -> "RadialGrid":
        return RadialGrid(self.nodes * t, self.domain.scaled(t), self.grading)

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (
            self.domain == other.domain
            and self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
        )


def composite_grid(domain: Domain, segments: Sequence[Tuple[float, float, int, float, str]]) -> RadialGrid:
    """Glue graded segments ``(lo, hi, cells, ratio, toward)`` into one grid.

    ``ratio == 1`` gives a uniform segment; ``toward`` is ``"lo"`` or ``"hi"``.
    Segment ends become nodes, which keeps profile breakpoints on the grid.
    """
    parts = []
    for lo, hi, cells, ratio, toward in segments:
        if ratio == 1:
            seg = np.linspace(lo, hi, int(cells) + 1)
        else:
            seg = geometric_nodes(lo, hi, int(cells), ratio, toward)
        parts.append(seg if not parts else seg[1:])
    return RadialGrid(np.concatenate(parts), domain, Grading("geometric", None, 1.0 + 1e-9))


# ---------------------------------------------------------------------------
# Profiles and grid functions
# ---------------------------------------------------------------------------


class Piecewise:
    """A radial profile given by different formulas between breakpoints.

    ``pieces[k]`` is used on ``[breaks[k-1], breaks[k])``.  Sampling on a grid
    resolves jumps at breakpoints with a mass-weighted average of the two
    one-sided limits, which keeps the lumped rule second order.
    """

    def __init__(self, breaks: Sequence[float], pieces: Sequence[Callable]):
        if len(pieces) != len(breaks) + 1:
            raise ValueError("need one more piece than breakpoints")
        self.breaks = np.asarray(breaks, dtype=float)
        self.pieces = list(pieces)

    def _eval(self, x, side):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breaks, x, side="right" if side == "right" else "left")
        out = np.zeros_like(x)
        for k, f in enumerate(self.pieces):
            mask = idx == k
            if np.any(mask):
                out[mask] = f(x[mask])
        return out

    def __call__(self, x):
        return self._eval(x, "right")

    def left(self, x):
        return self._eval(x, "left")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal values of a radial profile.

    Boundary flags mark the endpoints where the function vanishes (the
    discrete surrogate of membership in W_0^{1,2}).  ``profile`` optionally
    keeps the exact formula the values were sampled from.
    """

    grid: RadialGrid
    values: np.ndarray
    zero_inner: bool = False
    zero_outer: bool = False
    profile: Optional[Callable] = None
    defined: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ValueError(f"expected {self.grid.nodes.size} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        if self.zero_inner and values[0] != 0.0:
            raise ValueError(f"inner boundary value must be exactly 0, got {values[0]}")
        if self.zero_outer and values[-1] != 0.0:
            raise ValueError(f"outer boundary value must be exactly 0, got {values[-1]}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, grid: RadialGrid, f: Callable, zero_inner=None, zero_outer=None, tol=1e-9) -> "GridFunction":
        """Sample ``f`` at the nodes, clamping flagged boundary values to 0.

        Flags default to the domain's Dirichlet endpoints.
        """
        inner, outer = grid.domain.dirichlet
        zero_inner = inner if zero_inner is None else zero_inner
        zero_outer = outer if zero_outer is None else zero_outer
        values = np.asarray(f(grid.nodes), dtype=float) * np.ones(grid.nodes.size)
        if isinstance(f, Piecewise):
            values = _average_jumps(grid, f, values)
        scale = max(float(np.max(np.abs(values))), 1e-300)
        for flag, idx in ((zero_inner, 0), (zero_outer, -1)):
            if flag:
                if abs(values[idx]) > tol * scale:
                    raise ValueError(f"profile does not vanish at the boundary node (value {values[idx]})")
                values[idx] = 0.0
        return cls(grid, values, zero_inner, zero_outer, f)

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "GridFunction":
        return cls(grid, np.zeros(grid.nodes.size), profile=lambda x: np.zeros_like(np.asarray(x, float)))

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def free(self) -> np.ndarray:
        """Mask of nodes not pinned by a boundary flag."""
        mask = np.ones(self.values.size, dtype=bool)
        mask[0] = not self.zero_inner
        mask[-1] = not self.zero_outer
        return mask

    def with_values(self, values, profile=None) -> "GridFunction":
        return GridFunction(self.grid, values, self.zero_inner, self.zero_outer, profile)

    def __mul__(self, c):
        c = float(c)
        prof = None if self.profile is None else (lambda x, f=self.profile: c * f(x))
        return self.with_values(c * self.values, prof)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __add__(self, other: "GridFunction"):
        if not self.grid.same_as(other.grid):
            raise ValueError("grid functions live on different grids")
        prof = None
        if self.profile is not None and other.profile is not None:
            prof = lambda x, f=self.profile, g=other.profile: f(x) + g(x)  # noqa: E731
        return GridFunction(
            self.grid,
            self.values + other.values,
            self.zero_inner and other.zero_inner,
            self.zero_outer and other.zero_outer,
            prof,
        )

    def at_gauss(self) -> np.ndarray:
        if self.profile is not None:
            return np.asarray(self.profile(self.grid.gauss_points), dtype=float) * np.ones_like(self.grid.gauss_points)
        return self.grid.interpolate(self.values)

    def slopes(self) -> np.ndarray:
        """Cell-wise derivative of the P1 interpolant."""
        return np.diff(self.values) / self.grid.widths

    def __call__(self, x):
        """P1 interpolation at arbitrary points of the radial extent."""
        return np.interp(x, self.grid.nodes, self.values)


def _average_jumps(grid: RadialGrid, f: Piecewise, values: np.ndarray) -> np.ndarray:
    from_left, from_right = grid.half_masses()
    for br in f.breaks:
        hit = np.nonzero(np.isclose(grid.nodes, br, rtol=0, atol=1e-13 * max(1.0, abs(br))))[0]
        for i in hit:
            lv = float(f.left(np.array([grid.nodes[i]]))[0])
            rv = float(f(np.array([grid.nodes[i]]))[0])
            tot = from_left[i] + from_right[i]
            if tot > 0:
                values[i] = (from_left[i] * lv + from_right[i] * rv) / tot
    return values


def singular_sample(grid: RadialGrid, f: Callable, nodes_idx: Sequence[int]) -> np.ndarray:
    """Nodal values of ``f`` with the listed nodes replaced by lumped-consistent averages.

    At node i the value becomes ``int phi_i f rho^{n-1} / m_i``, finite for
    integrable singularities sitting on the node.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.asarray(f(grid.nodes), dtype=float) * np.ones(grid.nodes.size)
    gw = grid.gauss_weights * np.asarray(f(grid.gauss_points), dtype=float)
    for i in nodes_idx:
        i = int(i) % grid.nodes.size
        num = 0.0
        if i > 0:
            num += float(gw[i - 1] @ _PHI_R)
        if i < grid.size:
            num += float(gw[i] @ _PHI_L)
        values[i] = num / grid.weights[i]
    return values


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Potential:
    """A signed measure: nodal density plus point masses ``(location, mass)``.

    Atoms are only meaningful in one dimension.
    """

    density: Optional[GridFunction] = None
    atoms: Tuple[Tuple[float, float], ...] = ()
    grid: Optional[RadialGrid] = None

    def __post_init__(self):
        grid = self.grid if self.grid is not None else (self.density.grid if self.density is not None else None)
        if grid is None:
            raise ValueError("a potential needs a density or a grid")
        if self.density is not None and not self.density.grid.same_as(grid):
            raise ValueError("density lives on a different grid")
        object.__setattr__(self, "grid", grid)
        atoms = tuple((float(x), float(m)) for x, m in self.atoms)
        if atoms and grid.n != 1:
            raise ValueError("point masses are only admitted in dimension 1")
        lo, hi = grid.domain.extent
        for x, m in atoms:
            if not lo < x < hi:
                raise ValueError(f"atom at {x} lies outside {grid.domain}")
            if not math.isfinite(m):
                raise ValueError("atom masses must be finite")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_profile(cls, grid: RadialGrid, f: Callable) -> "Potential":
        return cls(GridFunction.sample(grid, f, zero_inner=False, zero_outer=False))

    @classmethod
    def from_values(cls, grid: RadialGrid, values) -> "Potential":
        return cls(GridFunction(grid, values))

    @property
    def values(self) -> np.ndarray:
        if self.density is None:
            return np.zeros(self.grid.nodes.size)
        return self.density.values

    @property
    def profile(self) -> Optional[Callable]:
        if self.density is None:
            return lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return self.density.profile

    def _map(self, fn: Callable, atom_fn: Callable) -> "Potential":
        dens = None
        if self.density is not None:
            prof = None
            if self.density.profile is not None:
                prof = lambda x, p=self.density.profile: fn(np.asarray(p(x), dtype=float))  # noqa: E731
            dens = GridFunction(self.grid, fn(self.density.values), profile=prof)
        atoms = tuple((x, atom_fn(m)) for x, m in self.atoms if atom_fn(m) != 0.0)
        return Potential(dens, atoms, self.grid)

    def positive_part(self) -> "Potential":
        return self._map(lambda v: np.maximum(v, 0.0), lambda m: max(m, 0.0))

    def negative_part(self) -> "Potential":
        return self._map(lambda v: np.maximum(-v, 0.0), lambda m: max(-m, 0.0))

    def absolute(self) -> "Potential":
        return self._map(np.abs, abs)

    def scaled(self, c: float) -> "Potential":
        return self._map(lambda v: c * v, lambda m: c * m)

    def shifted(self, E: float) -> "Potential":
        """V + E (the constant only shifts the density)."""
        base = self.density if self.density is not None else GridFunction.zeros(self.grid)
        prof = None
        if base.profile is not None:
            prof = lambda x, p=base.profile: np.asarray(p(x), dtype=float) + E  # noqa: E731
        return Potential(GridFunction(self.grid, base.values + E, profile=prof), self.atoms, self.grid)

    def minus(self, other: GridFunction, factor: float = 1.0) -> "Potential":
        """V - factor * other, for a density ``other`` on the same grid."""
        base = self.density if self.density is not None else GridFunction.zeros(self.grid)
        if not other.grid.same_as(self.grid):
            raise ValueError("grids differ")
        prof = None
        if base.profile is not None and other.profile is not None:
            prof = lambda x, p=base.profile, q=other.profile: np.asarray(p(x), float) - factor * np.asarray(q(x), float)  # noqa: E731
        return Potential(GridFunction(self.grid, base.values - factor * other.values, profile=prof), self.atoms, self.grid)


# ---------------------------------------------------------------------------
# Discrete operators
# ---------------------------------------------------------------------------


def _check_weight_positive(grid: RadialGrid, a) -> None:
    if a is None:
        return
    vals = a.values if isinstance(a, GridFunction) else None
    if vals is not None and np.any(vals <= 0):
        raise ValueError("weight must be positive at every node")
    if np.any(grid.weight_at_gauss(a) <= 0):
        raise ValueError("weight must be positive")


def stiffness_coefficients(grid: RadialGrid, a=None) -> np.ndarray:
    """Cell stiffness ``int_cell a rho^{n-1} / h^2`` (energy = sum k (du)^2)."""
    return grid.cell_integrals(a) / grid.widths**2


def stiffness_apply(grid: RadialGrid, values: np.ndarray, a=None) -> np.ndarray:
    """(A u)_i = int a u_h' phi_i' rho^{n-1} for every node (no measure factor)."""
    k = stiffness_coefficients(grid, a)
    flux = k * np.diff(values)
    out = np.zeros(grid.nodes.size)
    out[:-1] -= flux
    out[1:] += flux
    return out


def gradient_norm_sq(u: GridFunction, a: Optional[GridFunction] = None) -> float:
    """Full n-dimensional ``int a |grad u|^2`` of the P1 interpolant."""
    _check_weight_positive(u.grid, a)
    k = stiffness_coefficients(u.grid, a)
    return float(u.grid.measure_factor * np.sum(k * np.diff(u.values) ** 2))


def first_order_load(u: GridFunction, w) -> np.ndarray:
    """``int w u_h' phi_i rho^{n-1}`` for every node: the term W . grad u tested on hats.

    ``w`` is the radial component of W = w(rho) x/rho (a GridFunction or callable).
    """
    grid = u.grid
    integrand = grid.gauss_weights * grid.weight_at_gauss(w) * u.slopes()[:, None]
    out = np.zeros(grid.nodes.size)
    out[:-1] += integrand @ _PHI_L
    out[1:] += integrand @ _PHI_R
    return out


def gradient_power_average(u: GridFunction, beta: float) -> np.ndarray:
    """Nodal average ``int |u_h'|^beta phi_i rho^{n-1} / m_i``."""
    grid = u.grid
    cell = np.abs(u.slopes()) ** beta
    left, right = grid.half_masses()
    num = np.zeros(grid.nodes.size)
    num[1:] += cell * left[1:]
    num[:-1] += cell * right[:-1]
    return num / grid.weights


def divergence(w: GridFunction) -> GridFunction:
    """div W for W = w(rho) x/rho: w' + (n-1) w / rho (nodal three-point derivative)."""
    grid = w.grid
    x, v = grid.nodes, w.values
    d = np.empty_like(v)
    hm = np.diff(x)[:-1]
    hp = np.diff(x)[1:]
    d[1:-1] = (hm**2 * v[2:] + (hp**2 - hm**2) * v[1:-1] - hp**2 * v[:-2]) / (hm * hp * (hm + hp))
    h0, h1 = x[1] - x[0], x[2] - x[1]
    d[0] = (-(2 * h0 + h1) / (h0 * (h0 + h1))) * v[0] + ((h0 + h1) / (h0 * h1)) * v[1] - (h0 / (h1 * (h0 + h1))) * v[2]
    h0, h1 = x[-1] - x[-2], x[-2] - x[-3]
    d[-1] = ((2 * h0 + h1) / (h0 * (h0 + h1))) * v[-1] - ((h0 + h1) / (h0 * h1)) * v[-2] + (h0 / (h1 * (h0 + h1))) * v[-3]
    n = grid.n
    if n > 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            extra = (n - 1) * v / x
        if x[0] == 0.0:
            # radial field vanishes at the origin; w/rho -> w'(0)
            extra[0] = (n - 1) * d[0]
        d = d + extra
    return GridFunction(grid, d)


def laplacian(u: GridFunction, n: Optional[int] = None) -> GridFunction:
    """Three-point radial Laplacian ``u'' + (n-1)/rho u'`` at the nodes.

    Endpoints are undefined (``defined`` mask False) except the centre of a
    ball, where the even extension gives ``n * 2 (u_1 - u_0) / h^2``.
    """
    grid = u.grid
    n = grid.n if n is None else n
    x, v = grid.nodes, u.values
    if v.size < 3:
        raise ValueError("the Laplacian needs at least 3 nodes")
    out = np.zeros_like(v)
    defined = np.zeros(v.size, dtype=bool)
    hm = np.diff(x)[:-1]
    hp = np.diff(x)[1:]
    denom = hm * hp * (hm + hp)
    d2 = 2.0 * (hm * v[2:] - (hm + hp) * v[1:-1] + hp * v[:-2]) / denom
    d1 = (hm**2 * v[2:] + (hp**2 - hm**2) * v[1:-1] - hp**2 * v[:-2]) / denom
    lap = d2
    if n > 1 and not isinstance(grid.domain, Interval):
        lap = d2 + (n - 1) * d1 / x[1:-1]
    out[1:-1] = lap
    defined[1:-1] = True
    if isinstance(grid.domain, Ball) and x[0] == 0.0:
        out[0] = n * 2.0 * (v[1] - v[0]) / (x[1] - x[0]) ** 2
        defined[0] = True
    return GridFunction(grid, out, defined=defined)


Weight = Union[None, GridFunction, Callable]
