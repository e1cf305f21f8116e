"""Calculus for radial functions sampled on a uniform grid in ``t = ln r``.

Derivatives use fourth-order finite differences in ``t`` followed by the
chain rule. Integrals use the trapezoid rule with fourth-order Gregory end
corrections: the interior weights are all equal, so shifting an integrand
by whole nodes leaves its discrete integral unchanged.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, TruncationError

__all__ = [
    "GridFunction",
    "LogGrid",
    "derivative",
    "fd_weights",
    "gauss_legendre_panels",
    "integrate_weighted",
    "quadrature_weights",
    "radial_laplacian",
    "reduced_laplacian",
]

MIN_POINTS = 16
DECAY_TOL = 1e-12


@dataclass(frozen=True)
class LogGrid:
    """Uniform grid ``t_min = t_0 < ... < t_(n-1) = t_max`` in ``t = ln r``."""

    t_min: float = -20.0
    t_max: float = 20.0
    n_points: int = 4096

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise DomainError(f"need t_min < t_max, got {self.t_min}, {self.t_max}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise DomainError(f"n_points must be an integer >= {MIN_POINTS}, got {self.n_points}")

    @classmethod
    def from_spacing(cls, t_min, t_max, h):
        """Grid with spacing at most ``h`` whose ends bracket ``[t_min, t_max]``."""
        n = int(np.ceil((t_max - t_min) / h)) + 1
        return cls(t_min, t_min + (n - 1) * h, max(n, MIN_POINTS))

    @property
    def h(self):
        return (self.t_max - self.t_min) / (self.n_points - 1)

    @property
    def t(self):
        return self.t_min + self.h * np.arange(self.n_points)

    @property
    def r(self):
        return np.exp(self.t)

    def sample(self, func):
        """:class:`GridFunction` with values ``func(r)`` at the grid radii."""
        return GridFunction(self, func(self.r))

    def interior(self, margin=4):
        return slice(margin, self.n_points - margin)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: LogGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise DomainError(
                f"values must have shape ({self.grid.n_points},), got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("grid function values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def r(self):
        return self.grid.r

    @property
    def t(self):
        return self.grid.t

    def with_values(self, values):
        return GridFunction(self.grid, values)


@lru_cache(maxsize=None)
def fd_weights(offsets, order):
    """Finite-difference weights on integer ``offsets`` for the derivative of ``order``.

    Solves the moment (Vandermonde) system, which is exact for polynomials of
    degree ``len(offsets) - 1``. Weights are for unit spacing.
    """
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    weights = np.linalg.solve(vander, rhs)
    weights.flags.writeable = False
    return weights


# (central offsets, left-end stencils per boundary node)
_STENCILS = {
    1: ((-2, -1, 0, 1, 2), ((0, 1, 2, 3, 4), (-1, 0, 1, 2, 3))),
    2: ((-2, -1, 0, 1, 2), ((0, 1, 2, 3, 4, 5), (-1, 0, 1, 2, 3, 4))),
}


def _diff_t(y, h, order):
    """Fourth-order derivative in t, one-sided stencils at the two end nodes each side."""
    central, edge = _STENCILS[order]
    n = len(y)
    out = np.empty(n)
    w = fd_weights(central, order)
    out[2 : n - 2] = sum(wk * y[2 + k : n - 2 + k] for wk, k in zip(w, central))
    for node, offsets in enumerate(edge):
        w = fd_weights(offsets, order)
        out[node] = sum(wk * y[node + k] for wk, k in zip(w, offsets))
        # mirror for the right end: d/dt changes sign under reflection for odd order
        w_right = fd_weights(tuple(-k for k in offsets), order)
        out[n - 1 - node] = sum(wk * y[n - 1 - node - k] for wk, k in zip(w_right, offsets))
    return out / h**order


def derivative(f, order=1):
    """``df/dr`` (``order=1``) or ``d^2f/dr^2`` (``order=2``) at every node."""
    if order not in (1, 2):
        raise DomainError(f"derivative order must be 1 or 2, got {order}")
    h = f.grid.h
    r = f.r
    ft = _diff_t(f.values, h, 1)
    if order == 1:
        return f.with_values(ft / r)
    ftt = _diff_t(f.values, h, 2)
    return f.with_values((ftt - ft) / r**2)


def radial_laplacian(f, dim):
    """Laplacian of the radial function ``f(|x|)`` in ``R^dim``: ``f'' + (dim-1) f'/r``."""
    h = f.grid.h
    ft = _diff_t(f.values, h, 1)
    ftt = _diff_t(f.values, h, 2)
    return f.with_values((ftt + (dim - 2) * ft) / f.r**2)


def reduced_laplacian(f, N):
    """Radial factor of ``Delta(x1 f(|x|))``, namely ``f'' + (N+1) f'/r``.

    The factor ``x1`` raises the effective dimension by two.
    """
    if N < 5:
        raise DomainError(f"dimension N must be >= 5, got {N}")
    return radial_laplacian(f, N + 2)


@lru_cache(maxsize=64)
def _gregory_weights(n):
    w = np.ones(n)
    ends = np.array([3 / 8, 7 / 6, 23 / 24])
    w[:3] = ends
    w[-3:] = ends[::-1]
    w.flags.writeable = False
    return w


def quadrature_weights(grid):
    """Weights ``w_i`` with ``sum w_i y(t_i) ~ int y dt`` over the grid (fourth order)."""
    return grid.h * _gregory_weights(grid.n_points)


def check_decay(integrand, tol=DECAY_TOL, what="integrand"):
    """Raise :class:`TruncationError` unless both ends are below ``tol`` times the maximum."""
    scale = np.max(np.abs(integrand))
    if scale == 0:
        return
    left, right = abs(integrand[0]) / scale, abs(integrand[-1]) / scale
    if left > tol or right > tol:
        raise TruncationError(
            f"{what} has not decayed at the grid ends (left {left:.3e}, right {right:.3e})",
            left=left,
            right=right,
        )


def integrate_weighted(f, power_p, acknowledge_truncation=False):
    """``int g(r) r^p dr`` over the grid support, where ``g`` is the grid function ``f``.

    In ``t = ln r`` this is ``int g(e^t) e^((p+1) t) dt``. Unless
    ``acknowledge_truncation`` is set, the integrand must have decayed to
    ``1e-12`` of its maximum at both ends.
    """
    integrand = f.values * np.exp((power_p + 1.0) * f.t)
    if not acknowledge_truncation:
        check_decay(integrand)
    return float(quadrature_weights(f.grid) @ integrand)


@lru_cache(maxsize=16)
def _gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre_panels(func, edges, order=32):
    """Composite Gauss-Legendre integral of a vectorised ``func`` over consecutive ``edges``."""
    x, w = _gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    return float(np.sum(half * w * func(nodes)))
