"""Reduced energies of axially symmetric functions ``u(x) = x1 f(|x|)`` on the half-space.

For this ansatz every integral over the half-space factors into a
half-sphere moment of ``x1`` times a one-dimensional radial integral:

* bending   ``int |Delta u|^2          = w(2)   int (Lf)^2 r^(N+1) dr``
* hardy     ``int u^2 |x|^-4           = w(2)   int f^2 r^(N-3) dr``
* sobolev_s ``int |u|^p |x|^-s         = w(p)   int |f|^p r^(p+N-1-s) dr``

with ``Lf = f'' + (N+1) f'/r`` and ``p`` the critical exponent of ``s``.
Quotients obtained from the ansatz are upper bounds for the best constants;
nothing here asserts that extremals have this form.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import DimensionConfig, critical_exponent, sphere_moment
from .errors import DegenerateProfileError, DomainError, SupportLossError
from .radial import GridFunction, LogGrid, integrate_weighted, reduced_laplacian

__all__ = [
    "EnergyBreakdown",
    "RadialProfile",
    "conformal_rescale",
    "energies",
    "half_mass_radius",
    "hardy_ratio",
    "rayleigh_quotient",
]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial factor ``f`` of ``u = x1 f(|x|)`` on a log grid, for dimension ``N``."""

    f: GridFunction
    N: int

    def __post_init__(self):
        if self.N < 5:
            raise DomainError(f"dimension N must be >= 5, got {self.N}")

    @classmethod
    def from_function(cls, grid, func, N):
        return cls(grid.sample(func), N)

    @classmethod
    def from_scaled(cls, grid, g, N):
        """Build from ``g = r^((N-2)/2) f``, the dilation-neutral form of the profile."""
        return cls(GridFunction(grid, np.asarray(g) * np.exp(-0.5 * (N - 2) * grid.t)), N)

    @property
    def grid(self):
        return self.f.grid

    @property
    def values(self):
        return self.f.values

    def scaled(self):
        """``r^((N-2)/2) f``; conformal rescaling acts on it as a pure translation in ``t``."""
        return self.f.values * np.exp(0.5 * (self.N - 2) * self.f.t)


@dataclass(frozen=True)
class EnergyBreakdown:
    bending: float
    hardy: float
    sobolev_s: float
    sobolev_0: float

    def quadratic_form(self, gamma):
        return self.bending - gamma * self.hardy


def _check_cfg(p, cfg):
    if cfg.N != p.N:
        raise DomainError(f"profile dimension {p.N} does not match configuration N={cfg.N}")


def _sobolev(p, q, s, acknowledge_truncation):
    f = p.f.with_values(np.abs(p.values) ** q)
    return sphere_moment(p.N, q) * integrate_weighted(f, q + p.N - 1 - s, acknowledge_truncation)


def energies(p, cfg, acknowledge_truncation=False):
    """Bending, Hardy and both critical-norm energies of ``x1 f(|x|)``."""
    _check_cfg(p, cfg)
    N = p.N
    w2 = sphere_moment(N, 2)
    Lf = reduced_laplacian(p.f, N)
    bending = w2 * integrate_weighted(Lf.with_values(Lf.values**2), N + 1, acknowledge_truncation)
    hardy = w2 * integrate_weighted(p.f.with_values(p.values**2), N - 3, acknowledge_truncation)
    sobolev_0 = _sobolev(p, critical_exponent((N, 0.0)), 0.0, acknowledge_truncation)
    if cfg.s == 0:
        sobolev_s = sobolev_0
    else:
        sobolev_s = _sobolev(p, critical_exponent(cfg), cfg.s, acknowledge_truncation)
    return EnergyBreakdown(bending, hardy, sobolev_s, sobolev_0)


def rayleigh_quotient(p, cfg, acknowledge_truncation=False, breakdown=None):
    """``(bending - gamma hardy) / sobolev_s^(2/p)``, an upper bound for the best constant."""
    e = breakdown if breakdown is not None else energies(p, cfg, acknowledge_truncation)
    if not e.sobolev_s > 0:
        raise DegenerateProfileError("profile has zero critical norm")
    return e.quadratic_form(cfg.gamma) / e.sobolev_s ** (2.0 / critical_exponent(cfg))


def hardy_ratio(p, acknowledge_truncation=False):
    """``bending / hardy``; bounded below by ``(N^2-4)^2/16`` on the half-space."""
    e = energies(p, DimensionConfig(p.N), acknowledge_truncation)
    if not e.hardy > 0:
        raise DegenerateProfileError("profile has zero Hardy integral")
    return e.bending / e.hardy


def commensurate_shift(grid, r_scale):
    """Nearest whole-node shift ``k`` with ``exp(k h) ~ r_scale``, and the scale it realises."""
    if not r_scale > 0:
        raise DomainError(f"scale must be positive, got {r_scale}")
    k = int(round(math.log(r_scale) / grid.h))
    return k, math.exp(k * grid.h)


def conformal_rescale(p, r_scale, tol=1e-12):
    """Apply ``u -> r^((N-4)/2) u(r x)``; on the ansatz ``f -> r^((N-2)/2) f(r .)``.

    Implemented as a shift by whole grid nodes. A scale that is not a power
    of ``exp(h)`` is replaced by the nearest one, with a warning naming it.
    Raises :class:`SupportLossError` if the nodes pushed off the grid carry
    more than ``tol`` of the peak scaled density.
    """
    grid = p.grid
    k, used = commensurate_shift(grid, r_scale)
    if not math.isclose(used, r_scale, rel_tol=1e-9):
        warnings.warn(
            f"scale {r_scale!r} is not grid-commensurate; using {used!r} ({k} nodes)",
            stacklevel=2,
        )
    if k == 0:
        return p
    n = grid.n_points
    if abs(k) >= n:
        raise SupportLossError(f"shift of {k} nodes exceeds the grid ({n} nodes)")
    density = p.scaled() ** 2
    peak = density.max()
    lost = density[:k] if k > 0 else density[k:]
    if peak > 0 and lost.max() > tol * peak:
        raise SupportLossError(
            f"rescaling by {used:.6g} drops mass {lost.max() / peak:.3e} of peak off the grid"
        )
    amp = used ** (0.5 * (p.N - 2))
    values = np.zeros(n)
    if k > 0:
        values[: n - k] = amp * p.values[k:]
    else:
        values[-k:] = amp * p.values[: n + k]
    return RadialProfile(p.f.with_values(values), p.N)


def half_mass_radius(p, cfg):
    """Radius splitting the weighted critical mass ``int |u|^p |x|^-s`` in half."""
    _check_cfg(p, cfg)
    q = critical_exponent(cfg)
    t = p.f.t
    density = np.abs(p.values) ** q * np.exp((q + p.N - cfg.s) * t)
    cumulative = np.concatenate(([0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * p.grid.h)))
    total = cumulative[-1]
    if not total > 0:
        raise DegenerateProfileError("profile has zero critical mass")
    half = 0.5 * total
    i = int(np.searchsorted(cumulative, half))
    i = min(max(i, 1), len(t) - 1)
    lo, hi = cumulative[i - 1], cumulative[i]
    frac = 0.0 if hi == lo else (half - lo) / (hi - lo)
    return float(math.exp(t[i - 1] + frac * p.grid.h))


def gridded_like(grid, N, func):
    """Convenience: profile sampled from ``func(r)`` on ``grid``."""
    return RadialProfile(grid.sample(func), N)


def default_grid():
    return LogGrid()
