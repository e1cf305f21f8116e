"""Energy functional along rays and the mountain-pass level window.

Along a ray ``t -> t u`` the energy is the scalar function

    E(t u) = R1 t^2 / 2 - R2 t^ps / ps - R3 t^p0 / p0

with ``R1`` the quadratic form, ``R2`` the weighted critical mass and
``R3`` the unweighted one. Dropping the ``R2`` term leaves ``f1``, whose
maximum has a closed form; the mountain-pass level is estimated from above
by ``sup_t E(t u)`` and never by path optimisation.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import DimensionConfig, beta_star, critical_exponent
from .errors import DomainError
from .profiles import energies

__all__ = [
    "RayAnalysis",
    "energy",
    "gap_identity_terms",
    "level_window_check",
    "mountain_pass_floor",
    "normalized_sup",
    "ps_level_bounds",
    "ray_analysis",
    "ray_energy",
    "ray_scan",
    "ray_trace",
]


@dataclass(frozen=True)
class RayAnalysis:
    R1: float
    R2: float
    R3: float
    t_max: float
    sup_f1: float
    t_star: float
    e_sup: float
    strict_gap: float

    def as_dict(self):
        return asdict(self)


def energy(p, cfg, acknowledge_truncation=False):
    """``E(u) = (bending - gamma hardy)/2 - sobolev_s/ps - sobolev_0/p0``."""
    e = energies(p, cfg, acknowledge_truncation)
    ps = critical_exponent(cfg)
    p0 = critical_exponent((cfg.N, 0.0))
    return 0.5 * e.quadratic_form(cfg.gamma) - e.sobolev_s / ps - e.sobolev_0 / p0


def ray_energy(t, R1, R2, R3, ps, p0):
    t = np.asarray(t, dtype=float)
    return 0.5 * R1 * t * t - R2 * t**ps / ps - R3 * t**p0 / p0


def _exponents(N, s):
    return critical_exponent((N, s)), critical_exponent((N, 0.0))


def ray_analysis(R1, R2, R3, N, s=0.0):
    """Closed forms and the three-term maximiser for given ray coefficients.

    ``t_max`` and ``sup_f1`` refer to the two-term ray without ``R2``;
    ``t_star`` is the positive critical point of the full ray, found by
    bracketed root finding on ``R1 - R2 t^(ps-2) - R3 t^(p0-2)``.
    """
    if not R1 > 0:
        raise DomainError(f"quadratic coefficient R1 must be positive, got {R1}")
    if R2 < 0 or R3 < 0:
        raise DomainError(f"masses must be nonnegative, got R2={R2}, R3={R3}")
    if R2 == 0 and R3 == 0:
        raise DomainError("R2 = R3 = 0: the ray energy is unbounded and has no maximum")
    ps, p0 = _exponents(N, s)
    if R3 > 0:
        t_max = (R1 / R3) ** (1.0 / (p0 - 2.0))
        sup_f1 = 2.0 / N * R1 ** (N / 4) * R3 ** (-(N - 4) / 4)
    else:
        t_max, sup_f1 = math.inf, math.inf

    def slope(t):
        return R1 - R2 * t ** (ps - 2.0) - R3 * t ** (p0 - 2.0)

    if ps == 2.0 and R3 == 0:
        raise DomainError("s = 4 with R3 = 0: the ray energy is quadratic and has no interior maximum")
    if ps == 2.0 and R2 >= R1:
        raise DomainError("s = 4 with R2 >= R1: the ray energy decreases from t = 0")
    hi = t_max if R3 > 0 else 1.0
    if R2 > 0 and ps > 2.0:
        hi = max(hi, (R1 / R2) ** (1.0 / (ps - 2.0)))
    hi *= 2.0
    while slope(hi) > 0:
        hi *= 2.0
    # purely relative tolerance: near s = 4 the root can sit at t ~ 1e-8
    t_star = brentq(slope, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    e_sup = float(ray_energy(t_star, R1, R2, R3, ps, p0))
    return RayAnalysis(R1, R2, R3, t_max, sup_f1, t_star, e_sup, sup_f1 - e_sup)


def ray_scan(p, cfg, acknowledge_truncation=False):
    """Ray coefficients of a profile followed by :func:`ray_analysis`."""
    e = energies(p, cfg, acknowledge_truncation)
    return ray_analysis(e.quadratic_form(cfg.gamma), e.sobolev_s, e.sobolev_0, cfg.N, cfg.s)


def gap_identity_terms(ray, N, s=0.0):
    """``R2 t*^ps/ps`` and ``f1(t_max) - f1(t*)``; their sum is ``strict_gap``."""
    ps, p0 = _exponents(N, s)
    f1 = lambda t: 0.5 * ray.R1 * t * t - ray.R3 * t**p0 / p0  # noqa: E731
    return ray.R2 * ray.t_star**ps / ps, f1(ray.t_max) - f1(ray.t_star)


def ray_trace(ray, N, s=0.0, t_values=None):
    """``(t, E(t u))`` pairs along the ray, for plotting or CSV output."""
    ps, p0 = _exponents(N, s)
    if t_values is None:
        top = 2.0 * (ray.t_max if math.isfinite(ray.t_max) else ray.t_star)
        t_values = np.linspace(0.0, top, 201)
    t_values = np.asarray(t_values, dtype=float)
    return t_values, ray_energy(t_values, ray.R1, ray.R2, ray.R3, ps, p0)


def ps_level_bounds(beta, cfg):
    """Caps on the limiting critical masses of a Palais-Smale sequence at level ``beta``.

    Returns ``(2 beta (N-s)/(4-s), N beta/2)`` for the weighted and the
    unweighted mass.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if cfg.s >= 4:
        raise DomainError("the weighted cap needs s < 4")
    N, s = cfg.N, cfg.s
    return 2.0 * beta * (N - s) / (4.0 - s), N * beta / 2.0


@dataclass(frozen=True)
class LevelWindow:
    admissible: bool
    margin: float
    beta_star: float

    def __bool__(self):
        return self.admissible


def level_window_check(beta, q0, qs, cfg):
    """Whether ``0 < beta < beta_star(N, s, q0, qs)``; ``margin = beta_star - beta``."""
    b = beta_star(cfg.N, cfg.s, q0, qs)
    return LevelWindow(0.0 < beta < b, b - beta, b)


def mountain_pass_floor(c0, r0):
    """Energy floor ``c0 r0^2 / 8`` on the sphere of radius ``r0``, from user-supplied ``c0``.

    ``c0`` is the coercivity constant of the quadratic form; it is not
    estimated here.
    """
    if not (c0 > 0 and r0 > 0):
        raise DomainError(f"c0 and r0 must be positive, got c0={c0}, r0={r0}")
    return c0 * r0 * r0 / 8.0


def normalized_sup(q_hat, N):
    """``(2/N) q^(N/4)``: the two-term supremum for a profile with unit critical mass."""
    return 2.0 / N * q_hat ** (N / 4)


def cfg_for(N, s=0.0, gamma=0.0):
    return DimensionConfig(N, s, gamma)
