"""Closed-form constants of the fourth-order Hardy-Rellich problem on the half-space.

Everything here is exact arithmetic on (N, s, gamma): critical exponents,
the interior and half-space Hardy-Rellich constants, the indicial roots of
``x1 |x|^-alpha`` for the operator ``Delta^2 - gamma |x|^-4``, moments of the
coordinate ``x1`` over the unit half-sphere and the mountain-pass threshold.
"""

import itertools
import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "DimensionConfig",
    "HardyConstants",
    "IndicialRoots",
    "beta_star",
    "cone_hardy_constant",
    "critical_exponent",
    "half_space_hardy_constant",
    "hardy_constants",
    "indicial_polynomial",
    "indicial_roots",
    "quartic_coefficients",
    "sphere_area",
    "sphere_moment",
    "sphere_spectrum",
]


def _check_dim(N, minimum=5):
    if int(N) != N or N < minimum:
        raise DomainError(f"dimension N must be an integer >= {minimum}, got {N}")


def half_space_hardy_constant(N):
    """``(N^2 - 4)^2 / 16``, the Hardy-Rellich constant of the half-space."""
    _check_dim(N)
    return (N * N - 4) ** 2 / 16


@dataclass(frozen=True)
class DimensionConfig:
    """Problem parameters: dimension ``N``, weight exponent ``s`` and Hardy parameter ``gamma``."""

    N: int
    s: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        _check_dim(self.N)
        if not 0.0 <= self.s <= 4.0:
            raise DomainError(f"weight exponent s must satisfy 0 <= s <= 4, got {self.s}")
        if not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite, got {self.gamma}")

    @property
    def gamma_h(self):
        return half_space_hardy_constant(self.N)

    def require_subcritical(self):
        """Raise unless ``gamma < (N^2-4)^2/16`` (coercive quadratic form)."""
        if not self.gamma < self.gamma_h:
            raise DomainError(
                f"gamma must satisfy gamma < (N^2-4)^2/16 = {self.gamma_h:g}, got {self.gamma}"
            )
        return self

    def require_indicial_range(self):
        """Raise unless ``-N^2 <= gamma < (N^2-4)^2/16``."""
        if not -self.N**2 <= self.gamma:
            raise DomainError(f"gamma must satisfy gamma >= -N^2 = {-self.N**2}, got {self.gamma}")
        return self.require_subcritical()


def critical_exponent(cfg):
    """Critical Hardy-Sobolev exponent ``2(N - s)/(N - 4)``.

    Accepts a :class:`DimensionConfig` or an ``(N, s)`` pair.
    """
    N, s = (cfg.N, cfg.s) if isinstance(cfg, DimensionConfig) else cfg
    _check_dim(N)
    if not 0.0 <= s <= 4.0:
        raise DomainError(f"weight exponent s must satisfy 0 <= s <= 4, got {s}")
    return 2.0 * (N - s) / (N - 4)


@dataclass(frozen=True)
class HardyConstants:
    interior: float
    half_space: float
    cone_min_index: int


def sphere_spectrum(N, k_min=0):
    """Generate the spherical-harmonic eigenvalues ``k (N - 2 + k)`` for ``k >= k_min``.

    ``k_min=0`` is the full sphere and ``k_min=1`` the half-sphere with
    Dirichlet data.
    """
    for k in itertools.count(k_min):
        yield k * (N - 2 + k)


def _cone_search(N, spectrum):
    # min over the spectrum of |N(N-4)/4 + lam|^2, stopping once the terms recede
    shift = N * (N - 4) / 4
    best, best_index = math.inf, None
    previous = None
    for index, lam in enumerate(spectrum):
        if previous is not None and lam < previous:
            raise DomainError("spectrum must be nondecreasing")
        term = (shift + lam) ** 2
        if term < best:
            best, best_index = term, index
        elif shift + lam >= 0:
            break
        previous = lam
    if best_index is None:
        raise DomainError("spectrum must be nonempty")
    return best, best_index


def cone_hardy_constant(N, spectrum):
    """Hardy-Rellich constant of the cone over a spherical domain.

    ``spectrum`` is the nondecreasing Laplace-Beltrami spectrum of the base
    (a finite sequence or an infinite generator such as
    :func:`sphere_spectrum`). Returns ``min |N(N-4)/4 + lam|^2``.
    """
    _check_dim(N)
    return _cone_search(N, iter(spectrum))[0]


def hardy_constants(N):
    """Interior and half-space Hardy-Rellich constants for dimension ``N``."""
    _check_dim(N)
    _, index = _cone_search(N, sphere_spectrum(N, k_min=1))
    return HardyConstants(
        interior=N * N * (N - 4) ** 2 / 16,
        half_space=half_space_hardy_constant(N),
        cone_min_index=index + 1,
    )


def quartic_coefficients(N, gamma):
    """Coefficients (highest degree first) of the indicial quartic in alpha."""
    return (1.0, -2.0 * (N - 2), N * N - 6.0 * N + 4.0, 2.0 * N * N - 4.0 * N, -float(gamma))


def indicial_polynomial(N, alpha):
    """``alpha (N - alpha) (alpha + 2) (N - alpha - 2)``.

    ``Delta^2 (x1 |x|^-alpha) = indicial_polynomial(N, alpha) x1 |x|^(-alpha-4)``.
    """
    _check_dim(N)
    return alpha * (N - alpha) * (alpha + 2) * (N - alpha - 2)


@dataclass(frozen=True)
class IndicialRoots:
    alpha_minus: float
    alpha_plus: float
    beta_minus: float
    beta_plus: float
    residuals: tuple

    def as_tuple(self):
        return (self.alpha_minus, self.alpha_plus, self.beta_minus, self.beta_plus)


def _quartic_residual(N, gamma, x):
    coeffs = quartic_coefficients(N, gamma)
    value = 0.0
    for c in coeffs:
        value = value * x + c
    return abs(value) / max(abs(c) for c in coeffs)


def indicial_roots(cfg):
    """The four exponents alpha for which ``x1 |x|^-alpha`` solves the linear equation.

    Uses the biquadratic reduction ``alpha = (N-2)/2 + t``. Each residual is
    the quartic evaluated at the root, divided by the largest coefficient
    magnitude.
    """
    cfg.require_indicial_range()
    N, gamma = cfg.N, cfg.gamma
    centre = (N - 2) / 2
    root = math.sqrt(N * N + gamma)
    inner = N * N + 4 - 4 * root
    outer = N * N + 4 + 4 * root
    # inner -> 0 as gamma -> gamma_H; clip rounding below zero
    assert inner > -1e-9 * (N * N + 4), "negative discriminant inside the admissible range"
    t_in = 0.5 * math.sqrt(max(inner, 0.0))
    t_out = 0.5 * math.sqrt(outer)
    values = (centre - t_in, centre + t_in, centre - t_out, centre + t_out)
    return IndicialRoots(*values, residuals=tuple(_quartic_residual(N, gamma, v) for v in values))


def sphere_area(N):
    """Area of the unit sphere ``S^(N-1)`` in ``R^N``: ``2 pi^(N/2) / Gamma(N/2)``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def sphere_moment(N, q):
    """``int_{S^(N-1)_+} x1^q dsigma`` over the open half-sphere ``x1 > 0``.

    Closed form ``pi^((N-1)/2) Gamma((q+1)/2) / Gamma((N+q)/2)``.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if not q > -1:
        raise DomainError(f"moment diverges for q <= -1, got q={q}")
    log_value = (
        0.5 * (N - 1) * math.log(math.pi) + math.lgamma(0.5 * (q + 1)) - math.lgamma(0.5 * (N + q))
    )
    return math.exp(log_value)


def beta_star(N, s, Q0, Qs):
    """Upper end of the admissible mountain-pass level window.

    ``min{(2/N) Q0^(N/4), (4-s)/(2(N-s)) Qs^((N-s)/(4-s))}``
    """
    _check_dim(N)
    if not 0 <= s < 4:
        raise DomainError(f"s must satisfy 0 <= s < 4, got {s}")
    if not (Q0 > 0 and Qs > 0):
        raise DomainError(f"best constants must be positive, got Q0={Q0}, Qs={Qs}")
    pure = 2.0 / N * Q0 ** (N / 4)
    weighted = (4 - s) / (2.0 * (N - s)) * Qs ** ((N - s) / (4 - s))
    return min(pure, weighted)
