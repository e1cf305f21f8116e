"""Explicit test-function families and their energies.

Two families are built here:

* the logarithmic Hardy sequence ``x1 phi(r/eps) psi(eps r) r^(-(N-2)/2)``,
  whose bending/Hardy ratio tends to ``(N^2-4)^2/16``;
* the cut-off Sobolev bubble ``eta(x) eps^(-(N-4)/2) U((x - x0)/eps)`` with
  ``U = (1+|x|^2)^(-(N-4)/2)`` and ``x0 = a e1`` inside the half-space.

Bubble energies are evaluated in the blow-up variable ``y = (x - x0)/eps``.
The quotient gap ``I - S_N`` is assembled from the cutoff corrections and
the Hardy term, never by subtracting two nearly equal quotients, so it
keeps its relative accuracy when it is twelve orders below ``S_N``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_gegenbauer

from .constants import DimensionConfig, critical_exponent, half_space_hardy_constant, sphere_area, sphere_moment
from .errors import DomainError, FitRejected
from .profiles import EnergyBreakdown, RadialProfile, energies
from .radial import LogGrid, gauss_legendre_panels

__all__ = [
    "AsymptoticFit",
    "BubbleConstants",
    "BubbleRadial",
    "BubbleSpec",
    "BubbleTerms",
    "CutoffSpec",
    "DEFAULT_EPS_LADDER",
    "HardySequenceRow",
    "ScanRow",
    "StrictScan",
    "axisymmetric_integral",
    "bubble_constants",
    "bubble_energies",
    "bubble_radial",
    "classify_regime",
    "extrapolated_ratio",
    "fit_asymptotics",
    "hardy_coefficient_candidates",
    "hardy_sequence",
    "hardy_sequence_grid",
    "hardy_sequence_table",
    "log_slopes",
    "resolve_hardy_coefficient",
    "sobolev_constant_closed_form",
    "sobolev_ratio_of_bubble",
    "spherical_mean_inverse_fourth",
    "strict_upper_bound_scan",
]

DEFAULT_EPS_LADDER = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
FIT_TOL = 0.05


# ---------------------------------------------------------------- cutoffs


def _smoothstep(x, shape):
    x = np.clip(x, 0.0, 1.0)
    if shape == "quintic":
        return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)
    if shape == "septic":
        return x**4 * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x**3)
    raise DomainError(f"unknown cutoff shape {shape!r}")


def _smoothstep_derivs(x, shape):
    """First and second derivatives of the smoothstep, zero outside ``[0, 1]``."""
    inside = (x > 0.0) & (x < 1.0)
    x = np.clip(x, 0.0, 1.0)
    if shape == "quintic":
        d1 = 30.0 * x * x * (1.0 - x) ** 2
        d2 = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
    elif shape == "septic":
        d1 = 140.0 * x**3 * (1.0 - x) ** 3
        d2 = 420.0 * x * x * (1.0 - x) ** 2 * (1.0 - 2.0 * x)
    else:
        raise DomainError(f"unknown cutoff shape {shape!r}")
    return np.where(inside, d1, 0.0), np.where(inside, d2, 0.0)


@dataclass(frozen=True)
class CutoffSpec:
    """Inner cutoff ``phi`` and outer cutoff ``psi`` built from a smoothstep.

    ``phi`` rises from 0 to 1 on ``[1 - inner_width, 1]``; ``psi`` falls from
    1 to 0 on ``[1, 1 + outer_width]``. Both widths lie in ``(0, 1]`` so that
    ``phi = 1`` beyond 1 and ``psi = 0`` beyond 2.
    """

    inner_shape: str = "quintic"
    outer_shape: str = "quintic"
    inner_width: float = 1.0
    outer_width: float = 1.0

    def __post_init__(self):
        for shape in (self.inner_shape, self.outer_shape):
            if shape not in ("quintic", "septic"):
                raise DomainError(f"unknown cutoff shape {shape!r}")
        for width in (self.inner_width, self.outer_width):
            if not 0.0 < width <= 1.0:
                raise DomainError(f"transition widths must lie in (0, 1], got {width}")

    def inner(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        return _smoothstep((x - (1.0 - self.inner_width)) / self.inner_width, self.inner_shape)

    def outer(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        return 1.0 - _smoothstep((x - 1.0) / self.outer_width, self.outer_shape)

    def outer_derivs(self, x):
        """``(psi, psi', psi'')`` of the outer cutoff at radii ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        z = (x - 1.0) / self.outer_width
        d1, d2 = _smoothstep_derivs(z, self.outer_shape)
        return self.outer(x), -d1 / self.outer_width, -d2 / self.outer_width**2


# ---------------------------------------------------------- Hardy sequence


def hardy_sequence_grid(epsilon, points_per_unit=100, left_margin=1e-4, right_factor=8.0):
    """Log grid reaching from ``left_margin * eps`` to ``right_factor / eps``.

    The inner cutoff vanishes like ``(r/eps)^3``, so the integrands reach
    relative size ``1e-12`` only near ``r ~ 1e-2 eps``; the default margin
    leaves room for that while covering ``[eps/4, 8/eps]``.
    """
    t_min = math.log(left_margin * epsilon)
    t_max = math.log(right_factor / epsilon)
    return LogGrid.from_spacing(t_min, t_max, 1.0 / points_per_unit)


def hardy_sequence(N, epsilon, cut=None, grid=None):
    """Profile of ``v_eps = x1 phi(|x|/eps) psi(eps |x|) |x|^(-(N-2)/2)``."""
    if not 0.0 < epsilon < 0.1:
        raise DomainError(f"epsilon must lie in (0, 0.1), got {epsilon}")
    cut = cut or CutoffSpec()
    grid = grid or hardy_sequence_grid(epsilon)
    if grid.t_min > math.log(epsilon / 4) or grid.t_max < math.log(8 / epsilon):
        raise DomainError(
            f"grid [{math.exp(grid.t_min):.3g}, {math.exp(grid.t_max):.3g}] does not cover "
            f"[eps/4, 8/eps] = [{epsilon / 4:.3g}, {8 / epsilon:.3g}]"
        )

    def f(r):
        return cut.inner(r / epsilon) * cut.outer(epsilon * r) * r ** (-0.5 * (N - 2))

    return RadialProfile.from_function(grid, f, N)


@dataclass(frozen=True)
class HardySequenceRow:
    epsilon: float
    bending: float
    hardy: float

    @property
    def ratio(self):
        return self.bending / self.hardy

    @property
    def log_inv_eps(self):
        return math.log(1.0 / self.epsilon)


def hardy_sequence_table(N, eps_values, cut=None, points_per_unit=100):
    """Bending and Hardy energies of the Hardy sequence at each ``epsilon``."""
    cfg = DimensionConfig(N)
    rows = []
    for eps in eps_values:
        p = hardy_sequence(N, eps, cut, hardy_sequence_grid(eps, points_per_unit))
        e = energies(p, cfg)
        rows.append(HardySequenceRow(float(eps), e.bending, e.hardy))
    return rows


def log_slopes(rows):
    """Least-squares slopes of bending and Hardy energy against ``ln(1/eps)``."""
    x = np.array([r.log_inv_eps for r in rows])
    slope_b = np.polyfit(x, [r.bending for r in rows], 1)[0]
    slope_h = np.polyfit(x, [r.hardy for r in rows], 1)[0]
    return float(slope_b), float(slope_h)


def extrapolated_ratio(row_a, row_b):
    """Eliminate the ``1/ln(1/eps)`` term of the ratio using two rows.

    The ratio behaves like ``R + C/ln(1/eps) + O(ln(1/eps)^-2)``;
    combining two values removes ``C``.
    """
    la, lb = row_a.log_inv_eps, row_b.log_inv_eps
    if la == lb:
        raise DomainError("extrapolation needs two distinct epsilon values")
    return (lb * row_b.ratio - la * row_a.ratio) / (lb - la)


# ------------------------------------------------------------------ bubble


@dataclass(frozen=True)
class BubbleRadial:
    """``U(r) = (1+r^2)^(-(N-4)/2)`` with closed-form radial derivatives."""

    N: int

    def __post_init__(self):
        if self.N < 5:
            raise DomainError(f"dimension N must be >= 5, got {self.N}")

    @property
    def k(self):
        return 0.5 * (self.N - 4)

    def value(self, r):
        return (1.0 + np.asarray(r, dtype=float) ** 2) ** (-self.k)

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        return -(self.N - 4) * r * (1.0 + r * r) ** (-self.k - 1.0)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        q = 1.0 + r * r
        return -(self.N - 4) * (q ** (-self.k - 1.0) - (self.N - 2) * r * r * q ** (-self.k - 2.0))

    def laplacian(self, r):
        """``-(N-4) (1+r^2)^(-N/2) (N + 2 r^2)``."""
        r = np.asarray(r, dtype=float)
        return -(self.N - 4) * (1.0 + r * r) ** (-0.5 * self.N) * (self.N + 2.0 * r * r)

    def laplacian_d1(self, r):
        r = np.asarray(r, dtype=float)
        q = 1.0 + r * r
        N = self.N
        return -(N - 4) * r * q ** (-0.5 * N - 1.0) * (4.0 * q - N * (N + 2.0 * r * r))

    def bilaplacian_constant(self):
        """Constant ``c`` in ``Delta^2 U = c U^((N+4)/(N-4))``; derived in the tests."""
        N = self.N
        return float(N * (N + 2) * (N - 2) * (N - 4))

    def profile(self, grid):
        return grid.sample(self.value)


def bubble_radial(N):
    return BubbleRadial(N)


def _tail_edges(start, stop, ratio=2.0):
    edges = [start]
    while edges[-1] * ratio < stop:
        edges.append(edges[-1] * ratio)
    edges.append(stop)
    return edges


def _radial_edges(stop):
    """Panel edges on ``[0, stop]``: a unit panel, then geometric doubling."""
    if stop <= 1.0:
        return [0.0, stop]
    return [0.0] + _tail_edges(1.0, stop)


def _integrate_to_infinity(func, start, order):
    """``int_start^inf func(y) dy`` via ``y = start/u``; ``func`` must decay faster than 1/y."""

    def mapped(u):
        y = start / u
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            val = func(y) * start / (u * u)
        # far out the integrand underflows; inf*0 there is a true zero
        return np.where(np.isfinite(val), val, 0.0)

    # y beyond start * 2^48 contributes below 2^-48 of the tail for N >= 5
    edges = [2.0**-k for k in range(48, -1, -1)]
    return gauss_legendre_panels(mapped, edges, order)


def _bubble_full_integrals(N, order):
    U = BubbleRadial(N)
    p0 = critical_exponent((N, 0.0))
    omega = sphere_area(N)
    bend = lambda y: U.laplacian(y) ** 2 * y ** (N - 1)  # noqa: E731
    mass = lambda y: U.value(y) ** p0 * y ** (N - 1)  # noqa: E731
    b = omega * (gauss_legendre_panels(bend, [0.0, 0.5, 1.0], order) + _integrate_to_infinity(bend, 1.0, order))
    s = omega * (gauss_legendre_panels(mass, [0.0, 0.5, 1.0], order) + _integrate_to_infinity(mass, 1.0, order))
    return b, s


@dataclass(frozen=True)
class BubbleConstants:
    """Whole-space energies of the bubble and the Sobolev constant they give."""

    N: int
    bending: float
    sobolev_0: float

    @property
    def sobolev_constant(self):
        return self.bending / self.sobolev_0 ** (2.0 / critical_exponent((self.N, 0.0)))


def bubble_constants(N, order=48):
    b, s = _bubble_full_integrals(N, order)
    return BubbleConstants(N, b, s)


def sobolev_ratio_of_bubble(N, scale=1.0, order=48):
    """``int |Delta U|^2 / (int U^p)^(2/p)`` for ``U_lam = lam^((N-4)/2) U(lam x)``.

    Quadrature in the radial variable with the full-sphere area. The
    ``scale`` argument only exists so the invariance can be checked.
    """
    if N < 5:
        raise DomainError(f"dimension N must be >= 5, got {N}")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    U = BubbleRadial(N)
    p0 = critical_exponent((N, 0.0))
    omega = sphere_area(N)
    lam = float(scale)
    amp = lam ** (0.5 * (N - 4))
    bend = lambda r: (amp * lam**2 * U.laplacian(lam * r)) ** 2 * r ** (N - 1)  # noqa: E731
    mass = lambda r: (amp * U.value(lam * r)) ** p0 * r ** (N - 1)  # noqa: E731
    knee = 1.0 / lam
    b = gauss_legendre_panels(bend, [0.0, 0.5 * knee, knee], order) + _integrate_to_infinity(bend, knee, order)
    s = gauss_legendre_panels(mass, [0.0, 0.5 * knee, knee], order) + _integrate_to_infinity(mass, knee, order)
    return (omega * b) / (omega * s) ** (2.0 / p0)


@dataclass(frozen=True)
class BubbleSpec:
    """Bubble of concentration ``epsilon`` centred at ``a e1`` and cut off on ``B_(2 delta)``."""

    N: int
    epsilon: float
    a: float = 1.0
    delta: float = 0.25
    cut: CutoffSpec = field(default_factory=CutoffSpec)

    def __post_init__(self):
        if self.N < 5:
            raise DomainError(f"dimension N must be >= 5, got {self.N}")
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not self.a > 0:
            raise DomainError(f"centre distance a must be positive, got {self.a}")
        if not 0 < self.delta < self.a / 2:
            raise DomainError(f"delta must satisfy 0 < delta < a/2 = {self.a / 2}, got {self.delta}")

    @property
    def blowup_radius(self):
        """``delta/eps``: cutoff onset in the blow-up variable."""
        return self.delta / self.epsilon

    def truncation_estimate(self):
        """Relative size ``(eps/delta)^(N-4)`` of the cutoff corrections."""
        return (self.epsilon / self.delta) ** (self.N - 4)


def _cut_bubble_laplacian(spec, y):
    """``Delta_y (psi(y/R) U(y))`` in dimension ``N``."""
    N, R = spec.N, spec.blowup_radius
    U = BubbleRadial(N)
    psi, dpsi, d2psi = spec.cut.outer_derivs(y / R)
    dpsi, d2psi = dpsi / R, d2psi / R**2
    lap_psi = d2psi + (N - 1) * dpsi / y
    return psi * U.laplacian(y) + 2.0 * dpsi * U.d1(y) + U.value(y) * lap_psi


def spherical_mean_inverse_fourth(N, a, rho, order=64):
    """Mean of ``|a e1 + rho sigma|^-4`` over the unit sphere, for ``rho < a``.

    Gauss-Gegenbauer quadrature in ``c = sigma_1`` with weight ``(1-c^2)^((N-3)/2)``.
    """
    c, w = roots_gegenbauer(order, 0.5 * (N - 2))
    w = w / w.sum()
    rho = np.asarray(rho, dtype=float)
    q = a * a + rho[..., None] ** 2 + 2.0 * a * rho[..., None] * c
    return (q**-2) @ w


@dataclass(frozen=True)
class BubbleTerms:
    """Corrections of the cut-off bubble relative to the whole-space bubble.

    ``bending = B_inf + d_bending``, ``sobolev_0 = S_inf + d_sobolev`` and the
    Hardy integral; every entry carries a quadrature error estimate.
    """

    spec: BubbleSpec
    full: BubbleConstants
    d_bending: float
    d_sobolev: float
    hardy: float
    errors: dict

    @property
    def bending(self):
        return self.full.bending + self.d_bending

    @property
    def sobolev_0(self):
        return self.full.sobolev_0 + self.d_sobolev

    def breakdown(self):
        return EnergyBreakdown(self.bending, self.hardy, self.sobolev_0, self.sobolev_0)

    def quotient_gap(self, gamma):
        """``I_gamma(U_eps) - S_N`` and its error bar."""
        gap = self._gap(self.d_bending, self.d_sobolev, self.hardy, gamma)
        e = self.errors
        spread = max(
            abs(self._gap(self.d_bending + sb * e["d_bending"], self.d_sobolev + ss * e["d_sobolev"],
                          self.hardy + sh * e["hardy"], gamma) - gap)
            for sb in (-1, 1) for ss in (-1, 1) for sh in (-1, 1)
        )
        # B_inf and S_inf only enter through the small shrink factor, so their
        # rounding is relative to the terms of the gap, not to S_N
        p = critical_exponent((self.spec.N, 0.0))
        x = self.d_sobolev / self.full.sobolev_0
        size = abs(self.d_bending) + abs(gamma * self.hardy) + self.full.bending * abs(x)
        floor = 8.0 * np.finfo(float).eps * size / self.full.sobolev_0 ** (2.0 / p)
        return gap, spread + floor

    def _gap(self, d_bending, d_sobolev, hardy, gamma):
        p = critical_exponent((self.spec.N, 0.0))
        B, S = self.full.bending, self.full.sobolev_0
        x = d_sobolev / S
        shrink = math.expm1(-(2.0 / p) * math.log1p(x))
        numer = (d_bending - gamma * hardy) * (1.0 + shrink) + B * shrink
        return numer / S ** (2.0 / p)


def _corrections(spec, order):
    N, R = spec.N, spec.blowup_radius
    U = BubbleRadial(N)
    p0 = critical_exponent((N, 0.0))
    omega = sphere_area(N)
    cut_edges = np.linspace(R, 2.0 * R, 9)

    def cut_bend(y):
        return _cut_bubble_laplacian(spec, y) ** 2 * y ** (N - 1)

    def cut_mass(y):
        psi = spec.cut.outer(y / R)
        return (psi * U.value(y)) ** p0 * y ** (N - 1)

    d_bend = gauss_legendre_panels(cut_bend, cut_edges, order) - _integrate_to_infinity(
        lambda y: U.laplacian(y) ** 2 * y ** (N - 1), R, order
    )
    d_mass = gauss_legendre_panels(cut_mass, cut_edges, order) - _integrate_to_infinity(
        lambda y: U.value(y) ** p0 * y ** (N - 1), R, order
    )

    eps, a = spec.epsilon, spec.a

    def hardy_density(y):
        psi = spec.cut.outer(y / R)
        mean = spherical_mean_inverse_fourth(N, a, eps * y)
        return (psi * U.value(y)) ** 2 * mean * y ** (N - 1)

    edges = _radial_edges(R) + list(cut_edges[1:])
    hardy = eps**4 * gauss_legendre_panels(hardy_density, edges, order)
    return omega * d_bend, omega * d_mass, omega * hardy


def bubble_energies(spec, gamma=0.0, order=32, full=None):
    """Energies of the cut-off bubble ``U_eps`` and their error estimates.

    Returns :class:`BubbleTerms`. Bending and critical mass are radial
    about ``x0``; the Hardy term averages ``|x|^-4`` over spheres about
    ``x0`` with Gauss-Gegenbauer quadrature, which is the axisymmetric
    integral in closed radial form. Error bars compare two Gauss orders.
    ``gamma`` is accepted for symmetry with the quotient and is not used.
    """
    if spec.blowup_radius < 10.0:
        warnings.warn(
            f"epsilon={spec.epsilon:g} is not small against delta={spec.delta:g}; "
            f"cutoff corrections of relative size ~{spec.truncation_estimate():.2e}",
            stacklevel=2,
        )
    full = full or bubble_constants(spec.N)
    low = _corrections(spec, order)
    high = _corrections(spec, order + 16)
    errors = {
        name: abs(h - l) + 4.0 * np.finfo(float).eps * abs(h)
        for name, h, l in zip(("d_bending", "d_sobolev", "hardy"), high, low)
    }
    return BubbleTerms(spec, full, high[0], high[1], high[2], errors)


def axisymmetric_integral(spec, integrand="hardy", n=1024, half_space=True):
    """Integral of the cut-off bubble on a tensor grid in ``(x1, rho = |x'|)``.

    ``integrand="hardy"`` gives ``int U_eps^2 |x|^-4``; ``"sobolev"`` gives
    ``int |U_eps|^p``. Composite Simpson with weight ``|S^(N-2)| rho^(N-2)``
    over ``[a - 2 delta, a + 2 delta] x [0, 2 delta]`` clipped to ``x1 > 0``,
    or over the symmetric slab ``|x1| <= a + 2 delta`` when ``half_space`` is
    false, at the same spacing (``n`` cells across the ball). One Richardson
    step from ``n/2`` to ``n``. This route shares nothing with the radial
    one in :func:`bubble_energies`; it is only accurate while ``eps`` spans
    several cells.
    """
    from scipy.integrate import simpson

    if integrand not in ("hardy", "sobolev"):
        raise DomainError(f"integrand must be 'hardy' or 'sobolev', got {integrand!r}")
    N, eps, a, delta = spec.N, spec.epsilon, spec.a, spec.delta
    if integrand == "hardy" and not half_space:
        raise DomainError("the whole-slab domain contains the origin, where |x|^-4 is not integrable")
    U = BubbleRadial(N)
    p0 = critical_exponent((N, 0.0))
    hi = a + 2 * delta
    lo = max(a - 2 * delta, 0.0) if half_space else -hi
    cells_per_unit = n / (4 * delta)

    def simpson_2d(m):
        m += m % 2
        mx = int(round(m * (hi - lo) / (4 * delta)))
        mx += mx % 2
        x1 = np.linspace(lo, hi, mx + 1)
        rho = np.linspace(0.0, 2 * delta, m // 2 + 1)
        X, P = np.meshgrid(x1, rho, indexing="ij")
        dist = np.hypot(X - a, P)
        bump = spec.cut.outer(dist / delta) * eps ** (-0.5 * (N - 4)) * U.value(dist / eps)
        if integrand == "hardy":
            F = bump**2 / (X * X + P * P) ** 2
        else:
            F = np.abs(bump) ** p0
        F = F * P ** (N - 2)
        return sphere_area(N - 1) * simpson(simpson(F, x=rho, axis=1), x=x1)

    m = int(round(cells_per_unit * 4 * delta))
    coarse, fine = simpson_2d(m // 2), simpson_2d(m)
    return fine + (fine - coarse) / 15.0


# ------------------------------------------------------- asymptotic fits

REGIMES = ("eps4", "eps4_log", "eps_N_minus_4")


def _regime_for_dimension(N):
    if N >= 9:
        return "eps4"
    if N == 8:
        return "eps4_log"
    return "eps_N_minus_4"


def _model_columns(regime, N, eps):
    """Leading and correction columns of the two-term model for ``regime``."""
    L = np.log(1.0 / eps)
    if regime == "eps4":
        return eps**4, eps ** max(N - 4, 5)
    if regime == "eps4_log":
        return eps**4 * L, eps**4
    if regime == "eps_N_minus_4":
        if N >= 8:
            raise DomainError("the eps^(N-4) regime only applies for N < 8")
        return eps ** (N - 4), eps**4
    raise DomainError(f"unknown regime {regime!r}")


MODEL_NAMES = {
    "eps4": "c*eps^4",
    "eps4_log": "c*eps^4*ln(1/eps)",
    "eps_N_minus_4": "c*eps^(N-4)",
}


@dataclass(frozen=True)
class AsymptoticFit:
    """Two-term least-squares fit ``value ~ c*leading(eps) + d*correction(eps)``.

    ``residual`` is the RMS of per-point relative residuals. ``regime`` is
    the case the dimension calls for; ``detected_regime`` is read off the
    data alone.
    """

    model: str
    coefficient: float
    correction: float
    residual: float
    regime: str
    detected_regime: str
    residuals: tuple

    def as_dict(self):
        return {
            "model": self.model,
            "coefficient": self.coefficient,
            "residual": self.residual,
            "regime": self.regime,
            "detected_regime": self.detected_regime,
        }


def _two_term_fit(regime, N, eps, values):
    lead, corr = _model_columns(regime, N, eps)
    # relative least squares: divide each row by |value|
    scale = np.abs(values)
    scale = np.where(scale > 0, scale, 1.0)
    A = np.column_stack([lead / scale, corr / scale])
    (c, d), *_ = np.linalg.lstsq(A, values / scale, rcond=None)
    model_values = c * lead + d * corr
    rel = (values - model_values) / scale
    dominance = abs(c * lead[-1]) / max(abs(c * lead[-1]) + abs(d * corr[-1]), np.finfo(float).tiny)
    return float(c), float(d), rel, dominance


def classify_regime(points, N):
    """Regime of an ``(epsilon, value)`` ladder judged from the data.

    Each candidate two-term model is fitted; candidates whose leading term
    does not dominate at the smallest ``epsilon`` are discarded, and the best
    remaining residual wins.
    """
    eps, values = _ladder(points)
    best = None
    for regime in REGIMES:
        if regime == "eps_N_minus_4" and N >= 8:
            continue
        c, _, rel, dominance = _two_term_fit(regime, N, eps, values)
        if dominance < 0.5 or c == 0:
            continue
        score = float(np.sqrt(np.mean(rel**2)))
        if best is None or score < best[0]:
            best = (score, regime)
    return best[1] if best else "unresolved"


def _ladder(points):
    pts = sorted(((float(e), float(v)) for e, v in points), reverse=True)
    if len(pts) < 4:
        raise DomainError(f"need at least 4 points, got {len(pts)}")
    eps = np.array([p[0] for p in pts])
    if np.any(eps <= 0):
        raise DomainError("epsilon values must be positive")
    if np.any(eps[:-1] / eps[1:] < 2.0 - 1e-12):
        raise DomainError("epsilon ladder must be geometric with ratio >= 2")
    return eps, np.array([p[1] for p in pts])


def fit_asymptotics(points, N, regime=None, tol=FIT_TOL):
    """Fit an epsilon ladder against the model for ``N`` (or an explicit ``regime``).

    Raises :class:`FitRejected` when the relative RMS residual exceeds ``tol``.
    """
    eps, values = _ladder(points)
    regime = regime or _regime_for_dimension(N)
    c, d, rel, _ = _two_term_fit(regime, N, eps, values)
    residual = float(np.sqrt(np.mean(rel**2)))
    fit = AsymptoticFit(
        model=MODEL_NAMES[regime],
        coefficient=c,
        correction=d,
        residual=residual,
        regime=regime,
        detected_regime=classify_regime(points, N),
        residuals=tuple(float(r) for r in rel),
    )
    if residual > tol:
        raise FitRejected(f"fit residual {residual:.3g} exceeds {tol}", residuals=fit.residuals, fit=fit)
    return fit


def hardy_coefficient_candidates(N, a=1.0):
    """Leading Hardy coefficients ``int U^2 a^-4`` and half of it, for ``N >= 9``."""
    if N < 9:
        raise DomainError("the eps^4 Hardy coefficient is finite only for N >= 9")
    # int_0^inf y^(N-1) (1+y^2)^-(N-4) dy = B(N/2, N/2 - 4)/2
    beta = math.exp(math.lgamma(N / 2) + math.lgamma(N / 2 - 4) - math.lgamma(N - 4))
    full = sphere_area(N) * 0.5 * beta / a**4
    return {"full": full, "half": 0.5 * full}


def resolve_hardy_coefficient(fit, N, a=1.0):
    """Which candidate (``1`` or ``1/2``) the fitted coefficient supports."""
    cand = hardy_coefficient_candidates(N, a)
    err_full = abs(fit.coefficient / cand["full"] - 1.0)
    err_half = abs(fit.coefficient / cand["half"] - 1.0)
    return {
        "coefficient": fit.coefficient,
        "candidate_full": cand["full"],
        "candidate_half": cand["half"],
        "relative_error_full": err_full,
        "relative_error_half": err_half,
        "resolved_factor": 1.0 if err_full < err_half else 0.5,
    }


# ------------------------------------------------------ strict inequality


@dataclass(frozen=True)
class ScanRow:
    epsilon: float
    bending: float
    hardy: float
    sobolev_0: float
    quotient: float
    gap: float
    gap_error: float


@dataclass(frozen=True)
class StrictScan:
    N: int
    gamma: float
    sobolev_constant: float
    rows: tuple

    @property
    def best(self):
        return min(self.rows, key=lambda row: row.gap)

    def below_sobolev(self, bars=3.0):
        """Whether the smallest quotient lies at least ``bars`` error bars below ``S_N``."""
        row = self.best
        return bool(row.gap < -bars * row.gap_error)

    def all_above(self, rel_tol=1e-3):
        return all(row.quotient >= self.sobolev_constant * (1.0 - rel_tol) for row in self.rows)


def strict_upper_bound_scan(N, gamma, eps_values=DEFAULT_EPS_LADDER, a=1.0, delta=0.25, cut=None):
    """Quotients ``I_gamma(U_eps)`` along an epsilon ladder, with ``I - S_N`` and its error bar."""
    if gamma >= half_space_hardy_constant(N):
        raise DomainError(f"gamma must be below (N^2-4)^2/16 = {half_space_hardy_constant(N):g}")
    cut = cut or CutoffSpec()
    full = bubble_constants(N)
    rows = []
    for eps in eps_values:
        terms = bubble_energies(BubbleSpec(N, float(eps), a, delta, cut), gamma, full=full)
        gap, err = terms.quotient_gap(gamma)
        rows.append(
            ScanRow(float(eps), terms.bending, terms.hardy, terms.sobolev_0,
                    full.sobolev_constant + gap, gap, err)
        )
    return StrictScan(N, float(gamma), full.sobolev_constant, tuple(rows))


def sobolev_constant_closed_form(N):
    """``pi^2 N(N+2)(N-2)(N-4) (Gamma(N/2)/Gamma(N))^(4/N)``."""
    log_ratio = math.lgamma(N / 2) - math.lgamma(N)
    return math.pi**2 * N * (N + 2) * (N - 2) * (N - 4) * math.exp(4.0 / N * log_ratio)


def w2(N):
    return sphere_moment(N, 2)
