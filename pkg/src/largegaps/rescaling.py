"""Rescaling maps, interval constants, Gumbel-k laws and finite-n limit checks.

The CUE gap map takes an arc length m to the Gumbel coordinate

    tau = sqrt(2 ln n) (n m - sqrt(32 ln n)) / 4 - (3/8) ln(2 ln n),

whose inverse is the arc length f_n(tau). The GUE map is the same with the
gap measured in units of 1/S(I) and +5/8 in place of -3/8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .holeprob import log_hole_cue

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class BulkInterval:
    """A compact interval [a, b] strictly inside the bulk (-2, 2)."""

    a: float
    b: float

    def __post_init__(self):
        if not -2.0 < self.a < self.b < 2.0:
            raise ValidationError(f"need -2 < a < b < 2, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class RescaleParams:
    """Dimension-dependent quantities shared by the rescaling maps.

    ``c0_hat`` is the fitted constant of the hole-probability expansion; it is
    supplied by the caller (normally from ``holeprob.estimate_c0``).
    """

    n: int
    c0_hat: float = 0.0

    def __post_init__(self):
        # Non-integer n is accepted for the pure rescaling maps.
        if not (math.isfinite(self.n) and self.n >= 3):
            raise ValidationError(f"n must be at least 3, got {self.n}")

    @cached_property
    def ln_n(self) -> float:
        return math.log(self.n)

    @cached_property
    def two_ln_n(self) -> float:
        return 2.0 * self.ln_n

    @cached_property
    def sqrt_two_ln_n(self) -> float:
        return math.sqrt(self.two_ln_n)

    @cached_property
    def base_gap(self) -> float:
        """sqrt(32 ln n) / n, the leading order of the largest gap."""
        return math.sqrt(32.0 * self.ln_n) / self.n

    @property
    def c1(self) -> float:
        return self.c0_hat + math.log(math.pi / 2.0)

    def c2(self, interval: BulkInterval) -> float:
        return self.c0_hat + m0_of_interval(interval)


def f_n(params: RescaleParams, x):
    """Arc length whose CUE Gumbel coordinate is x."""
    x = np.asarray(x, dtype=float)
    out = (8.0 * x + 3.0 * math.log(params.two_ln_n)) / (
        2.0 * params.n * params.sqrt_two_ln_n
    ) + params.base_gap
    return out[()] if np.ndim(out) == 0 else out


def g_n(params: RescaleParams, x):
    """Scaled gap (gap times S(I)) whose GUE Gumbel coordinate is x."""
    x = np.asarray(x, dtype=float)
    out = (8.0 * x - 5.0 * math.log(params.two_ln_n)) / (
        2.0 * params.n * params.sqrt_two_ln_n
    ) + params.base_gap
    return out[()] if np.ndim(out) == 0 else out


def tau_from_gap_cue(params: RescaleParams, m):
    """Gumbel coordinate of a circular gap m (radians)."""
    m = np.asarray(m, dtype=float)
    out = params.sqrt_two_ln_n * (params.n * m - math.sqrt(32.0 * params.ln_n)) / 4.0 - (
        3.0 / 8.0
    ) * math.log(params.two_ln_n)
    return out[()] if np.ndim(out) == 0 else out


def tau_from_gap_gue(params: RescaleParams, m_star, interval: BulkInterval):
    """Gumbel coordinate of a GUE spacing m_star observed inside ``interval``."""
    m_star = np.asarray(m_star, dtype=float)
    s = s_of_interval(interval)
    out = params.sqrt_two_ln_n * (params.n * s * m_star - math.sqrt(32.0 * params.ln_n)) / 4.0 + (
        5.0 / 8.0
    ) * math.log(params.two_ln_n)
    return out[()] if np.ndim(out) == 0 else out


def s_of_interval(interval: BulkInterval) -> float:
    """Smallest value of sqrt(4 - y^2) over the interval."""
    return min(math.sqrt(4.0 - interval.a**2), math.sqrt(4.0 - interval.b**2))


def _relevant_endpoint(interval: BulkInterval) -> tuple[float, bool]:
    """Endpoint nearer the spectral edge and whether the interval is centred at 0."""
    a, b = interval.a, interval.b
    total = a + b
    if total < 0.0:
        end = a
    elif total > 0.0:
        end = b
    else:
        end = a
    if end == 0.0:
        raise ValidationError("the interval constant is undefined when the relevant endpoint is 0")
    return end, total == 0.0


def m_of_interval(interval: BulkInterval) -> float:
    """Interval constant (4 - e^2)/|e| at the endpoint e nearer the edge (doubled if symmetric)."""
    end, symmetric = _relevant_endpoint(interval)
    value = (4.0 - end * end) / abs(end)
    return 2.0 * value if symmetric else value


def m0_of_interval(interval: BulkInterval) -> float:
    """(3/2) ln(4 - e^2) - ln(4|e|), with ln(2|e|) in the symmetric case."""
    end, symmetric = _relevant_endpoint(interval)
    scale = 2.0 if symmetric else 4.0
    return 1.5 * math.log(4.0 - end * end) - math.log(scale * abs(end))


@dataclass(frozen=True)
class GumbelLaw:
    """Law of the k-th largest point of a Poisson process with intensity e^{c - x}."""

    location: float
    order: int = 1

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValidationError(f"order must be a positive integer, got {self.order}")

    @property
    def mean(self) -> float:
        """location + gamma - H_{k-1} (harmonic number)."""
        harmonic = sum(1.0 / j for j in range(1, self.order))
        return self.location + EULER_GAMMA - harmonic

    @property
    def variance(self) -> float:
        """pi^2/6 - sum_{j<k} 1/j^2."""
        return math.pi**2 / 6.0 - sum(1.0 / j**2 for j in range(1, self.order))


def _log_intensity(law: GumbelLaw, x):
    return law.location - np.asarray(x, dtype=float)


def gumbel_k_pdf(law: GumbelLaw, x):
    """lambda^k e^{-lambda} / (k-1)! with lambda = e^{c - x}."""
    log_lam = _log_intensity(law, x)
    k = law.order
    with np.errstate(over="ignore"):
        out = np.exp(k * log_lam - np.exp(log_lam) - math.lgamma(k))
    return out[()] if np.ndim(out) == 0 else out


def gumbel_k_cdf(law: GumbelLaw, x):
    """sum_{j<k} lambda^j e^{-lambda} / j!, the probability of fewer than k points above x."""
    log_lam = _log_intensity(law, x)
    with np.errstate(over="ignore"):
        lam = np.exp(log_lam)
        out = np.zeros(np.shape(log_lam))
        for j in range(law.order):
            out = out + np.exp(j * log_lam - lam - math.lgamma(j + 1))
    out = np.clip(out, 0.0, 1.0)
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Finite-n forms of the rescaling limits


def _arc_half(params: RescaleParams, length: float) -> float:
    if int(params.n) != params.n:
        raise ValidationError(f"hole probabilities need an integer n, got {params.n}")
    half = 0.5 * float(length)
    if not 0.0 < half < math.pi:
        raise ValidationError(f"half arc {half} must lie in (0, pi)")
    return half


def check_lemma1(params: RescaleParams, x: float) -> float:
    """n sqrt(2 ln n) D_n(f_n(x)/2); tends to e^{c0 - x}."""
    half = _arc_half(params, f_n(params, x))
    return params.n * params.sqrt_two_ln_n * math.exp(log_hole_cue(params.n, half).log_prob)


def check_lemma8(params: RescaleParams, x: float, z: float) -> float:
    """n (2 ln n)^{-1/2} D_n((1 + z/ln n) g_n(x)/2); tends to e^{c0 - x - 2z}."""
    half = _arc_half(params, (1.0 + z / params.ln_n) * g_n(params, x))
    return params.n / params.sqrt_two_ln_n * math.exp(log_hole_cue(params.n, half).log_prob)


@dataclass(frozen=True)
class Lemma9Record:
    lhs: float
    rhs: float
    holds: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.holds))


def check_lemma9(params: RescaleParams, x: float, w: float) -> Lemma9Record:
    """Compare ln D_n(w g_n(x)/2) with 1 - (w - 1) ln n + ln D_n(g_n(x)/2)."""
    if w < 1.0:
        raise ValidationError(f"w must be at least 1, got {w}")
    g = float(g_n(params, x))
    if not 0.0 < w * g / 2.0 < math.pi / 2.0:
        raise ValidationError("w g_n(x)/2 must lie in (0, pi/2)")
    lhs = log_hole_cue(params.n, _arc_half(params, w * g)).log_prob
    rhs = 1.0 - (w - 1.0) * params.ln_n + log_hole_cue(params.n, _arc_half(params, g)).log_prob
    return Lemma9Record(lhs, rhs, lhs <= rhs)


def _gauss_legendre(fun, lo, hi, order):
    t, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * float(np.dot(w, [fun(v) for v in x]))


def adaptive_gauss_legendre(fun, lo, hi, rtol=1e-10, order=16, max_depth=30):
    """Integrate by comparing orders p and 2p on each panel and bisecting on disagreement."""

    def panel(a, b, depth):
        coarse = _gauss_legendre(fun, a, b, order)
        fine = _gauss_legendre(fun, a, b, 2 * order)
        if abs(fine - coarse) <= rtol * abs(fine) or depth >= max_depth:
            return fine
        mid = 0.5 * (a + b)
        return panel(a, mid, depth + 1) + panel(mid, b, depth + 1)

    return panel(lo, hi, 0)


def check_lemma10(
    params: RescaleParams, x: float, interval: BulkInterval, n_quad: int = 16, rtol: float = 1e-10
) -> float:
    """n sqrt(2 ln n) int_I D_n(sqrt(4 - y^2)/S(I) g_n(x)/2) dy; tends to M(I) e^{c0 - x}."""
    s = s_of_interval(interval)
    g = float(g_n(params, x))

    def integrand(y):
        half = _arc_half(params, math.sqrt(4.0 - y * y) / s * g)
        return math.exp(log_hole_cue(params.n, half).log_prob)

    integral = adaptive_gauss_legendre(integrand, interval.a, interval.b, rtol=rtol, order=n_quad)
    return params.n * params.sqrt_two_ln_n * integral
