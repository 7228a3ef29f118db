"""Correlation kernels of the circular and Gaussian unitary ensembles.

Pointwise building blocks: the CUE sine-ratio kernel, normalized Hermite
functions, the GUE Christoffel-Darboux kernel and the semicircle density.
All routines broadcast over numpy arrays and work in double precision.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import OrderOverflowError, ValidationError

MAX_HERMITE_ORDER = 4096

_PSI0 = (2.0 * math.pi) ** -0.25
# Rescale the recurrence when values leave this band; the exponent is
# carried separately so large orders do not underflow at moderate |x|.
_BIG = 1e150
_LOG_BIG = math.log(_BIG)

# Below this |X - Y| the GUE kernel uses its confluent diagonal value at the
# midpoint; the divided difference would otherwise lose most of its digits.
_CONFLUENT_GAP = 1e-7


def cue_kernel(n: int, x, y):
    """CUE kernel sin(n(x-y)/2) / (2 pi sin((x-y)/2)).

    Where sin((x-y)/2) vanishes (x - y = 2 pi m) the confluent limit
    n (-1)^((n-1) m) / (2 pi) is returned; for |x - y| < 2 pi that is the
    diagonal value n / (2 pi).
    """
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    half = 0.5 * d
    den = np.sin(half)
    num = np.sin(n * half)
    zero = den == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (2.0 * math.pi * den)
    if np.any(zero):
        m = np.rint(d / (2.0 * math.pi))
        sign = np.where(((n - 1) * m) % 2 == 0, 1.0, -1.0)
        out = np.where(zero, sign * n / (2.0 * math.pi), out)
    return out[()] if np.ndim(out) == 0 else out


def cue_kernel_sum(n: int, x, y):
    """The same kernel as an explicit exponential sum (slow reference form)."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    freqs = np.arange(n) - 0.5 * (n - 1)
    terms = np.exp(1j * np.multiply.outer(d, freqs))
    return terms.sum(axis=-1) / (2.0 * math.pi)


def _check_order(k: int, max_order: int) -> None:
    if k < 0:
        raise ValidationError(f"Hermite order must be nonnegative, got {k}")
    if k > max_order:
        raise OrderOverflowError(f"Hermite order {k} exceeds the configured maximum {max_order}")


def _rescaled_value(p, logscale):
    with np.errstate(divide="ignore", over="ignore"):
        mag = np.exp(np.log(np.abs(p)) + logscale)
    return np.where(p == 0.0, 0.0, np.sign(p) * mag)


def _hermite_pair(k: int, x):
    """Return (psi_{k-1}(x), psi_k(x)); psi_{-1} is taken as zero."""
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.full_like(x, _PSI0)
    logscale = -0.25 * x * x
    for j in range(k):
        nxt = (x * cur - math.sqrt(j) * prev) / math.sqrt(j + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if np.any(big):
            prev = np.where(big, prev / _BIG, prev)
            cur = np.where(big, cur / _BIG, cur)
            logscale = np.where(big, logscale + _LOG_BIG, logscale)
    return _rescaled_value(prev, logscale), _rescaled_value(cur, logscale)


def hermite_psi(k: int, x, max_order: int = MAX_HERMITE_ORDER):
    """Normalized Hermite function psi_k(x) = exp(-x^2/4) h_k(x) / sqrt(sqrt(2 pi) k!).

    Evaluated by the normalized three-term recurrence with a separately
    tracked exponent, so orders up to ``max_order`` stay finite.
    """
    _check_order(k, max_order)
    out = _hermite_pair(k, x)[1]
    return out[()] if np.ndim(out) == 0 else out


def hermite_psi_deriv(k: int, x, max_order: int = MAX_HERMITE_ORDER):
    """Derivative psi_k'(x) = -(x/2) psi_k(x) + sqrt(k) psi_{k-1}(x)."""
    _check_order(k, max_order)
    x = np.asarray(x, dtype=float)
    prev, cur = _hermite_pair(k, x)
    out = -0.5 * x * cur + math.sqrt(k) * prev
    return out[()] if np.ndim(out) == 0 else out


def hermite_psi_table(kmax: int, x, max_order: int = MAX_HERMITE_ORDER) -> np.ndarray:
    """All of psi_0 .. psi_kmax at the points x, shape (kmax + 1, len(x))."""
    _check_order(kmax, max_order)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((kmax + 1, x.size))
    prev = np.zeros_like(x)
    cur = np.full_like(x, _PSI0)
    logscale = -0.25 * x * x
    out[0] = _rescaled_value(cur, logscale)
    for j in range(kmax):
        nxt = (x * cur - math.sqrt(j) * prev) / math.sqrt(j + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _BIG
        if np.any(big):
            prev = np.where(big, prev / _BIG, prev)
            cur = np.where(big, cur / _BIG, cur)
            logscale = np.where(big, logscale + _LOG_BIG, logscale)
        out[j + 1] = _rescaled_value(cur, logscale)
    return out


def gue_kernel_diagonal(n: int, x):
    """K_n(x, x) = n (psi_n' psi_{n-1} - psi_{n-1}' psi_n)(x sqrt(n))."""
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    big_x = np.asarray(x, dtype=float) * math.sqrt(n)
    pm2, pm1 = _hermite_pair(n - 1, big_x)
    p = (big_x * pm1 - math.sqrt(n - 1) * pm2) / math.sqrt(n)
    dp = -0.5 * big_x * p + math.sqrt(n) * pm1
    dpm1 = -0.5 * big_x * pm1 + math.sqrt(n - 1) * pm2
    out = n * (dp * pm1 - dpm1 * p)
    return out[()] if np.ndim(out) == 0 else out


def gue_kernel(n: int, x, y):
    """GUE kernel for the weight exp(-n x^2 / 2).

    sqrt(n) (psi_n(X) psi_{n-1}(Y) - psi_{n-1}(X) psi_n(Y)) / (x - y) with
    X = x sqrt(n), Y = y sqrt(n); on (and extremely near) the diagonal the
    analytic confluent limit is used.
    """
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    rn = math.sqrt(n)
    xm1, xn = _hermite_pair(n, x * rn)
    ym1, yn = _hermite_pair(n, y * rn)
    d = x - y
    near = np.abs(d * rn) < _CONFLUENT_GAP
    with np.errstate(divide="ignore", invalid="ignore"):
        out = rn * (xn * ym1 - xm1 * yn) / d
    if np.any(near):
        out = np.where(near, gue_kernel_diagonal(n, 0.5 * (x + y)), out)
    return out[()] if np.ndim(out) == 0 else out


def gue_kernel_sum(n: int, x, y):
    """Christoffel-Darboux sum sqrt(n) sum_{k<n} psi_k(X) psi_k(Y) (reference form)."""
    rn = math.sqrt(n)
    tx = hermite_psi_table(n - 1, np.atleast_1d(x) * rn)
    ty = hermite_psi_table(n - 1, np.atleast_1d(y) * rn)
    return rn * np.einsum("ki,ki->i", tx, ty)


def rho_sc(x):
    """Semicircle density sqrt((4 - x^2)_+) / (2 pi)."""
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * math.pi)
    return out[()] if np.ndim(out) == 0 else out
