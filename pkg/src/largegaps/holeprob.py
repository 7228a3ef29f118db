"""Exact hole probabilities for CUE arcs and GUE intervals.

The single-arc CUE probability is the Toeplitz determinant

    D_n(alpha) = det[ c_{j-k}(alpha) ]_{j,k<n},   c_m = (1/2pi) int_alpha^{2pi-alpha} e^{i m t} dt,

i.e. the probability that no eigenangle falls in the arc (-alpha, alpha).
Unions of arcs and unions of real intervals go through the rank-n Gram
reduction det(I - chi P chi) = det(I_n - G).

Everything is accumulated as sums of logarithms of pivots; D_n reaches
exp(-const n^2) and would underflow as a raw product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import FitUnstableError, QuadratureOrderError, ValidationError
from .kernels import hermite_psi_table

TWO_PI = 2.0 * math.pi

# Pivots below this are treated as an exactly singular matrix.
PIVOT_FLOOR = 1e-300
# Double-precision Levinson keeps ~1e-10 relative accuracy while the running
# log-determinant stays above roughly -50; past this floor the computation
# is handed to the quadrature recursion, which has no such limit.
LEVINSON_LOGDET_FLOOR = -36.0
# GUE bases are truncated to this window; psi_k(x sqrt(n)) is negligible outside.
GUE_DOMAIN = 10.0
GUE_QUAD_TOL = 1e-8
C0_SPREAD_LIMIT = 1e-2


# ---------------------------------------------------------------------------
# Domain types


def _wrap(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a


@dataclass(frozen=True)
class ArcUnion:
    """Disjoint arcs on the unit circle, each given as (start, length) in radians.

    Starts are reduced modulo 2 pi. Arcs may touch but not overlap, and the
    total length must stay below 2 pi.
    """

    arcs: tuple = ()

    def __post_init__(self):
        cleaned = []
        for arc in self.arcs:
            start, length = float(arc[0]), float(arc[1])
            if not (math.isfinite(start) and math.isfinite(length)):
                raise ValidationError(f"arc {arc} is not finite")
            if not 0.0 < length < TWO_PI:
                raise ValidationError(f"arc length must lie in (0, 2pi), got {length}")
            cleaned.append((_wrap(start), length))
        cleaned.sort()
        total = sum(length for _, length in cleaned)
        if total >= TWO_PI:
            raise ValidationError(f"total arc length {total} must be below 2pi")
        tol = 1e-12
        for (s0, l0), (s1, _) in zip(cleaned, cleaned[1:]):
            if s0 + l0 > s1 + tol:
                raise ValidationError("arcs overlap")
        if len(cleaned) > 1:
            s_last, l_last = cleaned[-1]
            if s_last + l_last - TWO_PI > cleaned[0][0] + tol:
                raise ValidationError("arcs overlap across 2pi")
        object.__setattr__(self, "arcs", tuple(cleaned))

    @classmethod
    def single(cls, start: float, length: float) -> "ArcUnion":
        return cls(((start, length),))

    @property
    def total_length(self) -> float:
        return sum(length for _, length in self.arcs)

    def rotated(self, shift: float) -> "ArcUnion":
        return ArcUnion(tuple((s + shift, length) for s, length in self.arcs))

    def union(self, other: "ArcUnion") -> "ArcUnion":
        return ArcUnion(self.arcs + other.arcs)

    def contains(self, theta) -> np.ndarray:
        """Membership of angles in the closed arcs."""
        theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        out = np.zeros(theta.shape, dtype=bool)
        for start, length in self.arcs:
            out |= np.mod(theta - start, TWO_PI) <= length
        return out

    def complement(self) -> "ArcUnion":
        """The open gaps between the arcs, as an ArcUnion."""
        if not self.arcs:
            raise ValidationError("the complement of the empty set is the full circle")
        out = []
        k = len(self.arcs)
        for i, (s, length) in enumerate(self.arcs):
            nxt = self.arcs[(i + 1) % k][0] + (TWO_PI if i == k - 1 else 0.0)
            gap = nxt - (s + length)
            if gap > 0.0:
                out.append((s + length, gap))
        return ArcUnion(tuple(out))


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint closed intervals (lo, hi) of the real line."""

    intervals: tuple = ()

    def __post_init__(self):
        cleaned = []
        for iv in self.intervals:
            lo, hi = float(iv[0]), float(iv[1])
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValidationError(f"interval {iv} must satisfy lo < hi")
            cleaned.append((lo, hi))
        cleaned.sort()
        for (_, h0), (l1, _) in zip(cleaned, cleaned[1:]):
            if h0 > l1:
                raise ValidationError("intervals overlap")
        object.__setattr__(self, "intervals", tuple(cleaned))

    @property
    def total_length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (x >= lo) & (x <= hi)
        return out


@dataclass(frozen=True)
class HoleResult:
    """Natural log of a hole probability with conditioning diagnostics.

    ``method`` names the determinant (toeplitz, gram_cue, gram_gue) and
    ``backend`` the algorithm that produced it. ``min_pivot`` is the
    smallest prediction-error variance or Cholesky pivot; for the quadrature
    recursion ``log_min_pivot`` carries the same value without underflow.
    """

    log_prob: float
    method: str
    min_pivot: float
    backend: str = ""
    log_min_pivot: float = field(default=float("nan"))

    @property
    def prob(self) -> float:
        return math.exp(self.log_prob) if self.log_prob > -math.inf else 0.0

    @property
    def singular(self) -> bool:
        return self.log_prob == -math.inf


def _result(log_prob, method, log_pivots, backend):
    log_pivots = np.asarray(log_pivots, dtype=float)
    lmin = float(log_pivots.min()) if log_pivots.size else 0.0
    return HoleResult(float(log_prob), method, math.exp(lmin), backend, lmin)


def _singular(method, min_pivot, backend):
    lmp = math.log(min_pivot) if min_pivot > 0 else -math.inf
    return HoleResult(-math.inf, method, float(min_pivot), backend, lmp)


# ---------------------------------------------------------------------------
# Single-arc Toeplitz determinant


def toeplitz_entry(m, alpha):
    """Fourier coefficient of the indicator of [alpha, 2pi - alpha], normalized by 2pi."""
    m = np.asarray(m)
    alpha = float(alpha)
    mf = m.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.sin(mf * alpha) / (math.pi * mf)
    out = np.where(m == 0, 1.0 - alpha / math.pi, out)
    return out[()] if np.ndim(out) == 0 else out


def toeplitz_matrix(n: int, alpha: float) -> np.ndarray:
    return sla.toeplitz(toeplitz_entry(np.arange(n), alpha))


def _check_arc_args(n: int, alpha: float) -> None:
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    if not 0.0 <= alpha <= math.pi:
        raise ValidationError(f"alpha must lie in [0, pi], got {alpha}")


def _levinson(r: np.ndarray, floor: float):
    """Durbin recursion on a symmetric Toeplitz first column.

    Returns (status, log_pivots) with status one of "ok", "floor" (running
    log-determinant fell below ``floor``) or "breakdown" (a pivot was not
    positive).
    """
    n = r.size
    a = np.empty(n)
    e = float(r[0])
    logs = np.empty(n)
    logs[0] = math.log(e)
    total = logs[0]
    for i in range(1, n):
        if i > 1:
            acc = r[i] - a[: i - 1] @ r[i - 1 : 0 : -1]
        else:
            acc = r[1]
        k = acc / e
        if i > 1:
            a[: i - 1] -= k * a[i - 2 :: -1]
        a[i - 1] = k
        e *= 1.0 - k * k
        if not e > 0.0:
            return "breakdown", logs[:i]
        logs[i] = math.log(e)
        total += logs[i]
        if total < floor:
            return "floor", logs[: i + 1]
    return "ok", logs


def _arc_quadrature_nodes(n: int, alpha: float, oversample: float = 1.0):
    """Half of a symmetric Gauss-Legendre rule on the arc [alpha, 2pi - alpha].

    The rule is symmetric about pi, so only nodes in (alpha, pi) are kept;
    polynomials with real coefficients take conjugate values on the mirror
    nodes. Weights are normalized by 2pi and already doubled.
    """
    half = math.pi - alpha
    m_full = int(math.ceil(oversample * (n + 48 + 0.5 * n * half)))
    m_full += m_full % 2
    t, w = np.polynomial.legendre.leggauss(m_full)
    keep = t < 0.0
    theta = math.pi + half * t[keep]
    weight = 2.0 * w[keep] * half / TWO_PI
    return theta, weight


def arc_log_pivots_quadrature(n: int, alpha: float, oversample: float = 1.0) -> np.ndarray:
    """Logs of the prediction-error variances E_0..E_{n-1} for the arc measure.

    E_k is the squared norm of the k-th monic orthogonal polynomial for the
    normalized arc-length measure on [alpha, 2pi - alpha]; the Toeplitz
    determinant is their product. The orthonormal polynomials are generated
    by an Arnoldi process (multiplication by z, twice-repeated classical
    Gram-Schmidt) on a Gauss-Legendre discretization of the arc, which only
    ever forms O(1) quantities and therefore never underflows.
    """
    theta, weight = _arc_quadrature_nodes(n, alpha, oversample)
    m = theta.size
    c, s = np.cos(theta), np.sin(theta)
    sw = np.sqrt(weight)
    q = np.zeros((n, 2 * m))
    v0 = np.concatenate([sw, np.zeros(m)])
    mu0 = float(v0 @ v0)
    q[0] = v0 / math.sqrt(mu0)
    logs = np.empty(n)
    logs[0] = math.log(mu0)
    for k in range(n - 1):
        re, im = q[k, :m], q[k, m:]
        v = np.concatenate([c * re - s * im, s * re + c * im])
        basis = q[: k + 1]
        for _ in range(2):
            v -= basis.T @ (basis @ v)
        h = math.sqrt(float(v @ v))
        q[k + 1] = v / h
        logs[k + 1] = logs[k] + 2.0 * math.log(h)
    return logs


def log_hole_cue_sequence(n_max: int, alpha: float) -> np.ndarray:
    """ln D_k(alpha) for k = 1..n_max from one quadrature recursion run."""
    _check_arc_args(n_max, alpha)
    if alpha == 0.0:
        return np.zeros(n_max)
    if alpha == math.pi:
        return np.full(n_max, -math.inf)
    return np.cumsum(arc_log_pivots_quadrature(n_max, alpha))


def toeplitz_logdet_cholesky(n: int, alpha: float) -> HoleResult:
    """Dense Cholesky of the Toeplitz matrix; O(n^3) cross-check route."""
    _check_arc_args(n, alpha)
    return _cholesky_logdet(toeplitz_matrix(n, alpha), "toeplitz")


def log_hole_cue(n: int, alpha: float) -> HoleResult:
    """Log-probability that no CUE(n) eigenangle lies in an arc of length 2 alpha.

    Levinson-Durbin on the Toeplitz first column is used while it is
    accurate; a pivot breakdown falls back to dense Cholesky, and once the
    running log-determinant passes LEVINSON_LOGDET_FLOOR the quadrature
    recursion takes over.
    """
    _check_arc_args(n, alpha)
    if alpha == 0.0:
        return HoleResult(0.0, "toeplitz", 1.0, "exact", 0.0)
    if alpha == math.pi:
        return HoleResult(-math.inf, "toeplitz", 0.0, "exact", -math.inf)
    r = toeplitz_entry(np.arange(n), alpha)
    status, logs = _levinson(r, LEVINSON_LOGDET_FLOOR)
    if status == "ok":
        return _result(logs.sum(), "toeplitz", logs, "levinson")
    if status == "breakdown":
        chol = _cholesky_logdet(toeplitz_matrix(n, alpha), "toeplitz")
        if not chol.singular and chol.log_prob >= LEVINSON_LOGDET_FLOOR:
            return chol
    logs = arc_log_pivots_quadrature(n, alpha)
    return _result(logs.sum(), "toeplitz", logs, "quadrature")


# ---------------------------------------------------------------------------
# Gram reductions


def _cholesky_logdet(mat: np.ndarray, method: str) -> HoleResult:
    if mat.shape[0] == 0:
        return HoleResult(0.0, method, 1.0, "cholesky", 0.0)
    potrf = lapack.zpotrf if np.iscomplexobj(mat) else lapack.dpotrf
    factor, info = potrf(mat, lower=1, clean=0)
    if info > 0:
        piv = np.abs(np.diag(factor)[: info - 1]) ** 2
        return _singular(method, float(piv.min()) if piv.size else 0.0, "cholesky")
    if info < 0:
        raise ValidationError(f"invalid argument {-info} to the Cholesky factorization")
    piv = np.abs(np.diag(factor)) ** 2
    if piv.min() < PIVOT_FLOOR:
        return _singular(method, float(piv.min()), "cholesky")
    logs = np.log(piv)
    return _result(logs.sum(), method, logs, "cholesky")


def _reference_angle(arcs: ArcUnion) -> float:
    """Start of the longest arc (first in sorted order on ties)."""
    return max(arcs.arcs, key=lambda arc: arc[1])[0]


def cue_gram_matrix(n: int, arcs: ArcUnion) -> np.ndarray:
    """G_jk = sum over arcs of (1/2pi) int e^{i(j-k)t} dt; Hermitian Toeplitz.

    A rotation conjugates G by a diagonal unitary, which leaves det(I - G)
    unchanged but perturbs the rounded entries. Phases are therefore taken
    relative to a reference arc, so rotated copies of a set give the same
    matrix up to rounding of the relative offsets.
    """
    m = np.arange(n)
    col = np.zeros(n, dtype=complex)
    col[0] = arcs.total_length / TWO_PI
    mm = m[1:].astype(float)
    ref = _reference_angle(arcs) if arcs.arcs else 0.0
    for start, length in arcs.arcs:
        centre = math.fmod(start - ref + TWO_PI, TWO_PI) + 0.5 * length
        col[1:] += np.exp(1j * mm * centre) * np.sin(0.5 * mm * length) / (math.pi * mm)
    return sla.toeplitz(col, np.conj(col))


def gram_hole_cue(n: int, arcs: ArcUnion) -> HoleResult:
    """Log-probability that no CUE(n) eigenangle lies in a union of arcs.

    Computes log det(I_n - G) by Hermitian Cholesky.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    if not arcs.arcs:
        return HoleResult(0.0, "gram_cue", 1.0, "exact", 0.0)
    g = cue_gram_matrix(n, arcs)
    return _cholesky_logdet(np.eye(n) - g, "gram_cue")


def default_gue_quad_order(n: int) -> int:
    return max(64, 2 * n + 32)


def gue_basis(n: int, x) -> np.ndarray:
    """phi_k(x) = n^{1/4} psi_k(x sqrt(n)) for k < n, shape (n, len(x))."""
    return n**0.25 * hermite_psi_table(n - 1, np.asarray(x, dtype=float) * math.sqrt(n))


def gue_gram_matrix(n: int, intervals: IntervalUnion, quad_order: int) -> np.ndarray:
    """G_jk = sum over intervals of int phi_j phi_k dx by per-interval Gauss-Legendre."""
    t, w = np.polynomial.legendre.leggauss(quad_order)
    g = np.zeros((n, n))
    for lo, hi in intervals.intervals:
        x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        phi = gue_basis(n, x)
        g += (phi * (0.5 * (hi - lo) * w)) @ phi.T
    return g


def _check_gue_intervals(intervals: IntervalUnion) -> None:
    for lo, hi in intervals.intervals:
        if lo < -GUE_DOMAIN or hi > GUE_DOMAIN:
            raise ValidationError(f"intervals must lie within [-{GUE_DOMAIN}, {GUE_DOMAIN}]")


def gram_hole_gue(n: int, intervals: IntervalUnion, quad_order: int | None = None) -> HoleResult:
    """Log-probability that no GUE(n) eigenvalue lies in a union of intervals.

    The spectrum has density proportional to exp(-n sum lambda^2 / 2) times the
    squared Vandermonde. The quadrature is validated by order doubling.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    _check_gue_intervals(intervals)
    if quad_order is None:
        quad_order = default_gue_quad_order(n)
    if quad_order < 2 * n + 32:
        raise ValidationError(f"quad_order must be at least 2n + 32 = {2 * n + 32}")
    if not intervals.intervals:
        return HoleResult(0.0, "gram_gue", 1.0, "exact", 0.0)
    res = _cholesky_logdet(np.eye(n) - gue_gram_matrix(n, intervals, quad_order), "gram_gue")
    check = _cholesky_logdet(np.eye(n) - gue_gram_matrix(n, intervals, 2 * quad_order), "gram_gue")
    if res.singular != check.singular or (
        not res.singular and abs(res.log_prob - check.log_prob) > GUE_QUAD_TOL
    ):
        raise QuadratureOrderError(
            f"doubling the quadrature order moved the log-determinant from "
            f"{res.log_prob} to {check.log_prob}"
        )
    return res


# ---------------------------------------------------------------------------
# Asymptotic expansion and the constant c0


def asymptotic_log_dn(n: int, alpha: float, c0_hat: float) -> float:
    """n^2 ln cos(alpha/2) - (1/4) ln(n sin(alpha/2)) + c0_hat."""
    if not 0.0 < alpha < math.pi:
        raise ValidationError(f"alpha must lie in (0, pi), got {alpha}")
    log_cos = math.log1p(-2.0 * math.sin(alpha / 4.0) ** 2)
    return n * n * log_cos - 0.25 * math.log(n * math.sin(alpha / 2.0)) + c0_hat


def expansion_residual(n: int, alpha: float) -> float:
    """r_n = ln D_n(alpha) minus the expansion without its constant."""
    return log_hole_cue(n, alpha).log_prob - asymptotic_log_dn(n, alpha, 0.0)


@dataclass(frozen=True)
class C0Fit:
    """Least-squares fits r_n ~ c + A / (n sin(alpha/2)), one per alpha."""

    c0_hat: float
    spread: float
    alphas: tuple
    n_grid: tuple
    per_alpha: tuple
    slopes: tuple
    residuals: tuple  # residuals[i][j] = r_{n_j}(alpha_i)

    def __iter__(self):
        return iter((self.c0_hat, self.spread))


def estimate_c0(alphas: Sequence[float], n_grid: Sequence[int], strict: bool = True) -> C0Fit:
    """Extrapolate the constant of the hole-probability expansion.

    For each alpha the residuals over ``n_grid`` are fitted to
    c + A / (n sin(alpha/2)); the estimate is the mean of the intercepts and
    the spread their largest pairwise difference. A spread above
    C0_SPREAD_LIMIT raises FitUnstableError unless ``strict`` is False.
    """
    alphas = tuple(float(a) for a in alphas)
    n_grid = tuple(int(n) for n in n_grid)
    if not alphas:
        raise ValidationError("at least one alpha is required")
    if len(n_grid) < 2:
        raise ValidationError("the fit needs at least two values of n")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise ValidationError("n_grid must be strictly increasing positive integers")
    intercepts, slopes, table = [], [], []
    for alpha in alphas:
        if not 0.0 < alpha < math.pi:
            raise ValidationError(f"alpha must lie in (0, pi), got {alpha}")
        r = np.array([expansion_residual(n, alpha) for n in n_grid])
        design = np.column_stack(
            [np.ones(len(n_grid)), 1.0 / (np.array(n_grid) * math.sin(alpha / 2.0))]
        )
        coef, *_ = np.linalg.lstsq(design, r, rcond=None)
        intercepts.append(float(coef[0]))
        slopes.append(float(coef[1]))
        table.append(tuple(float(v) for v in r))
    c0_hat = float(np.mean(intercepts))
    spread = float(max(intercepts) - min(intercepts))
    fit = C0Fit(c0_hat, spread, alphas, n_grid, tuple(intercepts), tuple(slopes), tuple(table))
    if strict and spread > C0_SPREAD_LIMIT:
        raise FitUnstableError(f"c0 fits disagree across alpha (spread {spread:.3g})", c0_hat, spread)
    return fit
