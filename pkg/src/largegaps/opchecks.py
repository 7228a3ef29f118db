"""Executable operator inequalities behind the gap asymptotics.

Everything is computed on finite Gram reductions: for a rank-n projection
kernel restricted to a set J, det(Id - chi_J P chi_J) = det(I_n - G) with G the
matrix of basis inner products over J, so determinants and traces below are
exact up to floating point.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import HypothesisViolationError, ValidationError
from .holeprob import (
    TWO_PI,
    ArcUnion,
    HoleResult,
    IntervalUnion,
    cue_gram_matrix,
    default_gue_quad_order,
    gram_hole_cue,
    gram_hole_gue,
    gue_basis,
    gue_gram_matrix,
    log_hole_cue,
)
from .kernels import rho_sc
from .rescaling import BulkInterval, RescaleParams, f_n, g_n, s_of_interval

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-12
MAX_OCCUPIED_SETS = 12
# Warn when the alternating inclusion-exclusion sum loses this many digits.
CANCELLATION_DIGITS = 8
NEGATIVE_CORRELATION_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Finite symmetric operator pairs


def _symmetric_eigs(mat: np.ndarray, name: str) -> np.ndarray:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"{name} must be a square matrix")
    scale = max(1.0, float(np.max(np.abs(mat), initial=0.0)))
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValidationError(f"{name} is not symmetric")
    return np.linalg.eigvalsh(mat)


@dataclass(frozen=True)
class SymOpPair:
    """Two finite symmetric (or Hermitian) operators with Id - B > 0 and Id - A >= 0."""

    a_mat: np.ndarray
    b_mat: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_mat))
        b = np.atleast_2d(np.asarray(self.b_mat))
        if a.shape != b.shape:
            raise ValidationError(f"shapes differ: {a.shape} vs {b.shape}")
        eig_a = _symmetric_eigs(a, "A")
        eig_b = _symmetric_eigs(b, "B")
        if not eig_b.max() < 1.0:
            raise ValidationError("Id - B is not positive definite")
        if eig_a.max() > 1.0 + PSD_TOL:
            raise ValidationError("Id - A is not positive semidefinite")
        object.__setattr__(self, "a_mat", a)
        object.__setattr__(self, "b_mat", b)
        object.__setattr__(self, "_eig_a", eig_a)
        object.__setattr__(self, "_eig_b", eig_b)


@dataclass(frozen=True)
class ComparisonReport:
    lower: float
    mid: float
    trace_bound_lhs: float
    trace_bound_rhs: float
    upper: float = 1.0

    @property
    def ordered(self) -> bool:
        return self.lower <= self.mid <= self.upper


def _log_det_id_minus(eigs: np.ndarray) -> float:
    gaps = 1.0 - eigs
    if np.any(gaps <= 0.0):
        return -math.inf
    return float(np.sum(np.log(gaps)))


def comparison_bounds(pair: SymOpPair) -> ComparisonReport:
    """Bounds on det(Id - A)/det(Id - B) corrected by the first-order trace term.

    lower = 1 - |A - B|_2^2 |(Id - B)^{-1}|^2, mid = exp(Tr((A - B)(Id - B)^{-1}))
    det(Id - A)/det(Id - B), upper = 1, together with the two sides of the
    trace estimate |Tr((A - B)(Id - B)^{-1})| <= |Tr(A - B)| + |A - B|_2 |B|_2
    |(Id - B)^{-1}|. Here |.|_2 is the Hilbert-Schmidt norm and the operator
    norm of (Id - B)^{-1} is 1/(1 - lambda_max(B)).
    """
    a, b = pair.a_mat, pair.b_mat
    diff = a - b
    inv_norm = 1.0 / (1.0 - float(pair._eig_b.max()))
    hs_diff = float(np.linalg.norm(diff))
    hs_b = float(np.linalg.norm(b))
    eye = np.eye(b.shape[0])
    resolvent = sla.cho_solve(sla.cho_factor(eye - b), eye)
    trace_term = float(np.real(np.trace(diff @ resolvent)))
    log_ratio = _log_det_id_minus(pair._eig_a) - _log_det_id_minus(pair._eig_b)
    mid = math.exp(trace_term + log_ratio) if log_ratio > -math.inf else 0.0
    return ComparisonReport(
        lower=float(1.0 - hs_diff**2 * inv_norm**2),
        mid=mid,
        trace_bound_lhs=abs(trace_term),
        trace_bound_rhs=float(abs(np.real(np.trace(diff))) + hs_diff * hs_b * inv_norm),
    )


def lowest_eigen_bound(b_mat) -> tuple[float, float, bool]:
    """Compare 1 - lambda_max(B) with det(Id - B) e^{Tr B - 1}."""
    b = np.atleast_2d(np.asarray(b_mat))
    eigs = _symmetric_eigs(b, "B")
    if not eigs.max() < 1.0:
        raise ValidationError("Id - B is not positive definite")
    lhs = 1.0 - float(eigs.max())
    rhs = math.exp(_log_det_id_minus(eigs) + float(eigs.sum()) - 1.0)
    return lhs, rhs, lhs >= rhs


# ---------------------------------------------------------------------------
# Hole probabilities of unions


def _gram_hole(n: int, hole, ensemble: str) -> HoleResult:
    if ensemble == "cue":
        if not isinstance(hole, ArcUnion):
            raise ValidationError("the CUE ensemble takes ArcUnion sets")
        return gram_hole_cue(n, hole)
    if ensemble == "gue":
        if not isinstance(hole, IntervalUnion):
            raise ValidationError("the GUE ensemble takes IntervalUnion sets")
        return gram_hole_gue(n, hole)
    raise ValidationError(f"unknown ensemble {ensemble!r}")


def _pieces(s) -> tuple:
    return s.arcs if isinstance(s, ArcUnion) else s.intervals


def _merge(sets):
    """Union of pairwise disjoint sets of one kind (validated on construction)."""
    kind = type(sets[0])
    return kind(tuple(p for s in sets for p in _pieces(s)))


def _check_disjoint(sets) -> None:
    """Pairwise disjointness (touching allowed); unlike _merge this accepts a full cover."""
    if isinstance(sets[0], IntervalUnion):
        _merge(sets)
        return
    pieces = sorted(p for s in sets for p in _pieces(s))
    tol = 1e-12
    for (s0, l0), (s1, _) in zip(pieces, pieces[1:]):
        if s0 + l0 > s1 + tol:
            raise ValidationError("sets overlap")
    if len(pieces) > 1 and pieces[-1][0] + pieces[-1][1] - TWO_PI > pieces[0][0] + tol:
        raise ValidationError("sets overlap across 2pi")


def negative_correlation(n: int, sets, ensemble: str) -> tuple[float, float, bool]:
    """Joint hole log-probability of disjoint sets against the sum of the individual ones."""
    sets = list(sets)
    if len(sets) < 2:
        raise ValidationError("need at least two sets")
    joint = _gram_hole(n, _merge(sets), ensemble).log_prob
    total = sum(_gram_hole(n, s, ensemble).log_prob for s in sets)
    return joint, total, joint <= total + NEGATIVE_CORRELATION_SLACK


def splitting_ratio(n: int, x_list, y_list) -> tuple[float, float]:
    """det(Id - A)/det(Id - B) for arcs I(y_j, F_n(x_j)) and the trace term.

    In the basis chi_{I_j} phi_l the restricted projection A has block (i, j)
    equal to the single-arc Gram matrix G_j for every i, while the direct sum
    B keeps only the diagonal blocks. Hence det(Id - A) = det(I_n - sum_j G_j)
    and Tr((A - B)(Id - B)^{-1}) is assembled block by block from these
    matrices.
    """
    x_list = [float(v) for v in x_list]
    y_list = [float(v) for v in y_list]
    if len(x_list) != len(y_list) or not x_list:
        raise ValidationError("x_list and y_list must be nonempty and of equal length")
    params = RescaleParams(n)
    arcs = [ArcUnion.single(y, float(f_n(params, x))) for x, y in zip(x_list, y_list)]
    union = _merge(arcs)  # raises on overlap
    grams = [cue_gram_matrix(n, arc) for arc in arcs]
    eye = np.eye(n)
    resolvents = [sla.cho_solve(sla.cho_factor(eye - g), eye) for g in grams]
    # (Id - B)^{-1} is block diagonal, so the trace only sees the diagonal
    # blocks of A - B, where A and B both carry G_j.
    trace_term = 0.0
    for g, res in zip(grams, resolvents):
        a_block, b_block = g, g
        trace_term += float(np.real(np.sum((a_block - b_block) * res.T)))
    log_ratio = gram_hole_cue(n, union).log_prob - sum(gram_hole_cue(n, a).log_prob for a in arcs)
    return math.exp(log_ratio), trace_term


def _full_circle(sets) -> bool:
    return sum(s.total_length for s in sets) >= TWO_PI * (1.0 - 1e-12)


def occupancy_hole(n: int, hole, occupied, ensemble: str) -> float:
    """Log-probability that ``hole`` is empty while every occupied set holds a point.

    Inclusion-exclusion over subsets S of the occupied sets:
    sum_S (-1)^{|S|} P(no point in hole and in the sets of S), with an exactly
    rounded sum of the terms.
    """
    occupied = list(occupied)
    if len(occupied) > MAX_OCCUPIED_SETS:
        raise ValidationError(f"at most {MAX_OCCUPIED_SETS} occupied sets are supported")
    _check_disjoint([hole] + occupied)
    terms = []
    for size in range(len(occupied) + 1):
        for subset in itertools.combinations(occupied, size):
            sets = [hole, *subset]
            if ensemble == "cue" and _full_circle(sets):
                continue  # an empty circle has probability zero
            log_p = _gram_hole(n, _merge(sets), ensemble).log_prob
            if log_p > -math.inf:
                terms.append((-1.0) ** size * math.exp(log_p))
    total = math.fsum(terms)
    biggest = max((abs(t) for t in terms), default=0.0)
    if total <= 0.0:
        if biggest > 0.0:
            warnings.warn("inclusion-exclusion sum is not positive; reporting -inf", RuntimeWarning)
        return -math.inf
    if biggest > total * 10.0**CANCELLATION_DIGITS:
        warnings.warn(
            f"inclusion-exclusion lost about {math.log10(biggest / total):.1f} digits",
            RuntimeWarning,
        )
    return math.log(total)


# ---------------------------------------------------------------------------
# CUE versus GUE on matched scales


@dataclass(frozen=True)
class HoleComparison:
    """GUE hole at x against the CUE hole of the same expected occupation.

    ``hs_a`` and ``hs_b`` are the Hilbert-Schmidt norms of the two rescaled
    kernels, recorded as raw diagnostics.
    """

    p_gue: float
    p_cue: float
    difference: float
    hs_diff: float
    trace_a: float
    trace_b: float
    hs_a: float = float("nan")
    hs_b: float = float("nan")


def cue_gue_hole_gap(n: int, x: float, delta_n: float, quad_order: int | None = None) -> HoleComparison:
    """Compare the GUE hole [x, x + delta_n/rho(x)] with the CUE arc of size 2 pi delta_n.

    On u in (0, n delta_n) the kernels are
    A(u, v) = -K_GUE(x + u/(n rho), x + v/(n rho))/(n rho) and
    B(u, v) = -(2 pi/n) K_CUE(2 pi u/n, 2 pi v/n). Both are minus a rank-n
    Gram form, so |A|_2^2 and |B|_2^2 are squared Frobenius norms of the Gram
    matrices and <A, B> is the sum of |X_kl|^2 over the mixed inner products
    X_kl of the two bases on (0, n delta_n).
    """
    if int(n) != n or n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n}")
    if not -2.0 < x < 2.0:
        raise ValidationError(f"x must lie in the bulk (-2, 2), got {x}")
    if not 0.0 < delta_n < 0.5:
        raise ValidationError(f"delta_n must lie in (0, 1/2), got {delta_n}")
    rho = float(rho_sc(x))
    interval = IntervalUnion(((x, x + delta_n / rho),))
    q = default_gue_quad_order(n) if quad_order is None else int(quad_order)
    p_gue = gram_hole_gue(n, interval, q).log_prob
    p_cue = log_hole_cue(n, math.pi * delta_n).log_prob

    g_a = gue_gram_matrix(n, interval, q)
    g_b = cue_gram_matrix(n, ArcUnion.single(0.0, TWO_PI * delta_n))
    length = n * delta_n
    t, w = np.polynomial.legendre.leggauss(q)
    u = 0.5 * length * (t + 1.0)
    w = 0.5 * length * w
    scale = n * rho
    basis_a = gue_basis(n, x + u / scale) / math.sqrt(scale)
    freqs = np.arange(n) - 0.5 * (n - 1)
    basis_b = np.exp(1j * np.outer(freqs, TWO_PI * u / n)) / math.sqrt(n)
    mixed = (basis_a * w) @ basis_b.conj().T
    hs_a2 = float(np.sum(g_a * g_a))
    hs_b2 = float(np.sum(np.abs(g_b) ** 2))
    cross = float(np.sum(np.abs(mixed) ** 2))
    hs_diff2 = max(hs_a2 + hs_b2 - 2.0 * cross, 0.0)
    return HoleComparison(
        p_gue=p_gue,
        p_cue=p_cue,
        difference=math.exp(p_gue) - math.exp(p_cue),
        hs_diff=math.sqrt(hs_diff2),
        trace_a=-float(np.trace(g_a)),
        trace_b=-float(np.real(np.trace(g_b))),
        hs_a=math.sqrt(hs_a2),
        hs_b=math.sqrt(hs_b2),
    )


def union_hypothesis_violations(
    n: int, interval: BulkInterval, y_list, a_list, eps0: float = 0.5, c0: float = 1.0
) -> list[str]:
    """Geometric conditions for the union lower bound; returns the violated ones."""
    params = RescaleParams(n)
    ln_n = params.ln_n
    s = s_of_interval(interval)
    out = []
    ys = [float(v) for v in y_list]
    if len(ys) != len(a_list) or not ys:
        return ["y_list and a_list must be nonempty and of equal length"]
    if any(not interval.a < y < interval.b for y in ys):
        out.append("every y_j must lie inside the interval")
    points = [interval.a] + sorted(ys) + [interval.b]
    sep = eps0 / ln_n
    if any(q - p < sep for p, q in zip(points, points[1:])):
        out.append(f"points (with the endpoints) must be separated by at least {sep:.6g}")
    lo = float(g_n(params, -c0)) / s
    hi = min(float(g_n(params, c0)) / s, eps0 / (2.0 * ln_n))
    for j, a in enumerate(a_list):
        if not (lo < a < hi and a > 0.0):
            out.append(f"width a_{j + 1} = {a:.6g} outside the window ({lo:.6g}, {hi:.6g})")
    for j, y in enumerate(ys):
        if interval.a < y < interval.b and math.sqrt(4.0 - y * y) / s > 1.0 + c0 / ln_n:
            out.append(f"density ratio at y_{j + 1} exceeds 1 + C0/ln n")
    return out


def union_hole_lower_bound(
    n: int, interval: BulkInterval, y_list, a_list, eps0: float = 0.5, c0: float = 1.0
) -> tuple[float, float, bool]:
    """GUE hole of the union of [y_j, y_j + a_j] against a product of matched CUE holes.

    rhs = ln(1 - 1/ln n) + sum_j ln D_n(a_j sqrt(4 - y_j^2)/2).
    """
    violations = union_hypothesis_violations(n, interval, y_list, a_list, eps0, c0)
    if violations:
        raise HypothesisViolationError(violations)
    ln_n = math.log(n)
    holes = IntervalUnion(tuple((float(y), float(y) + float(a)) for y, a in zip(y_list, a_list)))
    lhs = gram_hole_gue(n, holes).log_prob
    rhs = math.log(1.0 - 1.0 / ln_n) + sum(
        log_hole_cue(n, a * math.sqrt(4.0 - y * y) / 2.0).log_prob for y, a in zip(y_list, a_list)
    )
    return lhs, rhs, lhs >= rhs
