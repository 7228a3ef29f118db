"""Randomized instance suites for the operator and membership checks.

Every suite returns rows (instance, check, lhs, rhs, holds) where ``holds`` is
None for purely diagnostic rows. Instance i draws from Seed(seed_root, i).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ValidationError
from ..holeprob import ArcUnion, IntervalUnion
from ..opchecks import (
    SymOpPair,
    comparison_bounds,
    cue_gue_hole_gap,
    lowest_eigen_bound,
    negative_correlation,
    splitting_ratio,
    union_hole_lower_bound,
    union_hypothesis_violations,
)
from ..rescaling import BulkInterval, RescaleParams, check_lemma9, g_n, s_of_interval
from ..samplers import TWO_PI, Seed
from .membership import (
    cue_membership_conditions,
    cue_membership_definitional,
    gue_membership_conditions,
    gue_membership_definitional,
)

SUITES = ("lemma4", "lemma6", "lemma7", "lemma9", "splitting", "lemma12", "lemma14", "membership")
LEMMA14_INTERVAL = BulkInterval(-1.0, -0.5)


def _rng(seed_root: int, i: int) -> np.random.Generator:
    return Seed(seed_root, i).generator()


# ---------------------------------------------------------------------------
# Instance generators


# Sets carry an expected number of points between MIN_COUNT and MAX_COUNT, so
# hole probabilities stay well inside double precision at every n.
MIN_COUNT, MAX_COUNT = 0.05, 3.0


def _split(rng, free: float, parts: int) -> np.ndarray:
    return np.diff(np.concatenate(([0.0], np.sort(rng.uniform(0.0, free, parts - 1)), [free])))


def random_disjoint_arcs(rng, n: int, count: int = 2) -> list[ArcUnion]:
    """``count`` disjoint arcs in random cyclic positions, sized by expected point count."""
    lengths = np.minimum(rng.uniform(MIN_COUNT, MAX_COUNT, count) * TWO_PI / n, 0.9 * TWO_PI / count)
    gaps = _split(rng, TWO_PI - lengths.sum(), count)
    start = float(rng.uniform(0.0, TWO_PI))
    arcs = []
    for length, gap in zip(lengths, gaps):
        arcs.append(ArcUnion.single(start, float(length)))
        start += float(length + gap)
    return arcs


def random_disjoint_intervals(
    rng, n: int, count: int = 2, lo: float = -1.5, hi: float = 1.5
) -> list[IntervalUnion]:
    """``count`` disjoint intervals in [lo, hi]; lengths assume the density at the origin."""
    lengths = np.minimum(rng.uniform(MIN_COUNT, MAX_COUNT, count) * math.pi / n, 0.9 * (hi - lo) / count)
    gaps = _split(rng, hi - lo - lengths.sum(), count + 1)
    out, pos = [], lo
    for length, gap in zip(lengths, gaps):
        pos += float(gap)
        out.append(IntervalUnion(((pos, pos + float(length)),)))
        pos += float(length)
    return out


def _random_orthogonal(rng, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_sym_pair(rng, dim: int) -> SymOpPair:
    """B with spectrum in (-1, 0.9); A = B + small symmetric noise with eigenvalues capped at 1."""
    q = _random_orthogonal(rng, dim)
    b = (q * rng.uniform(-1.0, 0.9, dim)) @ q.T
    b = 0.5 * (b + b.T)
    noise = rng.standard_normal((dim, dim)) * rng.uniform(0.0, 0.2)
    a = b + 0.5 * (noise + noise.T)
    eigs, vecs = np.linalg.eigh(a)
    a = (vecs * np.minimum(eigs, 1.0)) @ vecs.T
    return SymOpPair(0.5 * (a + a.T), b)


def random_sym_below_one(rng, dim: int) -> np.ndarray:
    q = _random_orthogonal(rng, dim)
    b = (q * rng.uniform(-2.0, 0.999, dim)) @ q.T
    return 0.5 * (b + b.T)


# Share of windows placed inside a chosen gap, so that both outcomes are common.
AIM_PROBABILITY = 0.6


def random_cue_membership_instance(rng, n: int, k: int):
    angles = np.sort(rng.uniform(0.0, TWO_PI, n))
    ys, widths = [], []
    for _ in range(k):
        if rng.random() < AIM_PROBABILITY:
            i = int(rng.integers(n))
            lo = angles[i]
            hi = angles[(i + 1) % n] + (TWO_PI if i == n - 1 else 0.0)
            y = float(rng.uniform(lo, hi))
            ys.append(y % TWO_PI)
            widths.append(max(float(rng.uniform(0.0, 1.2)) * (hi - y), 1e-9))
        else:
            ys.append(float(rng.uniform(0.0, TWO_PI)))
            widths.append(float(rng.uniform(0.01, 1.5)) * TWO_PI / n)
    return angles, np.array(ys), np.array(widths)


def random_gue_membership_instance(rng, n: int, k: int):
    values = np.sort(rng.uniform(-2.0, 2.0, n))
    lo, hi = float(rng.uniform(-2.2, 0.0)), float(rng.uniform(0.0, 2.2))
    ys, widths = [], []
    for _ in range(k):
        y = float(rng.uniform(lo, hi))
        if rng.random() < AIM_PROBABILITY:
            above = values[values > y]
            room = (above[0] if above.size else hi) - y
            widths.append(max(float(rng.uniform(0.0, 1.2)) * room, 1e-9))
        else:
            widths.append(float(rng.uniform(0.01, 1.5)) * 4.0 / n)
        ys.append(y)
    return values, (lo, hi), np.array(ys), np.array(widths)


# ---------------------------------------------------------------------------
# Suites


def suite_lemma4(n, instances, seed_root, ensemble="cue"):
    rows = []
    for i in range(instances):
        rng = _rng(seed_root, i)
        sets = random_disjoint_arcs(rng, n) if ensemble == "cue" else random_disjoint_intervals(rng, n)
        joint, total, holds = negative_correlation(n, sets, ensemble)
        rows.append((i, "joint<=sum", joint, total, holds))
    return rows


def suite_lemma6(n, instances, seed_root, ensemble="cue"):
    rows = []
    for i in range(instances):
        rng = _rng(seed_root, i)
        rep = comparison_bounds(random_sym_pair(rng, int(rng.integers(1, 9))))
        rows.append((i, "lower<=mid", rep.lower, rep.mid, rep.lower <= rep.mid + 1e-10))
        rows.append((i, "mid<=upper", rep.mid, rep.upper, rep.mid <= rep.upper + 1e-10))
        rows.append(
            (i, "trace", rep.trace_bound_lhs, rep.trace_bound_rhs,
             rep.trace_bound_lhs <= rep.trace_bound_rhs + 1e-10)
        )
    return rows


def suite_lemma7(n, instances, seed_root, ensemble="cue"):
    rows = []
    for i in range(instances):
        rng = _rng(seed_root, i)
        lhs, rhs, _ = lowest_eigen_bound(random_sym_below_one(rng, int(rng.integers(1, 9))))
        rows.append((i, "eigen", lhs, rhs, lhs >= rhs - 1e-10))
    return rows


def suite_lemma9(n, instances, seed_root, ensemble="cue"):
    params = RescaleParams(n)
    rows = []
    for i in range(instances):
        rng = _rng(seed_root, i)
        x = float(rng.uniform(-1.0, 1.0))
        g = float(g_n(params, x))
        w_max = min(3.0, 0.999 * math.pi / g)
        w = float(rng.uniform(1.0, w_max))
        rec = check_lemma9(params, x, w)
        rows.append((i, "log-hole", rec.lhs, rec.rhs, rec.holds))
    return rows


def suite_splitting(n, instances, seed_root, ensemble="cue"):
    rows = []
    for i in range(instances):
        rng = _rng(seed_root, i)
        xs = rng.uniform(-1.0, 1.0, 2)
        y0 = float(rng.uniform(0.0, TWO_PI))
        ys = [y0, y0 + math.pi + float(rng.uniform(-1.0, 1.0))]
        ratio, trace = splitting_ratio(n, xs, ys)
        rows.append((i, "ratio<=1", ratio, 1.0, ratio <= 1.0 + 1e-10))
        rows.append((i, "trace", abs(trace), 1e-8, abs(trace) <= 1e-8))
    return rows


def suite_lemma12(n, instances, seed_root, ensemble="cue"):
    rows = []
    ln_n = math.log(n)
    delta = math.sqrt(ln_n) / n
    for i in range(instances):
        rng = _rng(seed_root, i)
        x = float(rng.uniform(-1.5, 1.5))
        rep = cue_gue_hole_gap(n, x, delta)
        rows.append((i, "difference*n*ln(n)", rep.difference * n * ln_n, math.nan, None))
        rows.append(
            (i, "(trace_a+n*delta)*n/ln(n)^1.5", (rep.trace_a + n * delta) * n / ln_n**1.5, math.nan, None)
        )
        rows.append((i, "hs_diff*n/ln(n)^1.5", rep.hs_diff * n / ln_n**1.5, math.nan, None))
        rows.append((i, "hs_a^2", rep.hs_a**2, rep.hs_b**2, None))
    return rows


def lemma14_instance(rng, n: int, interval: BulkInterval = LEMMA14_INTERVAL, eps0=0.5, c0=1.0):
    """One random admissible single-window configuration, or a ValidationError."""
    params = RescaleParams(n)
    s = s_of_interval(interval)
    lo = float(g_n(params, -c0)) / s
    hi = min(float(g_n(params, c0)) / s, eps0 / (2.0 * params.ln_n))
    if not lo < hi:
        raise ValidationError(f"the width window ({lo:.6g}, {hi:.6g}) is empty at n = {n}")
    sep = eps0 / params.ln_n
    for _ in range(1000):
        a = float(rng.uniform(lo, hi))
        y = float(rng.uniform(interval.a + sep, interval.b - sep))
        if not union_hypothesis_violations(n, interval, [y], [a], eps0, c0):
            return [y], [a]
    raise ValidationError(f"no admissible configuration found at n = {n}")


def suite_lemma14(n, instances, seed_root, ensemble="cue"):
    rows = []
    for i in range(instances):
        ys, a_s = lemma14_instance(_rng(seed_root, i), n)
        lhs, rhs, holds = union_hole_lower_bound(n, LEMMA14_INTERVAL, ys, a_s)
        rows.append((i, "gue>=cue-product", lhs, rhs, holds))
    return rows


def suite_membership(n, instances, seed_root, ensemble="cue"):
    rows = []
    for i in range(instances):
        rng = _rng(seed_root, i)
        k = int(rng.integers(1, 4))
        if ensemble == "cue":
            angles, ys, widths = random_cue_membership_instance(rng, n, k)
            d = cue_membership_definitional(angles, ys, widths)
            c = cue_membership_conditions(angles, ys, widths)
        else:
            values, iv, ys, widths = random_gue_membership_instance(rng, n, k)
            d = gue_membership_definitional(values, iv, ys, widths)
            c = gue_membership_conditions(values, iv, ys, widths)
        rows.append((i, "agree", float(d), float(c), d == c))
    return rows


_RUNNERS = {
    "lemma4": suite_lemma4,
    "lemma6": suite_lemma6,
    "lemma7": suite_lemma7,
    "lemma9": suite_lemma9,
    "splitting": suite_splitting,
    "lemma12": suite_lemma12,
    "lemma14": suite_lemma14,
    "membership": suite_membership,
}


def run_suite(name: str, n: int, instances: int, seed_root: int = 0, ensemble: str = "cue"):
    if name not in _RUNNERS:
        raise ValidationError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if int(instances) != instances or instances < 1:
        raise ValidationError("instances must be a positive integer")
    if ensemble not in ("cue", "gue"):
        raise ValidationError(f"ensemble must be 'cue' or 'gue', got {ensemble!r}")
    return _RUNNERS[name](int(n), int(instances), int(seed_root), ensemble)
