"""Monte Carlo experiments for the largest gaps and their Poisson structure."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..errors import NumericalError, ValidationError
from ..holeprob import estimate_c0, log_hole_cue
from ..rescaling import (
    BulkInterval,
    GumbelLaw,
    RescaleParams,
    f_n,
    gumbel_k_cdf,
    tau_from_gap_cue,
    tau_from_gap_gue,
)
from ..samplers import (
    Seed,
    extract_gaps_cue,
    extract_gaps_gue,
    sample_cue,
    sample_gue,
)
from .parallel import map_trials

# Default grid for the in-repo estimate of the expansion constant.
C0_ALPHAS = (0.4, 0.6, 0.8)
C0_N_GRID = (50, 100, 200, 400, 800)
# Largest gaps retained per trial; statistics that need more raise.
KEEP_GAPS = 64
_U64 = 2**64


@functools.lru_cache(maxsize=None)
def default_c0(alphas: tuple = C0_ALPHAS, n_grid: tuple = C0_N_GRID) -> float:
    return estimate_c0(alphas, n_grid).c0_hat


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: str
    n: int
    trials: int
    k: int = 1
    interval: BulkInterval | None = None
    seed_root: int = 0
    x_grid: tuple = ()
    output_path: str | None = None

    def __post_init__(self):
        if self.ensemble not in ("cue", "gue"):
            raise ValidationError(f"ensemble must be 'cue' or 'gue', got {self.ensemble!r}")
        for name in ("n", "trials", "k"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v}")
        if self.ensemble == "gue" and self.interval is None:
            raise ValidationError("the GUE ensemble requires an interval")
        if self.ensemble == "cue" and self.interval is not None:
            raise ValidationError("an interval only applies to the GUE ensemble")
        if int(self.seed_root) != self.seed_root or not 0 <= self.seed_root < _U64:
            raise ValidationError("seed_root must be a 64-bit unsigned integer")
        object.__setattr__(self, "x_grid", tuple(float(x) for x in self.x_grid))

    def to_dict(self) -> dict:
        return {
            "ensemble": self.ensemble,
            "n": self.n,
            "trials": self.trials,
            "k": self.k,
            "interval": None if self.interval is None else [self.interval.a, self.interval.b],
            "seed_root": self.seed_root,
            "x_grid": list(self.x_grid),
            "output_path": self.output_path,
        }


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Finite samples of the rescaled k-th largest gap against a Gumbel-k reference."""

    samples: np.ndarray
    mean: float
    variance: float
    ks_distance_vs_reference: float
    ks_pvalue: float
    reference: GumbelLaw
    n_missing: int = 0

    @property
    def trials(self) -> int:
        return self.samples.size + self.n_missing


@dataclass(frozen=True)
class PoissonCheckReport:
    empirical_factorial_moment: float
    standard_error: float
    exact_target: float
    asymptotic_target: float
    empirical_count_histogram: dict
    poisson_reference: dict
    tv_distance: float
    trials: int
    x_grid: tuple = field(default=())

    @property
    def z_score(self) -> float:
        if self.standard_error == 0.0:
            return 0.0 if self.empirical_factorial_moment == self.exact_target else math.inf
        return (self.empirical_factorial_moment - self.exact_target) / self.standard_error


# ---------------------------------------------------------------------------
# Per-trial work (module level so it can run in worker processes)


def _trial_gaps(payload, index: int) -> np.ndarray:
    """Largest KEEP_GAPS raw gaps of one trial, NaN padded."""
    ensemble, n, seed_root, interval = payload
    seed = Seed(seed_root, index)
    if ensemble == "cue":
        gaps = extract_gaps_cue(sample_cue(n, seed)).gaps
    else:
        gaps = extract_gaps_gue(sample_gue(n, seed), interval).gaps
    out = np.full(KEEP_GAPS, np.nan)
    m = min(KEEP_GAPS, gaps.size)
    out[:m] = gaps[:m]
    return out


def sample_top_gaps(
    ensemble: str, n: int, trials: int, seed_root: int, interval=None, workers: int = 1
) -> np.ndarray:
    """Array (trials, KEEP_GAPS) of the largest raw gaps, NaN where a trial has fewer."""
    iv = None if interval is None else (float(interval.a), float(interval.b))
    rows = map_trials(_trial_gaps, (ensemble, int(n), int(seed_root), iv), int(trials), workers)
    return np.vstack(rows)


def _taus(config: ExperimentConfig, gaps: np.ndarray) -> np.ndarray:
    params = RescaleParams(config.n)
    if config.ensemble == "cue":
        return tau_from_gap_cue(params, gaps)
    return tau_from_gap_gue(params, gaps, config.interval)


def reference_law(config: ExperimentConfig, c0_hat: float) -> GumbelLaw:
    params = RescaleParams(config.n, c0_hat)
    loc = params.c1 if config.ensemble == "cue" else params.c2(config.interval)
    return GumbelLaw(loc, config.k)


# ---------------------------------------------------------------------------
# Experiments


def gumbel_from_gaps(config: ExperimentConfig, gaps: np.ndarray, c0_hat: float) -> EmpiricalDistribution:
    """Statistics of the rescaled k-th largest gap from precomputed per-trial gaps."""
    if config.k > gaps.shape[1]:
        raise ValidationError(f"k = {config.k} exceeds the {gaps.shape[1]} retained gaps")
    kth = gaps[:, config.k - 1]
    finite = kth[np.isfinite(kth)]
    taus = np.sort(_taus(config, finite))
    law = reference_law(config, c0_hat)
    if taus.size:
        ks = stats.kstest(taus, lambda x: gumbel_k_cdf(law, x))
        ks_stat, ks_p = float(ks.statistic), float(ks.pvalue)
        mean = float(np.mean(taus))
        var = float(np.var(taus, ddof=1)) if taus.size > 1 else math.nan
    else:
        ks_stat, ks_p, mean, var = 1.0, 0.0, math.nan, math.nan
    return EmpiricalDistribution(
        samples=taus,
        mean=mean,
        variance=var,
        ks_distance_vs_reference=ks_stat,
        ks_pvalue=ks_p,
        reference=law,
        n_missing=int(kth.size - finite.size),
    )


def run_gumbel(config: ExperimentConfig, c0_hat: float | None = None, workers: int = 1) -> EmpiricalDistribution:
    """Sample, rescale the k-th largest gap of every trial and compare with the Gumbel-k law.

    Trials with fewer than k qualifying gaps count as tau = -inf: they are
    reported in ``n_missing`` and left out of the moments and the KS test.
    """
    if c0_hat is None:
        c0_hat = default_c0()
    gaps = sample_top_gaps(
        config.ensemble, config.n, config.trials, config.seed_root, config.interval, workers
    )
    return gumbel_from_gaps(config, gaps, c0_hat)


def _distinct_product_sum(parts: np.ndarray) -> float:
    """sum over distinct index tuples of prod_j parts[j, i_j] (parts is k x m, nonnegative)."""
    k = parts.shape[0]
    if k == 1:
        return float(parts[0].sum())
    active = np.flatnonzero(np.any(parts > 0.0, axis=0))
    total = 0.0
    for idx in itertools.permutations(active.tolist(), k):
        prod = 1.0
        for j, i in enumerate(idx):
            prod *= parts[j, i]
            if prod == 0.0:
                break
        total += prod
    return total


def _poisson_tv(counts: np.ndarray, mean: float) -> tuple[dict, dict, float]:
    values, freq = np.unique(counts, return_counts=True)
    hist = {int(v): float(f) / counts.size for v, f in zip(values, freq)}
    top = int(max(values.max(), stats.poisson.ppf(1.0 - 1e-12, mean)))
    support = np.arange(top + 1)
    pmf = stats.poisson.pmf(support, mean)
    ref = {int(v): float(p) for v, p in zip(support, pmf)}
    emp = np.array([hist.get(int(v), 0.0) for v in support])
    tail = float(stats.poisson.sf(top, mean))
    tv = 0.5 * (float(np.abs(emp - pmf).sum()) + tail)
    return hist, ref, tv


def poisson_from_gaps(
    config: ExperimentConfig, gaps: np.ndarray, x_grid, c0_hat: float
) -> PoissonCheckReport:
    """Factorial-moment and count checks from precomputed per-trial CUE gaps."""
    x_grid = tuple(float(x) for x in x_grid)
    if config.ensemble != "cue":
        raise ValidationError("the factorial-moment check is defined for the CUE ensemble")
    if not x_grid:
        raise ValidationError("x_grid must contain at least one point")
    if len(x_grid) != config.k:
        raise ValidationError(f"k = {config.k} must equal the number of thresholds {len(x_grid)}")
    n = config.n
    params = RescaleParams(n, c0_hat)
    taus = _taus(config, gaps)  # NaN padding stays NaN
    x_min = min(x_grid)
    retained_all = np.all(np.isfinite(gaps), axis=1)
    if n > gaps.shape[1] and np.any(retained_all & (taus[:, -1] > x_min)):
        raise NumericalError("retained gaps do not reach below the smallest threshold")
    per_trial = np.empty(gaps.shape[0])
    xs = np.array(x_grid)[:, None]
    for t in range(gaps.shape[0]):
        row = taus[t][np.isfinite(taus[t])]
        per_trial[t] = _distinct_product_sum(np.clip(row[None, :] - xs, 0.0, None))
    mean = float(per_trial.mean())
    se = float(per_trial.std(ddof=1) / math.sqrt(per_trial.size)) if per_trial.size > 1 else math.nan
    k = len(x_grid)
    if k == 1:
        a = float(f_n(params, x_grid[0]))
        exact = (n / 4.0) * params.sqrt_two_ln_n * 2.0 * math.pi * math.exp(
            log_hole_cue(n, a / 2.0).log_prob
        )
    else:
        exact = math.nan
    asymptotic = (2.0 * math.pi) ** k * math.prod(math.exp(c0_hat - x) / 4.0 for x in x_grid)
    counts = np.sum(np.nan_to_num(taus, nan=-np.inf) > x_grid[0], axis=1)
    hist, ref, tv = _poisson_tv(counts, math.exp(params.c1 - x_grid[0]))
    return PoissonCheckReport(
        empirical_factorial_moment=mean,
        standard_error=se,
        exact_target=exact,
        asymptotic_target=asymptotic,
        empirical_count_histogram=hist,
        poisson_reference=ref,
        tv_distance=tv,
        trials=int(per_trial.size),
        x_grid=x_grid,
    )


def poisson_factorial_check(
    config: ExperimentConfig, x_grid=None, c0_hat: float | None = None, workers: int = 1
) -> PoissonCheckReport:
    """E sum over distinct tuples of prod_j (tau_{i_j} - x_j)_+ and the exceedance counts.

    For one threshold the exact finite-n value is
    (n/4) sqrt(2 ln n) 2 pi D_n(F_n(x)/2), which follows from rotation
    invariance; the asymptotic target is (2 pi)^k prod_j e^{c0 - x_j}/4. The
    number of rescaled gaps above x_grid[0] is compared with
    Poisson(e^{c1 - x}) in total variation.
    """
    if x_grid is None:
        x_grid = config.x_grid
    if c0_hat is None:
        c0_hat = default_c0()
    gaps = sample_top_gaps(config.ensemble, config.n, config.trials, config.seed_root, None, workers)
    return poisson_from_gaps(config, gaps, x_grid, c0_hat)
