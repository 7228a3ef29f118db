"""Exact samplers for CUE eigenangles and GUE eigenvalues, and gap extraction.

CUE(n) is the projection determinantal process with kernel
K(x, y) = Phi(x) . Phi(y), where Phi is the real orthonormal basis of
trigonometric functions with frequencies k - (n-1)/2, k < n. Points are drawn
one at a time from the conditional density
(K(x, x) - sum_{i<=j} e_i(x)^2) / (n - j) by rejection from the uniform
envelope n / (2 pi (n - j)).

GUE(n) uses the beta = 2 tridiagonal model scaled by 1/sqrt(n), which has
joint density proportional to exp(-n sum lambda^2 / 2) times the squared
Vandermonde.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, lapack

from .errors import NumericalError, RejectionStallError, ValidationError

TWO_PI = 2.0 * math.pi
MAX_CUE_N = 2048
MAX_GUE_N = 65536
MAX_PROPOSALS_PER_POINT = 1_000_000
_U64 = 2**64

# Points accepted between two deflations of the complement basis.
_BLOCK = 48
# Exponential table: frequencies are split as coarse * _PHASE_BLOCK + fine.
_PHASE_BLOCK = 32


@dataclass(frozen=True)
class Seed:
    """Root seed plus trial index; each pair names an independent PCG64 stream."""

    root: int
    trial_index: int = 0

    def __post_init__(self):
        for name in ("root", "trial_index"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < _U64:
                raise ValidationError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.root), spawn_key=(int(self.trial_index),))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class CueSpectrum:
    """Sorted eigenangles in [0, 2 pi)."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise ValidationError("a CUE spectrum needs at least one angle")
        if np.any(a < 0.0) or np.any(a >= TWO_PI):
            raise ValidationError("angles must lie in [0, 2pi)")
        if np.any(np.diff(a) <= 0.0):
            raise ValidationError("angles must be strictly increasing")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def n(self) -> int:
        return self.angles.size


@dataclass(frozen=True)
class GueSpectrum:
    """Sorted eigenvalues."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("a GUE spectrum needs at least one eigenvalue")
        if np.any(np.diff(v) <= 0.0):
            raise ValidationError("eigenvalues must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class GapList:
    """Gaps sorted in decreasing order."""

    gaps: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gaps, dtype=float)
        if g.ndim != 1:
            raise ValidationError("gaps must be one-dimensional")
        if np.any(g <= 0.0):
            raise ValidationError("gaps must be positive")
        if np.any(np.diff(g) > 0.0):
            raise ValidationError("gaps must be decreasing")
        g.setflags(write=False)
        object.__setattr__(self, "gaps", g)

    def __len__(self) -> int:
        return self.gaps.size


# ---------------------------------------------------------------------------
# CUE


def cue_features(n: int, x) -> np.ndarray:
    """Real orthonormal trigonometric basis of the CUE(n) space at points x, shape (n, len(x)).

    Rows are 1/sqrt(2 pi) (n odd only), cos(f x)/sqrt(pi), sin(f x)/sqrt(pi) over
    the positive frequencies f. Exponentials are tabulated as the product of a
    coarse and a fine phase to avoid n transcendental calls per point.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    half = n // 2
    f0 = 1.0 if n % 2 else 0.5
    out = np.empty((n, x.size))
    scale = 1.0 / math.sqrt(math.pi)
    if half:
        n_coarse = -(-half // _PHASE_BLOCK)
        coarse = np.exp(1j * np.outer(f0 + _PHASE_BLOCK * np.arange(n_coarse), x))
        fine = np.exp(1j * np.outer(np.arange(_PHASE_BLOCK), x))
        phase = (coarse[:, None, :] * fine[None, :, :]).reshape(-1, x.size)[:half]
    else:
        phase = np.empty((0, x.size), dtype=complex)
    if n % 2:
        out[0] = 1.0 / math.sqrt(TWO_PI)
        np.multiply(phase.real, scale, out=out[1 : half + 1])
        np.multiply(phase.imag, scale, out=out[half + 1 :])
    else:
        np.multiply(phase.real, scale, out=out[:half])
        np.multiply(phase.imag, scale, out=out[half:])
    return out


def sample_cue(n: int, seed: Seed) -> CueSpectrum:
    """Draw CUE(n) eigenangles by sequential projection-DPP sampling.

    The orthogonal complement of the accepted feature vectors is kept as an
    orthonormal basis U (deflated by Householder reflections every few
    points); inside a block the accepted directions W are subtracted
    explicitly, so the conditional intensity at x is |U^T Phi(x)|^2 -
    |W^T U^T Phi(x)|^2. Proposals are uniform on the circle and are screened
    in batches.
    """
    if int(n) != n or not 1 <= n <= MAX_CUE_N:
        raise ValidationError(f"n must be an integer in [1, {MAX_CUE_N}], got {n}")
    rng = seed.generator()
    top = n / TWO_PI
    points = np.empty(n)
    count = 0
    basis = None  # None stands for the identity
    rank = n
    while count < n:
        remaining = n - count
        block = min(_BLOCK, remaining, max(1, rank // 2))
        w = np.empty((rank, block))
        nb = 0
        misses = 0
        while nb < block:
            todo = block - nb
            batch = int(math.ceil(1.3 * todo * n / (remaining - nb))) + 4
            xs = rng.uniform(0.0, TWO_PI, batch)
            thresholds = rng.uniform(0.0, 1.0, batch) * top
            feats = cue_features(n, xs)
            coords = feats if basis is None else basis.T @ feats
            q = np.einsum("ij,ij->j", coords, coords)
            if nb:
                t = w[:, :nb].T @ coords
                q -= np.einsum("ij,ij->j", t, t)
            start = 0
            while nb < block:
                hits = np.flatnonzero(thresholds[start:] < q[start:])
                if hits.size == 0:
                    misses += batch - start
                    break
                i = start + int(hits[0])
                misses = 0
                c = coords[:, i]
                v = c - w[:, :nb] @ (w[:, :nb].T @ c) if nb else c.copy()
                v /= math.sqrt(float(v @ v))
                w[:, nb] = v
                nb += 1
                points[count] = xs[i]
                count += 1
                start = i + 1
                if start < batch:
                    proj = v @ coords[:, start:]
                    q[start:] -= proj * proj
            if misses > MAX_PROPOSALS_PER_POINT:
                raise RejectionStallError(
                    f"no acceptance after {misses} proposals at point {count + 1} of {n}"
                )
        if count < n:
            qr, tau, _, info = lapack.dgeqrf(w[:, :nb])
            if info != 0:
                raise NumericalError(f"QR of the accepted directions failed (info={info})")
            current = np.eye(n) if basis is None else basis
            rotated, _, info = lapack.dormqr("R", "N", qr, tau, current, max(1, 64 * n))
            if info != 0:
                raise NumericalError(f"applying the Householder reflections failed (info={info})")
            basis = rotated[:, nb:]
            rank = basis.shape[1]
    return CueSpectrum(np.sort(np.mod(points, TWO_PI)))


def extract_gaps_cue(spectrum: CueSpectrum) -> GapList:
    """All n circular gaps (including the wraparound gap), decreasing."""
    a = spectrum.angles
    gaps = np.empty(a.size)
    gaps[:-1] = np.diff(a)
    gaps[-1] = TWO_PI - a[-1] + a[0]
    return GapList(np.sort(gaps)[::-1])


# ---------------------------------------------------------------------------
# GUE


def sample_gue(n: int, seed: Seed) -> GueSpectrum:
    """Draw GUE(n) eigenvalues from the scaled tridiagonal model."""
    if int(n) != n or not 1 <= n <= MAX_GUE_N:
        raise ValidationError(f"n must be an integer in [1, {MAX_GUE_N}], got {n}")
    rng = seed.generator()
    diag = rng.standard_normal(n)
    # chi_{2m}/sqrt(2) is the square root of a Gamma(m, 1) variate.
    off = np.sqrt(rng.standard_gamma(np.arange(n - 1, 0, -1, dtype=float)))
    if n == 1:
        values = diag
    else:
        try:
            values = eigvalsh_tridiagonal(diag, off, lapack_driver="sterf")
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"tridiagonal eigensolver did not converge: {exc}") from exc
    return GueSpectrum(np.sort(values) / math.sqrt(n))


def extract_gaps_gue(spectrum: GueSpectrum, interval) -> GapList:
    """Consecutive spacings whose two endpoints both lie in [a, b], decreasing."""
    lo, hi = _interval_bounds(interval)
    v = spectrum.values
    inside = v[(v >= lo) & (v <= hi)]
    if inside.size < 2:
        return GapList(np.empty(0))
    return GapList(np.sort(np.diff(inside))[::-1])


def _interval_bounds(interval) -> tuple[float, float]:
    if hasattr(interval, "a"):
        return float(interval.a), float(interval.b)
    lo, hi = interval
    return float(lo), float(hi)
