"""Membership of a point configuration in the set of admissible gap positions.

For widths a_1..a_k, a tuple (y_1, ..., y_k) is admissible when each window
[y_j, y_j + a_j] fits strictly inside its own gap of the spectrum, with
distinct gaps for distinct j. The definitional test locates the gaps
directly; the conditional test checks the equivalent list of conditions
(disjoint windows, no eigenvalue in any window, eigenvalues separating the
windows).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ValidationError
from ..samplers import TWO_PI, CueSpectrum, GueSpectrum, _interval_bounds


def _ccw(frm, to):
    """Counterclockwise angular distance from ``frm`` to ``to`` in [0, 2pi)."""
    return np.mod(np.asarray(to, dtype=float) - frm, TWO_PI)


# ---------------------------------------------------------------------------
# CUE


def cue_membership_definitional(angles, y_list, a_list) -> bool:
    theta = np.asarray(angles, dtype=float)
    n = theta.size
    used = set()
    for y, a in zip(y_list, a_list):
        y = float(y) % TWO_PI
        # Gap i runs from theta[i] to theta[i + 1] (cyclically); find the one holding y.
        i = int(np.searchsorted(theta, y, side="left")) - 1
        if i < 0:
            i = n - 1
        if y == theta[(i + 1) % n]:
            return False
        start = theta[i]
        length = float(_ccw(start, theta[(i + 1) % n])) if n > 1 else TWO_PI
        offset = float(_ccw(start, y))
        if not (offset > 0.0 and offset + a < length):
            return False
        if i in used:
            return False
        used.add(i)
    return True


def cue_membership_conditions(angles, y_list, a_list) -> bool:
    theta = np.asarray(angles, dtype=float)
    ys = [float(y) % TWO_PI for y in y_list]
    a_s = [float(a) for a in a_list]
    k = len(ys)
    # (i) closed windows pairwise disjoint
    for l in range(k):
        for j in range(l + 1, k):
            d = float(_ccw(ys[l], ys[j]))
            if not (d > a_s[l] and TWO_PI - d > a_s[j]):
                return False
    # (ii) no eigenangle inside a closed window
    for y, a in zip(ys, a_s):
        if np.any(_ccw(y, theta) <= a):
            return False
    # (iii) eigenangles strictly between and outside every ordered pair
    for p in range(k):
        for q in range(k):
            if ys[p] < ys[q]:
                between = np.any((theta > ys[p]) & (theta < ys[q]))
                outside = np.any((theta < ys[p]) | (theta > ys[q]))
                if not (between and outside):
                    return False
    return True


# ---------------------------------------------------------------------------
# GUE


def gue_membership_definitional(values, interval, y_list, a_list) -> bool:
    lam = np.asarray(values, dtype=float)
    lo, hi = interval
    used = set()
    for y, a in zip(y_list, a_list):
        y, a = float(y), float(a)
        i = int(np.searchsorted(lam, y, side="left")) - 1
        if i < 0 or i + 1 >= lam.size:
            return False
        if not (lo <= lam[i] and lam[i + 1] <= hi):
            return False
        if not (lam[i] < y and y + a < lam[i + 1]):
            return False
        if i in used:
            return False
        used.add(i)
    return True


def gue_membership_conditions(values, interval, y_list, a_list) -> bool:
    lam = np.asarray(values, dtype=float)
    lo, hi = interval
    ys = [float(y) for y in y_list]
    a_s = [float(a) for a in a_list]
    k = len(ys)
    for l in range(k):
        for j in range(l + 1, k):
            if not (ys[l] + a_s[l] < ys[j] or ys[j] + a_s[j] < ys[l]):
                return False
    for y, a in zip(ys, a_s):
        if np.any((lam >= y) & (lam <= y + a)):
            return False
    ext = [lo] + ys + [hi]
    for p in range(k + 2):
        for q in range(k + 2):
            if ext[p] < ext[q] and not np.any((lam >= ext[p]) & (lam <= ext[q])):
                return False
    return True


def sigma_membership_crosscheck(spectrum, y_list, a_list, ensemble: str, interval=None) -> bool:
    """True when the definitional and the conditional membership tests agree."""
    if len(y_list) != len(a_list) or not len(y_list):
        raise ValidationError("y_list and a_list must be nonempty and of equal length")
    if any(not (0.0 < float(a) and math.isfinite(float(a))) for a in a_list):
        raise ValidationError("widths must be positive")
    if ensemble == "cue":
        angles = spectrum.angles if isinstance(spectrum, CueSpectrum) else spectrum
        return cue_membership_definitional(angles, y_list, a_list) == cue_membership_conditions(
            angles, y_list, a_list
        )
    if ensemble == "gue":
        if interval is None:
            raise ValidationError("the GUE check needs an interval")
        lo, hi = _interval_bounds(interval)
        if any(not lo < float(y) < hi for y in y_list):
            raise ValidationError("every y_j must lie inside the interval")
        values = spectrum.values if isinstance(spectrum, GueSpectrum) else spectrum
        return gue_membership_definitional(
            values, (lo, hi), y_list, a_list
        ) == gue_membership_conditions(values, (lo, hi), y_list, a_list)
    raise ValidationError(f"unknown ensemble {ensemble!r}")
