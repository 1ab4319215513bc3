"""Independent reference computations used to freeze expected values."""

import math
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy.stats import norm


def _ramp_sq(t):
    return max(t, 0.0) ** 2 / 2.0


def area_below(c, x0, x1, y0, y1):
    """Area of {x + y <= c} within the rectangle [x0, x1] x [y0, y1] (inclusion-exclusion)."""
    return _ramp_sq(c - x0 - y0) - _ramp_sq(c - x1 - y0) - _ramp_sq(c - x0 - y1) + _ramp_sq(c - x1 - y1)


def band_area(box, lo=0.0, hi=1.0):
    """Area of the rectangle lying in the band lo <= x1 + x2 <= hi."""
    (x0, x1), (y0, y1) = box
    return area_below(hi, x0, x1, y0, y1) - area_below(lo, x0, x1, y0, y1)


def rect(box_obj):
    return tuple((iv.lo, iv.hi) for iv in box_obj.intervals)


def apd_band_tpr(apd, lo=0.0, hi=1.0):
    """Expected TPR of an APD for f = x1 + x2 under uniform sampling: area in band / area."""
    total = inside = 0.0
    for b in apd.boxes:
        r = rect(b)
        total += (r[0][1] - r[0][0]) * (r[1][1] - r[1][0])
        inside += band_area(r, lo, hi)
    return inside / total


def noisy_input_band_tpr(apd, sigma, lo=0.0, hi=1.0):
    """Expected TPR for f = x1 + x2 when both inputs get N(0, sigma^2) noise.

    The noisy sum is N(s, 2 sigma^2), so P(in band | x) is a difference of
    normal CDFs; it is integrated over each box with adaptive quadrature.
    """
    scale = sigma * math.sqrt(2.0)

    def p_in(x2, x1):
        s = x1 + x2
        return norm.cdf((hi - s) / scale) - norm.cdf((lo - s) / scale)

    total = num = 0.0
    for b in apd.boxes:
        (x0, x1), (y0, y1) = rect(b)
        val, _ = integrate.dblquad(p_in, x0, x1, y0, y1, epsabs=1e-10, epsrel=1e-10)
        num += val
        total += (x1 - x0) * (y1 - y0)
    return num / total


def gini_split_bruteforce(X, inside):
    """Exhaustive best split by weighted Gini, ties to (feature, threshold) order.

    Thresholds are the distinct values themselves (``x <= v``); returns
    ``(feature, v)`` where ``v`` is the largest value sent left.
    """
    n = len(inside)
    best = None
    for f in range(X.shape[1]):
        values = sorted(set(X[:, f].tolist()))
        for v in values[:-1]:
            left = [i for i in range(n) if X[i, f] <= v]
            right = [i for i in range(n) if X[i, f] > v]
            score = Fraction(0)
            for side in (left, right):
                k = len(side)
                p = sum(bool(inside[i]) for i in side)
                score += Fraction(k, n) * (1 - Fraction(p, k) ** 2 - Fraction(k - p, k) ** 2)
            key = (score, f, v)
            if best is None or key < best:
                best = key
    return None if best is None else (best[1], best[2])


def binomial_se(p, n):
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def grid_values_bruteforce(lo, hi, delta):
    """Enumerate lo + n*delta with exact rationals from the decimal reprs."""
    from decimal import Decimal

    a, d = Decimal(repr(lo)), Decimal(repr(delta))
    out = [lo]
    n = 1
    while a + n * d <= Decimal(repr(hi)):
        out.append(float(a + n * d))
        n += 1
    if not math.isclose(out[-1], hi, rel_tol=0, abs_tol=delta * 1e-9):
        out.append(hi)
    else:
        out[-1] = hi
    return out


def points_in_box_mask(points, box):
    pts = np.asarray(points)
    mask = np.ones(len(pts), dtype=bool)
    for j, iv in enumerate(box.intervals):
        x = pts[:, j]
        mask &= (x > iv.lo) | (iv.lo_closed & (x == iv.lo))
        mask &= (x < iv.hi) | (iv.hi_closed & (x == iv.hi))
    return mask
