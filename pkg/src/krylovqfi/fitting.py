"""Small least-squares helpers shared by the analysis routines."""

import numpy as np


def linear_fit(x, y):
    """Ordinary least squares y = slope * x + intercept.

    Returns (slope, intercept, r_squared).  r_squared is set to 1 for a
    perfectly flat exact fit (zero total variance).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError(f"need two or more paired points, got {x.size}")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot <= 0:
        return float(slope), float(intercept), 1.0
    r2 = 1.0 - float(np.sum(resid**2)) / float(ss_tot)
    return float(slope), float(intercept), float(r2)


def prefix_linear_scan(y, x=None, min_points=8, r2_min=0.99,
                       require_positive_slope=True):
    """Longest prefix of (x, y) on which a straight line fits well.

    Scans all prefixes y[:k] for k >= min_points and keeps the largest k
    whose least-squares line reaches r2_min (and positive slope when
    required).  Running sums make the scan O(len(y)).

    Returns (k, slope, r_squared) for the winning prefix length k, or
    None when no prefix qualifies.
    """
    y = np.asarray(y, dtype=np.float64)
    if x is None:
        x = np.arange(1.0, y.size + 1.0)
    else:
        x = np.asarray(x, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    if y.size < min_points:
        return None

    c = np.arange(1.0, y.size + 1.0)
    sx = np.cumsum(x)
    sy = np.cumsum(y)
    sxx = np.cumsum(x * x)
    sxy = np.cumsum(x * y)
    syy = np.cumsum(y * y)
    with np.errstate(divide="ignore", invalid="ignore"):
        vxx = sxx - sx * sx / c
        vxy = sxy - sx * sy / c
        vyy = syy - sy * sy / c
        slope = vxy / vxx
        ss_res = np.maximum(vyy - slope * vxy, 0.0)
        r2 = np.where(vyy > 0, 1.0 - ss_res / np.maximum(vyy, 1e-300), 1.0)
    ok = np.isfinite(slope) & (r2 >= r2_min) & (c >= min_points)
    if require_positive_slope:
        ok &= slope > 0
    if not np.any(ok):
        return None
    k = int(np.max(np.nonzero(ok)[0])) + 1
    return k, float(slope[k - 1]), float(r2[k - 1])


def refine_peak_quadratic(t, f, index, half_width=2):
    """Parabolic refinement of a grid maximum.

    Fits a quadratic to the points around the given grid index and returns
    (t_peak, f_peak) of the vertex when it is concave and falls inside the
    window; otherwise returns the grid values unchanged.
    """
    lo = max(0, index - half_width)
    hi = min(len(t), index + half_width + 1)
    if hi - lo < 3:
        return float(t[index]), float(f[index])
    coef = np.polyfit(t[lo:hi], f[lo:hi], 2)
    if coef[0] >= 0:
        return float(t[index]), float(f[index])
    tv = -coef[1] / (2 * coef[0])
    if not (t[lo] <= tv <= t[hi - 1]):
        return float(t[index]), float(f[index])
    return float(tv), float(np.polyval(coef, tv))
