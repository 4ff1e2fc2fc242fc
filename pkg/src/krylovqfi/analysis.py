"""Headline diagnostics: optimal interrogation time, linear region of the
hopping amplitudes, coverage check, depth witness, and size scaling."""

import math
from dataclasses import dataclass, field

import numpy as np

from .chain_dynamics import krylov_complexity
from .fitting import linear_fit, prefix_linear_scan, refine_peak_quadratic


@dataclass
class TstarResult:
    t_star: float
    f_star: float
    boundary: bool  # True when no interior maximum existed
    index: int  # grid index of the discrete maximum


@dataclass
class LinearRegion:
    n_l: int
    alpha: float
    r_squared: float


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


@dataclass
class PropositionReport:
    """Coverage of the wavefunction by the linear region at t_star.

    The three logarithms are reported side by side; the framework expects
    t_star ~ log complexity <~ log n_l <~ log N without sharp constants,
    so no inequality among them is asserted here.
    """

    nu: float
    nu_ratio: float | None
    nu_pass: bool | None
    tail_mass: float | None
    tail_pass: bool | None
    covered_mass: float | None
    t_star: float
    complexity_at_tstar: float | None
    log_complexity: float | None
    log_n_l: float | None
    log_n_particles: float


@dataclass
class QfiTrace:
    """One model's full time-resolved result set with scalar diagnostics."""

    t_grid: np.ndarray
    f_exact: np.ndarray
    f_reconstructed: np.ndarray
    f_variant: np.ndarray
    leak_flags: np.ndarray
    complexity: np.ndarray
    xi: np.ndarray
    n_particles: int
    t_star: float
    f_star: float
    tstar_boundary: bool
    n_star: int | None
    n_l: int | None
    alpha: float | None
    linear_r2: float | None
    nu_ratio: float | None
    depth_bound: int
    growth_rate: float | None = field(default=None)
    growth_r2: float | None = field(default=None)


def detect_tstar(t, f):
    """First interior maximum of f over t, quadratically refined.

    A discrete interior maximum is a point strictly above its left
    neighbor and at least as high as its right one.  When the trace is
    monotone (no interior maximum), the boundary flag is set and the
    global maximum is returned unrefined.
    """
    t = np.asarray(t, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if t.size < 3 or t.size != f.size:
        raise ValueError("need at least 3 aligned grid points")
    idx = None
    for i in range(1, t.size - 1):
        if f[i - 1] < f[i] >= f[i + 1]:
            idx = i
            break
    if idx is None:
        j = int(np.argmax(f))
        return TstarResult(t_star=float(t[j]), f_star=float(f[j]),
                           boundary=True, index=j)
    ts, fs = refine_peak_quadratic(t, f, idx)
    return TstarResult(t_star=ts, f_star=fs, boundary=False, index=idx)


def linear_region(b, r2_min=0.99, min_points=8):
    """Largest n with an R^2-qualified positive-slope line through the
    amplitudes b_1..b_n.  Returns None when no such stretch exists."""
    hit = prefix_linear_scan(np.asarray(b, dtype=np.float64),
                             min_points=min_points, r2_min=r2_min)
    if hit is None:
        return None
    return LinearRegion(n_l=hit[0], alpha=hit[1], r_squared=hit[2])


def depth_witness(f_star, n_particles):
    """Entanglement-depth lower bound implied by the Fisher density,
    ceil(f_star / N) clamped to [1, N]."""
    if f_star < 0:
        raise ValueError(f"f_star must be non-negative, got {f_star}")
    bound = math.ceil(f_star / n_particles - 1e-12)
    return int(min(max(bound, 1), n_particles))


def proposition_check(trace, wf, nu=4.0):
    """Check that the wavefunction at t_star lives inside the linear
    region: site ratio n_l / n_star >= nu and tail mass beyond n_l below
    1e-3.  Undetected inputs propagate as None fields."""
    k = int(np.argmin(np.abs(wf.t_grid - trace.t_star)))
    p = wf.phi[k] ** 2
    comp = float(krylov_complexity(wf)[k])
    nu_ratio = nu_pass = None
    if trace.n_l is not None and trace.n_star is not None and trace.n_star > 0:
        nu_ratio = trace.n_l / trace.n_star
        nu_pass = bool(nu_ratio >= nu)
    tail = tail_pass = covered = None
    log_nl = None
    if trace.n_l is not None:
        tail = float(np.sum(p[trace.n_l + 1:]))
        covered = float(np.sum(p[:trace.n_l + 1]))
        tail_pass = bool(tail <= 1e-3)
        log_nl = math.log(trace.n_l)
    return PropositionReport(
        nu=nu, nu_ratio=nu_ratio, nu_pass=nu_pass,
        tail_mass=tail, tail_pass=tail_pass, covered_mass=covered,
        t_star=trace.t_star,
        complexity_at_tstar=comp,
        log_complexity=math.log(comp) if comp > 0 else None,
        log_n_l=log_nl,
        log_n_particles=math.log(trace.n_particles),
    )


def scaling_fit(n_values, tstar_values):
    """Least squares of t_star against ln N over a size sweep."""
    n_values = np.asarray(n_values, dtype=np.float64)
    tstar_values = np.asarray(tstar_values, dtype=np.float64)
    if n_values.size < 4:
        raise ValueError(f"need at least 4 sweep points, got {n_values.size}")
    if np.unique(n_values).size != n_values.size:
        raise ValueError("sweep sizes must be distinct")
    slope, intercept, r2 = linear_fit(np.log(n_values), tstar_values)
    return ScalingFit(slope=slope, intercept=intercept, r_squared=r2,
                      n_points=int(n_values.size))


def early_growth_fit(t, f, n_particles, min_points=5):
    """Exponential-growth-rate fit over the early window 2N <= F <= 0.1 max.

    Returns (rate, r_squared) from log F = rate * t + const, or None when
    no usable window exists.  The framework links this rate to twice the
    hopping slope alpha.  When the peak sits low enough that 0.1 max does
    not clear 2N (small systems), the ceiling is lifted to 0.25 max once
    before giving up.
    """
    f = np.asarray(f, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    lo = 2.0 * n_particles
    for ceiling in (0.1, 0.25):
        hi = ceiling * np.max(f)
        mask = (f >= lo) & (f <= hi) & (t > 0)
        if np.count_nonzero(mask) >= min_points:
            rate, _, r2 = linear_fit(t[mask], np.log(f[mask]))
            return float(rate), float(r2)
    return None
