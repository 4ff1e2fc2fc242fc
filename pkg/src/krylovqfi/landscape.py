"""Correlation landscape of the chain operators in the initial state, and
the Fisher-information reconstructions built on it.

For a pure initial state the Fisher information of the evolved probe is
four times its variance, and expanding the Heisenberg operator on the
chain basis turns that variance into a quadratic form:

    F(t) = 4 c_norm^2 * sum_{m,n} phi_m(t) phi_n(t) Corr(m, n),
    Corr(m, n) = Re <psi| O_m O_n |psi> - <O_m><O_n>.

Corr is the landscape: a real symmetric positive semidefinite matrix that
encodes everything the initial state contributes.  A banded average of it
(the stripe profile) gives a cheaper one-dimensional variant of the same
reconstruction.
"""

from dataclasses import dataclass, field

import numpy as np

from .fitting import prefix_linear_scan
from .spin_algebra import check_state


@dataclass
class CorrelationLandscape:
    """Symmetrized covariance matrix of the chain operators.

    corr : (M+1, M+1) real symmetric
    means : (M+1,) first moments <O_n>
    c_norm : seed norm carried along for reconstruction prefactors
    stripe_width : band width used by stripe profiles derived from this
    n_star : chain index of the dominant stripe weight, set by
        stripe_profile once computed
    """

    corr: np.ndarray
    means: np.ndarray
    c_norm: float
    stripe_width: int
    n_star: int | None = field(default=None)


@dataclass
class StripeProfile:
    """Banded row sums of the landscape.

    f : (M+1,) accumulated weight of the band of width stripe_width left
        of the diagonal, plus the diagonal itself
    f_bar : (M,) two-site averages (f_n + f_{n+1}) / 2
    n_c : length of the initial linear rise of f, or None if undetected
    rise_slope, rise_r2 : fit over that initial stretch
    """

    f: np.ndarray
    f_bar: np.ndarray
    stripe_width: int
    n_c: int | None
    rise_slope: float | None
    rise_r2: float | None


def correlation_landscape(kd, psi0, stripe_width=10):
    """Build the landscape of a decomposition in the given initial state.

    The quadratic cost in the chain length comes from one Gram matrix of
    the vectors O_n |psi0>; no operator products are ever formed.
    """
    check_state(psi0, dim=kd.dim_hilbert)
    if stripe_width < 1:
        raise ValueError(f"stripe_width must be >= 1, got {stripe_width}")
    v = kd.apply_to_state(psi0)
    means = np.real(v @ psi0.conj())
    g = np.real(v.conj() @ v.T)
    corr = g - np.outer(means, means)
    corr = (corr + corr.T) / 2
    return CorrelationLandscape(
        corr=corr, means=means, c_norm=kd.c_norm, stripe_width=int(stripe_width),
    )


def qfi_reconstruct(wf, cl):
    """Fisher information from the chain amplitudes and the landscape.

    Times flagged for leakage in wf are still computed; callers should
    treat them through wf.leak_flags.
    """
    m1 = cl.corr.shape[0]
    if wf.n_sites != m1:
        raise ValueError(
            f"chain length mismatch: wavefunction has {wf.n_sites} sites, "
            f"landscape has {m1}"
        )
    quad = np.einsum("tm,mn,tn->t", wf.phi, cl.corr, wf.phi, optimize=True)
    return 4.0 * cl.c_norm**2 * quad


def stripe_profile(cl, min_points=5, r2_min=0.99):
    """Collapse the landscape to banded weights f_n and detect both the
    initial linear rise (length n_c) and the dominant site n_star."""
    corr = cl.corr
    m1 = corr.shape[0]
    w = cl.stripe_width
    f = np.empty(m1)
    for n in range(m1):
        lo = max(0, n - w)
        f[n] = corr[n, n] + 2.0 * np.sum(corr[lo:n, n])
    f_bar = 0.5 * (f[:-1] + f[1:])

    n_c = rise_slope = rise_r2 = None
    hit = prefix_linear_scan(f, x=np.arange(m1, dtype=float),
                             min_points=min_points, r2_min=r2_min)
    if hit is not None:
        n_c = hit[0] - 1  # prefix length k covers sites 0..k-1
        rise_slope, rise_r2 = hit[1], hit[2]
    if f_bar.size:
        cl.n_star = int(np.argmax(f_bar))
    return StripeProfile(
        f=f, f_bar=f_bar, stripe_width=w, n_c=n_c,
        rise_slope=rise_slope, rise_r2=rise_r2,
    )


def qfi_variant(wf, sp, c_norm, clip_negative=False):
    """One-dimensional reconstruction: weight each site's probability by
    the averaged stripe profile.

    The banded sums fluctuate and can go negative at large chain index,
    where the profile no longer describes the landscape.  Raw values are
    used by default; clip_negative=True floors the weights at zero, which
    guarantees a non-negative reconstruction.
    """
    fb = np.maximum(sp.f_bar, 0.0) if clip_negative else sp.f_bar
    if wf.n_sites < fb.size + 1:
        raise ValueError("wavefunction shorter than stripe profile")
    p = wf.phi[:, :fb.size] ** 2
    return 4.0 * c_norm**2 * (p @ fb)
