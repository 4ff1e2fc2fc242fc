"""Propagation of the operator wavefunction on the hopping chain.

Writing the Heisenberg-evolved probe on the chain basis,
O(t)/c_norm = sum_n phi_n(t) O_n, the amplitudes obey

    d phi_n / dt = -b_{n+1} phi_{n+1} + b_n phi_{n-1},    phi_n(0) = delta_n0,

with all phi_n real.  The substitution psi_n = i^{-n} phi_n maps this to a
Schroedinger equation with a real symmetric tridiagonal Hamiltonian (zero
diagonal, off-diagonal b_n), so the solution at arbitrary times comes from
one tridiagonal eigendecomposition instead of timestepping.  Probability
sum_n phi_n^2 = 1 is conserved exactly in the continuum problem; on a
truncated chain, weight reaching the last sites signals that the
truncation is being felt, which is tracked as leakage and flagged.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import TailNotResolvedError

LEAK_TAIL_SITES = 10


@dataclass
class ChainWavefunction:
    """Real amplitudes phi_n(t) on the chain.

    Attributes
    ----------
    t_grid : ndarray
        (T,) strictly increasing times starting at 0.
    phi : ndarray
        (T, M+1) amplitudes, phi[k, n] at time t_grid[k].
    leakage : ndarray
        (T,) probability in the last few sites; zero for terminated
        (exactly closed) chains.
    leak_flags : ndarray of bool
        (T,) True where leakage exceeds the tolerance, marking times at
        which truncation artifacts may contaminate reconstructions.
    leak_tol : float
    terminated : bool
        Chain closure flag inherited from the decomposition.
    """

    t_grid: np.ndarray
    phi: np.ndarray
    leakage: np.ndarray
    leak_flags: np.ndarray
    leak_tol: float
    terminated: bool

    @property
    def n_sites(self):
        return self.phi.shape[1]


def evolve_phi(b, t_grid, leak_tol=1e-10, terminated=False):
    """Solve the chain equation for hopping amplitudes b at the given times.

    Parameters
    ----------
    b : ndarray
        (M,) positive hopping amplitudes; empty means a frozen single-site
        chain (conserved seed operator).
    t_grid : ndarray
        Strictly increasing, starting exactly at 0.
    leak_tol : float
        Threshold on the tail probability (last 10 sites) above which a
        time is flagged.
    terminated : bool
        When the chain closed exactly there is no truncation boundary and
        leakage is identically zero.
    """
    b = np.asarray(b, dtype=np.float64)
    t = np.asarray(t_grid, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a nonempty 1d array")
    if t[0] != 0.0:
        raise ValueError(f"t_grid must start at 0, got {t[0]}")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if b.size and np.any(b <= 0):
        raise ValueError("hopping amplitudes must be positive")

    m1 = b.size + 1
    if b.size == 0:
        phi = np.ones((t.size, 1))
    else:
        lam, q = eigh_tridiagonal(np.zeros(m1), b)
        # psi(t) = Q exp(-i lam t) Q^T e_0, then phi_n = Re(i^n psi_n)
        weights = q * q[0]
        phases = np.exp(np.outer(t, -1j * lam))
        psi = phases @ weights.T
        phi = np.empty((t.size, m1))
        phi[:, 0::4] = psi[:, 0::4].real
        if m1 > 1:
            phi[:, 1::4] = -psi[:, 1::4].imag
        if m1 > 2:
            phi[:, 2::4] = -psi[:, 2::4].real
        if m1 > 3:
            phi[:, 3::4] = psi[:, 3::4].imag
        phi[0] = 0.0
        phi[0, 0] = 1.0

    if terminated:
        leakage = np.zeros(t.size)
    else:
        tail = phi[:, -min(LEAK_TAIL_SITES, m1):]
        leakage = np.einsum("ij,ij->i", tail, tail)
    flags = leakage > leak_tol
    return ChainWavefunction(
        t_grid=t, phi=phi, leakage=leakage, leak_flags=flags,
        leak_tol=leak_tol, terminated=terminated,
    )


def krylov_complexity(wf):
    """Mean chain position sum_n n phi_n(t)^2, one value per time."""
    n = np.arange(wf.n_sites)
    return (wf.phi * wf.phi) @ n


def delocalization_length(wf, t_index, window=(1e-12, 1e-3), min_sites=5):
    """Exponential decay length of the wavefunction tail at one time.

    Fits log |phi_n| against n over the sites beyond the profile peak
    whose probability phi_n^2 lies inside the window, where the profile
    is genuinely in its decaying tail but still well above roundoff.

    Returns
    -------
    xi : float
        Decay length, phi_n ~ exp(-n / xi) in the fit region.
    r_squared : float
    n_sites_used : int

    Raises
    ------
    TailNotResolvedError
        Fewer than min_sites usable sites, or a non-decaying fit.
    """
    p = wf.phi[t_index] ** 2
    peak = int(np.argmax(p))
    n = np.arange(wf.n_sites)
    mask = (n > peak) & (p >= window[0]) & (p <= window[1])
    used = int(np.count_nonzero(mask))
    if used < min_sites:
        raise TailNotResolvedError(
            f"tail not resolved at t_index={t_index}: {used} usable sites, "
            f"need {min_sites}"
        )
    x = n[mask]
    y = 0.5 * np.log(p[mask])
    slope, intercept = np.polyfit(x, y, 1)
    if slope >= 0:
        raise TailNotResolvedError(
            f"tail not resolved at t_index={t_index}: non-decaying fit"
        )
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return -1.0 / slope, float(r2), used


def delocalization_profile(wf, **kwargs):
    """delocalization_length at every time; NaN where the tail is not
    resolved (early times, or saturated chains)."""
    xi = np.full(wf.t_grid.size, np.nan)
    for k in range(wf.t_grid.size):
        try:
            xi[k] = delocalization_length(wf, k, **kwargs)[0]
        except TailNotResolvedError:
            pass
    return xi
