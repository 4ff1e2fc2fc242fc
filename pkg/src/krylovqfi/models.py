"""Model builders: collective-spin Hamiltonians with their probe operator
and initial state.

Two families are provided.  Both conserve the relevant symmetry sector by
construction, so the Hilbert space is the symmetric multiplet (one-axis
twisting in a field) or a product of two multiplets (coupled tops).
"""

from dataclasses import dataclass

import numpy as np

from .spin_algebra import (
    DEFAULT_MAX_DIM,
    collective_spin_matrices,
    highest_weight_state,
    kron,
)


@dataclass(frozen=True)
class ModelInstance:
    """A concrete Hamiltonian together with the operator whose spreading we
    follow and the initial product state.

    Attributes
    ----------
    hamiltonian : ndarray
        Hermitian (d, d).
    probe : ndarray
        Hermitian traceless (d, d); the generator used for the Fisher
        information and the seed of the operator recursion.
    initial_state : ndarray
        Normalized (d,) vector.
    n_particles : int
        Number of elementary spin-1/2 constituents, used for Fisher
        information normalization.
    label : str
    """

    hamiltonian: np.ndarray
    probe: np.ndarray
    initial_state: np.ndarray
    n_particles: int
    label: str


def build_twisting_model(n_particles, chi=2.0, omega=1.0, max_dim=DEFAULT_MAX_DIM):
    """One-axis twisting with a transverse field, restricted to the
    symmetric sector j = N/2.

    H = -(chi/N) Jx^2 - omega Jz, probe operator Jx, initial state the
    coherent state polarized along +z.  Times are measured in 1/omega when
    omega is kept at 1.
    """
    n = int(n_particles)
    if n != n_particles or n < 2:
        raise ValueError(f"n_particles must be an integer >= 2, got {n_particles}")
    if chi < 0 or omega < 0:
        raise ValueError(f"couplings must be non-negative, got chi={chi}, omega={omega}")
    jtot = n / 2
    jx, _, jz = collective_spin_matrices(jtot, max_dim=max_dim)
    h = -(chi / n) * (jx @ jx) - omega * jz
    psi0 = highest_weight_state(n + 1)
    return ModelInstance(
        hamiltonian=h,
        probe=jx,
        initial_state=psi0,
        n_particles=n,
        label=f"twisting_N{n}",
    )


def build_coupled_tops_model(j_top, coupling=0.0, max_dim=DEFAULT_MAX_DIM):
    """Two large spins J coupled through their x components.

    H = (1+c) (J1z + J2z) + (4/J)(1-c) J1x J2x on the (2J+1)^2 product
    space.  The probe operator is J1x + J2x and the initial state is both
    tops fully polarized.  The particle count is N = 4J (each top stands
    for N/2 spin-1/2 constituents at j = N/4).
    """
    two_j = round(2 * j_top)
    if abs(2 * j_top - two_j) > 1e-12 or two_j < 1:
        raise ValueError(f"j_top must be a positive half-integer, got {j_top}")
    c = float(coupling)
    if not -1.0 <= c <= 1.0:
        raise ValueError(f"coupling must lie in [-1, 1], got {coupling}")
    jx, _, jz = collective_spin_matrices(j_top, max_dim=max_dim)
    dim = jx.shape[0]
    eye = np.eye(dim)
    h = (1 + c) * (kron(jz, eye, max_dim=max_dim) + kron(eye, jz, max_dim=max_dim))
    h = h + (4.0 / j_top) * (1 - c) * kron(jx, jx, max_dim=max_dim)
    probe = kron(jx, eye, max_dim=max_dim) + kron(eye, jx, max_dim=max_dim)
    psi0 = highest_weight_state(dim * dim)
    return ModelInstance(
        hamiltonian=h,
        probe=probe,
        initial_state=psi0,
        n_particles=2 * two_j,
        label=f"coupled_tops_J{j_top:g}",
    )
