"""Collective spin operators and coherent initial states.

Everything works in a single angular momentum multiplet of spin j
(dimension 2j+1) or in tensor products of such multiplets.  Basis
ordering is by descending magnetic quantum number, m = j, j-1, ..., -j,
so the first basis vector is the highest-weight state.
"""

import hashlib

import numpy as np

# Refuse to build operators beyond this Hilbert-space dimension unless the
# caller raises the limit explicitly.  4096 keeps accidental N=10^5 requests
# from exhausting memory while allowing every production run in this package.
DEFAULT_MAX_DIM = 4096


def collective_spin_matrices(j, max_dim=DEFAULT_MAX_DIM):
    """Return the spin-j matrices (Jx, Jy, Jz) in units of hbar = 1.

    Parameters
    ----------
    j : float
        Total spin, a non-negative integer or half-integer.
    max_dim : int
        Guard on the matrix dimension 2j+1.

    Returns
    -------
    jx, jy, jz : ndarray
        (2j+1, 2j+1) matrices.  jx and jz are real float64, jy is
        complex128 with purely imaginary entries.
    """
    two_j = round(2 * j)
    if abs(2 * j - two_j) > 1e-12 or two_j < 0:
        raise ValueError(f"spin must be a non-negative half-integer, got j={j}")
    dim = two_j + 1
    if dim > max_dim:
        raise ValueError(f"dimension 2j+1 = {dim} exceeds max_dim = {max_dim}")

    m = j - np.arange(dim)
    jz = np.diag(m)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)) on the superdiagonal
    mm = m[1:]
    jplus = np.diag(np.sqrt(j * (j + 1) - mm * (mm + 1)), k=1)
    jx = (jplus + jplus.T) / 2
    jy = -0.5j * (jplus - jplus.T)
    return jx, jy, jz


def kron(a, b, max_dim=DEFAULT_MAX_DIM):
    """Kronecker product with a dimension guard."""
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim:
        raise ValueError(f"product dimension {dim} exceeds max_dim = {max_dim}")
    return np.kron(a, b)


def highest_weight_state(dim):
    """Unit vector on the first basis state, |j, m=j>."""
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    psi = np.zeros(dim)
    psi[0] = 1.0
    return psi


def expectation(op, psi):
    """<psi| op |psi>, real part (op is assumed Hermitian)."""
    return np.real(np.vdot(psi, op @ psi))


def variance(op, psi):
    """<op^2> - <op>^2 in the state psi."""
    v = op @ psi
    return np.real(np.vdot(v, v)) - expectation(op, psi) ** 2


def check_hermitian(a, atol=1e-12, name="matrix"):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    dev = np.max(np.abs(a - a.conj().T))
    if dev > atol:
        raise ValueError(f"{name} is not Hermitian (max deviation {dev:.3e})")


def check_state(psi, dim=None, atol=1e-10):
    if psi.ndim != 1:
        raise ValueError(f"state must be a vector, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {dim}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"state is not normalized (|psi| = {nrm:.12f})")


def matrix_fingerprint(a):
    """Content hash of a matrix, used to tie decompositions to the
    Hamiltonian they came from.  Insensitive to real vs complex dtype."""
    buf = np.ascontiguousarray(a, dtype=np.complex128)
    return hashlib.sha256(buf.tobytes()).hexdigest()[:16]
