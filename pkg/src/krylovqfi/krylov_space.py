"""Operator-space Lanczos recursion for Heisenberg dynamics.

The adjoint map L(X) = [H, X] acting on the traceless Hermitian operators
generates, from a seed operator O, an orthonormal chain O_0, O_1, ...
with respect to the normalized Hilbert-Schmidt inner product

    (A|B) = tr(A^dag B) / ip_dim.

The chain is built in a phase convention where every O_n is Hermitian and
the recursion reads

    b_{n+1} O_{n+1} = i L(O_n) + b_n O_{n-1},

which makes all b_n real positive and the matrix of L tridiagonal with
purely imaginary off-diagonal entries.  Heisenberg evolution of the seed
then reduces to a nearest-neighbour hopping problem on the chain, handled
in chain_dynamics.

When H and O are both real symmetric (every model in this package), the
basis alternates between real symmetric (even n) and i times real
antisymmetric (odd n) matrices.  The recursion is then carried out purely
in real arithmetic on the real factors, which halves memory and is
substantially faster.  The generic complex path is kept for Hamiltonians
with genuinely complex entries and for cross checks.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ResourceRefusalError
from .spin_algebra import check_hermitian, matrix_fingerprint

DEFAULT_MAX_BASIS_BYTES = 2 * 2**30


def liouville_apply(h, x):
    """Commutator [h, x]."""
    return h @ x - x @ h


def hs_inner(a, b, ip_dim=None):
    """Normalized Hilbert-Schmidt inner product tr(a^dag b) / ip_dim.

    ip_dim defaults to the matrix dimension, which makes the identity a
    unit vector.  Any positive value gives the same Lanczos coefficients
    and the same reconstructed dynamics; only the seed normalization
    c_norm rescales.
    """
    if ip_dim is None:
        ip_dim = a.shape[0]
    return np.vdot(a, b) / ip_dim


def hs_norm(a, ip_dim=None):
    return np.sqrt(np.real(hs_inner(a, a, ip_dim)))


@dataclass
class KrylovDecomposition:
    """Orthonormal operator chain seeded by a probe operator.

    Attributes
    ----------
    b : ndarray
        (M,) hopping amplitudes b_1..b_M, all positive.
    c_norm : float
        Norm of the seed, O = c_norm * O_0.
    terminated : bool
        True when the recursion closed on an invariant subspace (the next
        amplitude fell below the termination threshold), so the chain is
        exact rather than truncated.
    dim_hilbert : int
        Dimension d of the underlying Hilbert space.
    ip_dim : float
        Normalization used in the inner product.
    h_fingerprint : str
        Content hash of the Hamiltonian the chain was built from.

    The basis itself is stored flattened, one operator per row, in real
    packed form when the real fast path was taken.  Use basis_element /
    basis_matrices to materialize Hermitian matrices, and apply_to_state /
    project_operator for the contractions that never need materializing.
    """

    b: np.ndarray
    c_norm: float
    terminated: bool
    dim_hilbert: int
    ip_dim: float
    h_fingerprint: str
    store: np.ndarray
    real_mode: bool

    @property
    def n_basis(self):
        """Number of chain sites M+1."""
        return self.store.shape[0]

    def basis_element(self, n):
        d = self.dim_hilbert
        row = self.store[n].reshape(d, d)
        if self.real_mode:
            return (1j * row) if n % 2 else row.astype(np.complex128)
        return row.copy()

    def basis_matrices(self):
        """All chain operators as a (M+1, d, d) complex array.  Meant for
        small systems and tests; this materializes the full basis."""
        d = self.dim_hilbert
        out = self.store.reshape(-1, d, d).astype(np.complex128)
        if self.real_mode:
            out[1::2] *= 1j
        return out

    def apply_to_state(self, psi):
        """Vectors O_n |psi> for all n, shape (M+1, d)."""
        d = self.dim_hilbert
        mats = self.store.reshape(-1, d, d)
        if self.real_mode:
            if np.iscomplexobj(psi):
                v = (mats @ psi.real).astype(np.complex128)
                v += 1j * (mats @ psi.imag)
            else:
                v = (mats @ psi).astype(np.complex128)
            v[1::2] *= 1j
            return v
        return mats @ psi

    def project_operator(self, x):
        """Coefficients (O_n | x) of a d x d matrix on the chain basis."""
        xf = np.ravel(x)
        if self.real_mode:
            coeff = (self.store @ xf.real) / self.ip_dim
            if np.iscomplexobj(xf):
                coeff = coeff + 1j * ((self.store @ xf.imag) / self.ip_dim)
            coeff = coeff.astype(np.complex128)
            coeff[1::2] *= -1j
            return coeff
        return (self.store.conj() @ xf) / self.ip_dim

    def orthonormality_residual(self):
        """max |Gram - identity| over the stored basis."""
        g = self.store.conj() @ self.store.T / self.ip_dim
        g[np.diag_indices_from(g)] -= 1.0
        return float(np.max(np.abs(g)))


def _is_real(a):
    return not np.iscomplexobj(a) or not np.any(a.imag)


def _fmt_bytes(n):
    if n >= 2**30:
        return f"{n / 2**30:.2f} GiB"
    if n >= 2**20:
        return f"{n / 2**20:.1f} MiB"
    return f"{n} bytes"


def _check_budget(rows, dim, itemsize, max_basis_bytes):
    need = rows * dim * dim * itemsize
    if need > max_basis_bytes:
        raise ResourceRefusalError(
            f"Krylov basis would need {_fmt_bytes(need)} "
            f"({rows} operators of dimension {dim}), over the "
            f"{_fmt_bytes(max_basis_bytes)} budget; lower n_max or "
            "raise max_basis_bytes"
        )


def lanczos(h, o, n_max, b_tol=1e-8, ip_dim=None,
            max_basis_bytes=DEFAULT_MAX_BASIS_BYTES, force_complex=False):
    """Build the operator chain seeded by o under the adjoint map of h.

    Full reorthogonalization (two explicit passes against every stored
    operator) is applied at each step, so the basis stays orthonormal to
    near machine precision at the cost of keeping all operators in memory.

    Parameters
    ----------
    h : ndarray
        Hermitian Hamiltonian (d, d).
    o : ndarray
        Hermitian traceless seed operator, nonzero.
    n_max : int
        Depth cap: at most n_max amplitudes b_1..b_n_max are produced.
        Must not exceed d^2 - 1.
    b_tol : float
        Termination threshold relative to b_1 (relative to the
        Hilbert-Schmidt norm of h on the first step).  Hitting it means
        the chain closed on an invariant operator subspace and the
        decomposition is exact.
    ip_dim : float, optional
        Inner-product normalization, defaults to d.
    max_basis_bytes : int
        Budget for the stored basis; exceeding it raises
        ResourceRefusalError before anything is allocated.
    force_complex : bool
        Skip the real-arithmetic fast path even when h and o are real.

    Returns
    -------
    KrylovDecomposition
    """
    h = np.asarray(h)
    o = np.asarray(o)
    check_hermitian(h, name="hamiltonian")
    check_hermitian(o, name="seed operator")
    d = h.shape[0]
    if o.shape != h.shape:
        raise ValueError(f"shape mismatch: h {h.shape}, o {o.shape}")
    tr = abs(complex(np.trace(o)))
    if tr > 1e-10:
        raise ValueError(f"seed operator must be traceless, |tr| = {tr:.3e}")
    n_max = int(n_max)
    if n_max < 1 or n_max > d * d - 1:
        raise ValueError(f"n_max must be in [1, d^2-1] = [1, {d * d - 1}], got {n_max}")
    ip = float(ip_dim) if ip_dim is not None else float(d)
    if ip <= 0:
        raise ValueError(f"ip_dim must be positive, got {ip_dim}")

    real_mode = _is_real(h) and _is_real(o) and not force_complex
    itemsize = 8 if real_mode else 16
    _check_budget(n_max + 1, d, itemsize, max_basis_bytes)

    fingerprint = matrix_fingerprint(h)
    if real_mode:
        store, b, terminated = _lanczos_real(h, o, n_max, b_tol, ip)
    else:
        store, b, terminated = _lanczos_complex(h, o, n_max, b_tol, ip)
    c_norm = float(np.linalg.norm(np.ravel(o)) / np.sqrt(ip))
    return KrylovDecomposition(
        b=b, c_norm=c_norm, terminated=terminated, dim_hilbert=d,
        ip_dim=ip, h_fingerprint=fingerprint, store=store, real_mode=real_mode,
    )


def _reorthogonalize(wf, rows, ip):
    # two explicit passes; coefficients are real in exact arithmetic for
    # Hermitian chain operators, taking .real keeps the symmetry class exact
    for _ in range(2):
        coef = rows.conj() @ wf
        coef = coef.real / ip
        wf -= coef @ rows
    return wf


def _lanczos_real(h, o, n_max, b_tol, ip):
    d = h.shape[0]
    hr = np.ascontiguousarray(h, dtype=np.float64) if not np.iscomplexobj(h) \
        else np.ascontiguousarray(h.real)
    orr = o.real if np.iscomplexobj(o) else o
    c = np.linalg.norm(np.ravel(orr)) / np.sqrt(ip)
    if c == 0:
        raise ValueError("seed operator is zero")
    store = np.empty((n_max + 1, d * d), dtype=np.float64)
    store[0] = np.ravel(orr) / c
    h_scale = np.linalg.norm(np.ravel(hr)) / np.sqrt(ip)
    b = []
    terminated = False
    for n in range(n_max):
        cur = store[n].reshape(d, d)
        w = hr @ cur - cur @ hr
        if n % 2:
            w = -w
        if n >= 1:
            w += b[n - 1] * store[n - 1].reshape(d, d)
        # snap to the exact symmetry class of the next operator
        w = (w - w.T) / 2 if n % 2 == 0 else (w + w.T) / 2
        wf = np.ravel(w)
        # only same-parity rows have nonzero overlap
        wf = _reorthogonalize(wf, store[(n + 1) % 2:n + 1:2], ip)
        bn = np.linalg.norm(wf) / np.sqrt(ip)
        if bn < b_tol * (b[0] if b else h_scale):
            terminated = True
            break
        b.append(bn)
        store[n + 1] = wf / bn
    m = len(b)
    if m + 1 < store.shape[0]:
        store = store[:m + 1].copy()
    return store, np.array(b), terminated


def _lanczos_complex(h, o, n_max, b_tol, ip):
    d = h.shape[0]
    hc = np.ascontiguousarray(h, dtype=np.complex128)
    oc = np.asarray(o, dtype=np.complex128)
    c = np.linalg.norm(np.ravel(oc)) / np.sqrt(ip)
    if c == 0:
        raise ValueError("seed operator is zero")
    store = np.empty((n_max + 1, d * d), dtype=np.complex128)
    store[0] = np.ravel(oc) / c
    h_scale = np.linalg.norm(np.ravel(hc)) / np.sqrt(ip)
    b = []
    terminated = False
    for n in range(n_max):
        cur = store[n].reshape(d, d)
        w = 1j * (hc @ cur - cur @ hc)
        if n >= 1:
            w += b[n - 1] * store[n - 1].reshape(d, d)
        w = (w + w.conj().T) / 2
        wf = _reorthogonalize(np.ravel(w), store[:n + 1], ip)
        bn = np.linalg.norm(wf) / np.sqrt(ip)
        if bn < b_tol * (b[0] if b else h_scale):
            terminated = True
            break
        b.append(bn)
        store[n + 1] = wf / bn
    m = len(b)
    if m + 1 < store.shape[0]:
        store = store[:m + 1].copy()
    return store, np.array(b), terminated
