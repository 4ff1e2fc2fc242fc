"""Correlation landscape and the Fisher-information reconstructions.

The oracle here forms the operator products O_m O_n explicitly (tiny
systems only) and takes expectation values directly, which checks the
Gram-trick implementation end to end.  The headline identity, that the
chain reconstruction reproduces exact diagonalization on a closed chain,
is asserted at near machine precision.
"""

import numpy as np
import pytest

from krylovqfi.chain_dynamics import evolve_phi
from krylovqfi.exact_reference import eigendecompose, exact_qfi
from krylovqfi.krylov_space import lanczos
from krylovqfi.landscape import (
    CorrelationLandscape,
    correlation_landscape,
    qfi_reconstruct,
    qfi_variant,
    stripe_profile,
)
from krylovqfi.models import build_twisting_model


@pytest.fixture(scope="module")
def closed4():
    model = build_twisting_model(4)
    kd = lanczos(model.hamiltonian, model.probe, n_max=24)
    assert kd.terminated
    return model, kd


def test_landscape_against_operator_products(closed4):
    model, kd = closed4
    psi = model.initial_state
    cl = correlation_landscape(kd, psi)
    mats = kd.basis_matrices()
    m1 = kd.n_basis
    oracle = np.empty((m1, m1))
    means = np.array([np.vdot(psi, mats[n] @ psi).real for n in range(m1)])
    for a in range(m1):
        for b in range(m1):
            prod = np.vdot(psi, mats[a] @ (mats[b] @ psi))
            oracle[a, b] = prod.real - means[a] * means[b]
    oracle = (oracle + oracle.T) / 2
    np.testing.assert_allclose(cl.corr, oracle, atol=1e-10)
    np.testing.assert_allclose(cl.means, means, atol=1e-12)


def test_landscape_structure(closed4):
    model, kd = closed4
    cl = correlation_landscape(kd, model.initial_state)
    # exactly symmetric by construction
    assert np.max(np.abs(cl.corr - cl.corr.T)) == 0.0
    # positive semidefinite up to roundoff
    assert np.linalg.eigvalsh(cl.corr)[0] >= -1e-10
    # seed variance pins the corner entry: Var(O_0) = (N/4) / c_norm^2
    n = model.n_particles
    assert cl.corr[0, 0] == pytest.approx(n / 4 / kd.c_norm**2, rel=1e-12)
    # alternating-parity chain operators in a real state: odd m+n vanishes
    par = (np.indices(cl.corr.shape).sum(axis=0)) % 2 == 1
    assert np.max(np.abs(cl.corr[par])) <= 1e-14


def test_reconstruction_equals_exact_reference(closed4):
    model, kd = closed4
    t = np.linspace(0, 6, 121)
    wf = evolve_phi(kd.b, t, terminated=kd.terminated)
    cl = correlation_landscape(kd, model.initial_state)
    f_rec = qfi_reconstruct(wf, cl)
    sd = eigendecompose(model.hamiltonian)
    f_exact = exact_qfi(sd, model.initial_state, model.probe, t)
    np.testing.assert_allclose(f_rec, f_exact, rtol=1e-12, atol=1e-10)
    # and the t = 0 value is the particle number
    assert f_rec[0] == pytest.approx(model.n_particles, rel=1e-12)


def test_stripe_profile_hand_computed():
    # a tiny synthetic landscape where the banded sums are easy by hand
    corr = np.arange(25, dtype=float).reshape(5, 5)
    corr = (corr + corr.T) / 2
    cl = CorrelationLandscape(corr=corr, means=np.zeros(5), c_norm=1.0,
                              stripe_width=2)
    sp = stripe_profile(cl)
    f_expected = []
    for n in range(5):
        lo = max(0, n - 2)
        f_expected.append(corr[n, n] + 2 * corr[lo:n, n].sum())
    np.testing.assert_allclose(sp.f, f_expected, atol=0)
    np.testing.assert_allclose(sp.f_bar, 0.5 * (sp.f[:-1] + sp.f[1:]), atol=0)
    assert cl.n_star == int(np.argmax(sp.f_bar))
    assert sp.stripe_width == 2


def test_stripe_rise_detection(closed4):
    model, kd = closed4
    cl = correlation_landscape(kd, model.initial_state, stripe_width=3)
    sp = stripe_profile(cl, min_points=3, r2_min=0.9)
    assert cl.n_star is not None
    assert 0 <= cl.n_star < kd.n_basis - 1
    if sp.n_c is not None:
        assert 2 <= sp.n_c < kd.n_basis
        assert sp.rise_r2 >= 0.9


def test_variant_formula_and_clipping(closed4):
    model, kd = closed4
    t = np.linspace(0, 4, 41)
    wf = evolve_phi(kd.b, t, terminated=kd.terminated)
    cl = correlation_landscape(kd, model.initial_state)
    sp = stripe_profile(cl)
    raw = qfi_variant(wf, sp, kd.c_norm)
    manual = 4 * kd.c_norm**2 * (wf.phi[:, :sp.f_bar.size] ** 2) @ sp.f_bar
    np.testing.assert_allclose(raw, manual, atol=1e-12)
    clipped = qfi_variant(wf, sp, kd.c_norm, clip_negative=True)
    assert np.all(clipped >= 0)
    assert np.all(clipped >= raw - 1e-12)
    # both start from the particle number (the profile corner is clean)
    assert raw[0] == pytest.approx(model.n_particles, rel=1e-9)


def test_shape_mismatches_raise(closed4):
    model, kd = closed4
    cl = correlation_landscape(kd, model.initial_state)
    short = evolve_phi(kd.b[:4], np.linspace(0, 1, 5))
    with pytest.raises(ValueError, match="mismatch"):
        qfi_reconstruct(short, cl)
    sp = stripe_profile(cl)
    with pytest.raises(ValueError, match="shorter"):
        qfi_variant(short, sp, kd.c_norm)


def test_landscape_validation(closed4):
    model, kd = closed4
    with pytest.raises(ValueError, match="stripe_width"):
        correlation_landscape(kd, model.initial_state, stripe_width=0)
    bad = model.initial_state * 1.1
    with pytest.raises(ValueError, match="normalized"):
        correlation_landscape(kd, bad)
