"""Shared fixtures: a couple of small closed-chain decompositions that
several test modules reuse.  Everything here is deterministic."""

import numpy as np
import pytest

from krylovqfi.exact_reference import eigendecompose
from krylovqfi.krylov_space import lanczos
from krylovqfi.models import build_coupled_tops_model, build_twisting_model


@pytest.fixture(scope="session")
def twisting8():
    """Twisting N=8 with the chain run to closure (exact decomposition)."""
    model = build_twisting_model(8)
    kd = lanczos(model.hamiltonian, model.probe, n_max=80)
    return model, kd


@pytest.fixture(scope="session")
def twisting8_exact(twisting8):
    model, _ = twisting8
    return eigendecompose(model.hamiltonian)


@pytest.fixture(scope="session")
def tops1():
    """Coupled tops J=1 at the chaotic point c=0, chain to closure."""
    model = build_coupled_tops_model(1.0, coupling=0.0)
    kd = lanczos(model.hamiltonian, model.probe, n_max=80)
    return model, kd


def chain_grid(t_max=6.0, points=241):
    return np.linspace(0.0, t_max, points)
