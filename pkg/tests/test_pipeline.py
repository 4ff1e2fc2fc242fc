"""End-to-end run assembly: configuration validation, inline invariant
gates, probe selection, grid refinement, determinism, and sweeps."""

import numpy as np
import pytest

from krylovqfi.chain_dynamics import evolve_phi
from krylovqfi.errors import ConfigError, InvariantGateError
from krylovqfi.pipeline import (
    RunConfig,
    _gate,
    _member_config,
    _refined_grid,
    _select_probes,
    run_single,
    run_sweep,
)


@pytest.fixture(scope="module")
def result8():
    return run_single(RunConfig(model="twisting", n_particles=8, n_max=80,
                                t_points=201))


def test_config_validation():
    with pytest.raises(ConfigError, match="model"):
        RunConfig(model="ising").validate()
    with pytest.raises(ConfigError, match="n_particles"):
        RunConfig(n_particles=1).validate()
    with pytest.raises(ConfigError, match="j_top"):
        RunConfig(model="coupled_tops", j_top=0.7).validate()
    with pytest.raises(ConfigError, match="coupling"):
        RunConfig(model="coupled_tops", coupling=2.0).validate()
    with pytest.raises(ConfigError, match="t_max"):
        RunConfig(t_max=0.0).validate()
    with pytest.raises(ConfigError, match="t_points"):
        RunConfig(t_points=2).validate()
    with pytest.raises(ConfigError, match="jobs"):
        RunConfig(jobs=0).validate()
    RunConfig(n_particles=75).validate()  # odd sizes are legal


def test_effective_stripe_width():
    assert RunConfig().effective_stripe_width() == 10
    assert RunConfig(model="coupled_tops").effective_stripe_width() == 30
    assert RunConfig(stripe_width=7).effective_stripe_width() == 7


def test_run_single_populates_everything(result8):
    res = result8
    assert res.decomposition.terminated
    trace = res.trace
    assert trace.n_particles == 8
    assert trace.f_exact[0] == pytest.approx(8.0, rel=1e-9)
    assert not trace.tstar_boundary
    assert trace.f_star > 8.0
    assert 1 <= trace.depth_bound <= 8
    assert trace.t_grid.size >= 201  # refinement only adds points
    assert np.all(np.diff(trace.t_grid) > 0)
    assert trace.complexity.shape == trace.t_grid.shape
    assert trace.xi.shape == trace.t_grid.shape
    # closed chain: reconstruction is the exact answer everywhere
    dev = np.max(np.abs(trace.f_reconstructed - trace.f_exact)
                 / np.maximum(trace.f_exact, 8.0))
    assert dev <= 1e-9


def test_gates_recorded_and_small(result8):
    gates = result8.gates
    for key in ("orthonormality", "landscape_symmetry", "landscape_psd",
                "chain_norm", "qfi_initial", "probe_deviation"):
        assert key in gates
    assert gates["orthonormality"] <= 1e-10
    assert gates["landscape_symmetry"] == 0.0
    assert gates["landscape_psd"] >= -1e-8
    assert gates["chain_norm"] <= 1e-10
    assert gates["probe_deviation"] <= 1e-8


def test_probe_comparison(result8):
    probes = result8.probes
    assert probes is not None
    assert probes.phi_projected.shape == probes.phi_chain.shape
    assert probes.t_probes.size <= 8
    assert probes.max_abs_deviation <= 1e-8
    assert probes.imag_residue <= 1e-10


def test_run_single_determinism():
    cfg = RunConfig(model="twisting", n_particles=4, n_max=24, t_points=101,
                    with_projection=False)
    a = run_single(cfg)
    b = run_single(cfg)
    assert np.array_equal(a.trace.f_exact, b.trace.f_exact)
    assert np.array_equal(a.trace.f_reconstructed, b.trace.f_reconstructed)
    assert np.array_equal(a.decomposition.b, b.decomposition.b)
    assert a.trace.t_star == b.trace.t_star


def test_run_single_rejects_sweep_config():
    with pytest.raises(ConfigError, match="sweep"):
        run_single(RunConfig(sweep=[4, 8]))


def test_gate_helper():
    gates = {}
    _gate(gates, "ok", 1e-12, 1e-10)
    assert gates["ok"] == 1e-12
    with pytest.raises(InvariantGateError, match="bad"):
        _gate(gates, "bad", 1e-8, 1e-10)
    assert gates["bad"] == 1e-8  # recorded even on failure
    _gate(gates, "lower", 5.0, 1.0, upper=False)
    with pytest.raises(InvariantGateError):
        _gate(gates, "lower2", 0.5, 1.0, upper=False)


def test_refined_grid_densifies_peaks():
    t = np.linspace(0, 10, 101)
    f = np.exp(-((t - 4.0) ** 2))
    grid = _refined_grid(t, f)
    assert grid.size > t.size
    assert np.all(np.diff(grid) > 0)
    assert grid[-1] <= t[-1] + 1e-9
    # all original points survive
    assert np.all(np.isin(np.round(t, 9), np.round(grid, 9)))
    # densest sampling sits around the peak
    near = grid[(grid > 3.5) & (grid < 4.5)]
    assert np.min(np.diff(near)) < (t[1] - t[0]) / 5
    # monotone data needs no refinement
    assert _refined_grid(t, t).size == t.size


def test_select_probes_prefers_clean_times():
    b = np.arange(1.0, 12.0)
    wf = evolve_phi(b, np.linspace(0, 4, 81))
    idx = _select_probes(wf, 8)
    assert idx.size <= 8
    assert np.all(wf.leakage[idx] <= 1e-12)
    assert np.all(np.diff(idx) > 0)


def test_member_config_maps_sizes():
    base = RunConfig(model="twisting", sweep=[8, 12])
    member = _member_config(base, 12)
    assert member.n_particles == 12 and member.sweep is None
    base_tops = RunConfig(model="coupled_tops", sweep=[8])
    member = _member_config(base_tops, 10)
    assert member.j_top == 2.5


def test_run_sweep_small():
    cfg = RunConfig(model="twisting", sweep=[8, 10, 12, 14], t_points=101,
                    with_projection=False)
    sweep = run_sweep(cfg)
    assert [m.trace.n_particles for m in sweep.members] == [8, 10, 12, 14]
    assert sweep.fit is not None
    assert sweep.fit.n_points == 4
    assert sweep.fit.slope > 0  # the peak time drifts up with size
    with pytest.raises(ConfigError, match="nonempty"):
        run_sweep(RunConfig(sweep=None))


def test_run_sweep_parallel_matches_serial():
    cfg = RunConfig(model="twisting", sweep=[4, 8], t_points=51,
                    with_projection=False)
    serial = run_sweep(cfg)
    parallel = run_sweep(RunConfig(model="twisting", sweep=[4, 8],
                                   t_points=51, with_projection=False,
                                   jobs=2))
    for a, b in zip(serial.members, parallel.members):
        assert np.array_equal(a.trace.f_exact, b.trace.f_exact)
        assert a.trace.t_star == b.trace.t_star
