"""End-to-end runs: model -> operator chain -> hopping dynamics ->
landscape -> exact reference -> diagnostics.

A run is fully deterministic given its configuration (no randomness
anywhere in the package), so repeated runs are byte-identical.  Cheap
structural invariants (basis orthonormality, landscape symmetry and
positivity, chain norm conservation) are checked inline and raise
InvariantGateError rather than letting a silently broken decomposition
produce plausible-looking numbers.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis, chain_dynamics, exact_reference, landscape
from .errors import ConfigError, InvariantGateError
from .krylov_space import DEFAULT_MAX_BASIS_BYTES, lanczos
from .models import build_coupled_tops_model, build_twisting_model

MODELS = ("twisting", "coupled_tops")

ORTHONORMALITY_GATE = 1e-10
PSD_GATE = -1e-8
NORM_GATE = 1e-10


@dataclass
class RunConfig:
    """Everything a single run or a size sweep needs.

    Times are in units of 1/omega for the twisting model and in the bare
    Hamiltonian units for the coupled tops.  n_max = None picks
    min(4 N, d^2 - 1), enough chain for the horizons used here while
    keeping the basis small compared to full operator space.
    """

    model: str = "twisting"
    n_particles: int = 40
    j_top: float = 10.0
    chi: float = 2.0
    omega: float = 1.0
    coupling: float = 0.0
    t_max: float = 6.0
    t_points: int = 400
    n_max: int | None = None
    b_tol: float = 1e-8
    leak_tol: float = 1e-10
    stripe_width: int | None = None
    nu: float = 4.0
    n_probes: int = 8
    with_projection: bool = True
    max_basis_bytes: int = DEFAULT_MAX_BASIS_BYTES
    sweep: list | None = None
    jobs: int = 1
    out_dir: str | None = None
    figures: bool = True

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(
                f"model must be one of {MODELS}, got '{self.model}'")
        if self.model == "twisting":
            if self.n_particles < 2:
                raise ConfigError(
                    f"n_particles must be >= 2, got {self.n_particles}")
        else:
            if round(2 * self.j_top) != 2 * self.j_top or self.j_top <= 0:
                raise ConfigError(
                    f"j_top must be a positive half-integer, got {self.j_top}")
            if not -1 <= self.coupling <= 1:
                raise ConfigError(
                    f"coupling must lie in [-1, 1], got {self.coupling}")
        if self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.t_points < 3:
            raise ConfigError(f"t_points must be >= 3, got {self.t_points}")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")
        if self.b_tol <= 0 or self.leak_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.stripe_width is not None and self.stripe_width < 1:
            raise ConfigError(
                f"stripe_width must be >= 1, got {self.stripe_width}")
        if self.n_probes < 1:
            raise ConfigError(f"n_probes must be >= 1, got {self.n_probes}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        return self

    def effective_stripe_width(self):
        if self.stripe_width is not None:
            return self.stripe_width
        return 10 if self.model == "twisting" else 30

    def build_model(self):
        if self.model == "twisting":
            return build_twisting_model(self.n_particles, self.chi, self.omega)
        return build_coupled_tops_model(self.j_top, self.coupling)


@dataclass
class ProbeComparison:
    """Chain-evolved versus exactly projected amplitudes at probe times."""

    t_probes: np.ndarray
    phi_projected: np.ndarray
    phi_chain: np.ndarray
    max_abs_deviation: float
    imag_residue: float


@dataclass
class SingleRunResult:
    config: RunConfig
    model: object
    decomposition: object
    wavefunction: object
    correlation: object
    stripe: object
    trace: analysis.QfiTrace
    proposition: analysis.PropositionReport
    probes: ProbeComparison | None
    gates: dict = field(default_factory=dict)


def _default_n_max(model, dim):
    return min(4 * model.n_particles, dim * dim - 1)


def _gate(gates, name, value, limit, upper=True):
    gates[name] = value
    ok = value <= limit if upper else value >= limit
    if not ok:
        raise InvariantGateError(
            f"invariant gate '{name}' failed: {value:.3e} vs limit {limit:.3e}")


def _refined_grid(t, f):
    """Base grid plus tenfold-denser patches around interior maxima of f."""
    dt = t[1] - t[0]
    extra = []
    for i in range(1, t.size - 1):
        if f[i - 1] < f[i] >= f[i + 1]:
            lo, hi = max(0, i - 2), min(t.size - 1, i + 2)
            extra.append(np.arange(t[lo], t[hi] + dt / 20, dt / 10))
    if not extra:
        return t
    ts = np.unique(np.concatenate([t, *extra]))
    ts = ts[ts <= t[-1] + 1e-12 * max(1.0, t[-1])]
    keep = np.concatenate([[True], np.diff(ts) > 1e-9 * dt])
    return ts[keep]


def _select_probes(wf, n_probes, strict_leak=1e-12):
    """Probe times where the chain is clean enough for a strict cross
    check: leakage at or below strict_leak (every time qualifies on a
    terminated chain).  Evenly spread over the qualifying stretch."""
    ok = np.nonzero(wf.leakage <= strict_leak)[0]
    if ok.size == 0:
        ok = np.array([0])
    pick = np.unique(np.linspace(0, ok.size - 1, n_probes).round().astype(int))
    return ok[pick]


def run_single(config):
    config.validate()
    if config.sweep:
        raise ConfigError("run_single got a sweep configuration")
    model = config.build_model()
    gates = {}

    n_max = config.n_max
    dim = model.hamiltonian.shape[0]
    if n_max is None:
        n_max = _default_n_max(model, dim)
    kd = lanczos(model.hamiltonian, model.probe, n_max=n_max,
                 b_tol=config.b_tol, max_basis_bytes=config.max_basis_bytes)
    _gate(gates, "orthonormality", kd.orthonormality_residual(),
          ORTHONORMALITY_GATE)

    base = np.linspace(0.0, config.t_max, config.t_points)
    wf = chain_dynamics.evolve_phi(kd.b, base, leak_tol=config.leak_tol,
                                   terminated=kd.terminated)

    cl = landscape.correlation_landscape(kd, model.initial_state,
                                         stripe_width=config.effective_stripe_width())
    _gate(gates, "landscape_symmetry",
          float(np.max(np.abs(cl.corr - cl.corr.T))), 0.0)
    eigmin = float(np.linalg.eigvalsh(cl.corr)[0])
    _gate(gates, "landscape_psd", eigmin, PSD_GATE, upper=False)

    sd = exact_reference.eigendecompose(model.hamiltonian)
    f_exact = exact_reference.exact_qfi(sd, model.initial_state, model.probe, base)

    grid = _refined_grid(base, f_exact)
    if grid.size != base.size:
        wf = chain_dynamics.evolve_phi(kd.b, grid, leak_tol=config.leak_tol,
                                       terminated=kd.terminated)
        f_exact = exact_reference.exact_qfi(sd, model.initial_state,
                                            model.probe, grid)
    _gate(gates, "chain_norm",
          float(np.max(np.abs(np.einsum("tn,tn->t", wf.phi, wf.phi) - 1.0))),
          NORM_GATE)

    sp = landscape.stripe_profile(cl)
    f_rec = landscape.qfi_reconstruct(wf, cl)
    f_var = landscape.qfi_variant(wf, sp, kd.c_norm)

    n = model.n_particles
    _gate(gates, "qfi_initial",
          float(abs(f_rec[0] - n) + abs(f_exact[0] - n)) / n, 1e-9)

    ts = analysis.detect_tstar(grid, f_exact)
    region = analysis.linear_region(kd.b)
    xi = chain_dynamics.delocalization_profile(wf)
    comp = chain_dynamics.krylov_complexity(wf)
    growth = analysis.early_growth_fit(grid, f_exact, n)

    nu_ratio = None
    if region is not None and cl.n_star is not None and cl.n_star > 0:
        nu_ratio = region.n_l / cl.n_star
    trace = analysis.QfiTrace(
        t_grid=grid, f_exact=f_exact, f_reconstructed=f_rec, f_variant=f_var,
        leak_flags=wf.leak_flags, complexity=comp, xi=xi, n_particles=n,
        t_star=ts.t_star, f_star=ts.f_star, tstar_boundary=ts.boundary,
        n_star=cl.n_star, n_l=region.n_l if region else None,
        alpha=region.alpha if region else None,
        linear_r2=region.r_squared if region else None,
        nu_ratio=nu_ratio,
        depth_bound=analysis.depth_witness(max(ts.f_star, 0.0), n),
        growth_rate=growth[0] if growth else None,
        growth_r2=growth[1] if growth else None,
    )
    prop = analysis.proposition_check(trace, wf, nu=config.nu)

    probes = None
    if config.with_projection:
        idx = _select_probes(wf, config.n_probes)
        proj = exact_reference.project_phi(sd, kd, grid[idx])
        dev = float(np.max(np.abs(proj.phi - wf.phi[idx])))
        probes = ProbeComparison(
            t_probes=grid[idx], phi_projected=proj.phi,
            phi_chain=wf.phi[idx], max_abs_deviation=dev,
            imag_residue=proj.imag_residue,
        )
        gates["probe_deviation"] = dev

    return SingleRunResult(
        config=config, model=model, decomposition=kd, wavefunction=wf,
        correlation=cl, stripe=sp, trace=trace, proposition=prop,
        probes=probes, gates=gates,
    )


@dataclass
class SweepResult:
    members: list
    fit: analysis.ScalingFit | None
    sizes: np.ndarray


def _member_config(config, size):
    if config.model == "twisting":
        return replace(config, n_particles=int(size), sweep=None)
    return replace(config, j_top=float(size) / 4.0, sweep=None)


def _run_member(args):
    config, size = args
    return run_single(_member_config(config, size))


def run_sweep(config):
    """One run per size in config.sweep (N for twisting, N = 4 J for the
    coupled tops), aggregated in ascending size order, plus the t_star
    versus ln N fit when enough sizes are present."""
    config.validate()
    if not config.sweep:
        raise ConfigError("run_sweep needs a nonempty sweep list")
    sizes = sorted(float(s) for s in set(config.sweep))
    tasks = [(config, s) for s in sizes]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            members = list(pool.map(_run_member, tasks))
    else:
        members = [_run_member(t) for t in tasks]
    fit = None
    if len(sizes) >= 4:
        fit = analysis.scaling_fit(
            [m.trace.n_particles for m in members],
            [m.trace.t_star for m in members],
        )
    return SweepResult(members=members, fit=fit,
                       sizes=np.asarray(sizes, dtype=float))
