"""CSV and figure output for single runs and sweeps.

All CSVs have a one-line header and a fixed column order, with floats
serialized at 17 significant digits so that identical configurations
produce byte-identical files.  Files are written atomically (temp file
plus rename) so a crashed run never leaves a truncated table behind.

Figures are rendered with the Agg backend into the same directory as the
CSVs they illustrate; pass figures=False to skip them.
"""

import json
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

FLOAT_FMT = "%.17g"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT % x


def _write_atomic(path, text):
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    _write_atomic(path, "\n".join(lines) + "\n")


def write_lanczos_csv(path, kd):
    rows = [(n + 1, bv) for n, bv in enumerate(kd.b)]
    write_csv(path, ["n", "b_n"], rows)


def write_phi_csv(path, wf):
    t = wf.t_grid
    rows = []
    for k in range(t.size):
        tk = t[k]
        rows.extend((tk, n, wf.phi[k, n]) for n in range(wf.n_sites))
    write_csv(path, ["t", "n", "phi_n"], rows)


def write_chain_csv(path, wf, complexity, xi):
    rows = list(zip(wf.t_grid, complexity, xi, wf.leakage,
                    wf.leak_flags.astype(int)))
    write_csv(path, ["t", "complexity", "xi", "leakage", "leakage_flag"], rows)


def write_corr_csv(path, cl, n_particles):
    scale = 4.0 * cl.c_norm**2 / n_particles**2
    m1 = cl.corr.shape[0]
    rows = []
    for m in range(m1):
        rows.extend((m, n, cl.corr[m, n], scale * cl.corr[m, n])
                    for n in range(m1))
    write_csv(path, ["m", "n", "value", "value_rescaled"], rows)


def write_stripe_csv(path, sp):
    m1 = sp.f.size
    rows = [(n, sp.f[n], sp.f_bar[n] if n < m1 - 1 else None)
            for n in range(m1)]
    write_csv(path, ["n", "f", "f_bar"], rows)


def write_qfi_csv(path, trace):
    rows = list(zip(trace.t_grid, trace.f_exact, trace.f_reconstructed,
                    trace.f_variant, trace.leak_flags.astype(int)))
    write_csv(path, ["t", "F_exact", "F_reconstructed", "F_variant",
                     "leakage_flag"], rows)


SUMMARY_COLUMNS = ["N", "t_star", "f_star_over_N2", "n_L", "alpha", "n_star",
                   "nu_ratio", "tail_mass", "depth_bound"]


def summary_row(trace, proposition):
    n = trace.n_particles
    return [n, trace.t_star, trace.f_star / n**2, trace.n_l, trace.alpha,
            trace.n_star, trace.nu_ratio, proposition.tail_mass,
            trace.depth_bound]


def write_summary_csv(path, trace, proposition):
    write_csv(path, SUMMARY_COLUMNS, [summary_row(trace, proposition)])


def write_probes_csv(path, probes):
    rows = []
    for k in range(probes.t_probes.size):
        tk = probes.t_probes[k]
        rows.extend((tk, n, probes.phi_projected[k, n])
                    for n in range(probes.phi_projected.shape[1]))
    write_csv(path, ["t", "n", "phi_projected"], rows)


def write_run_meta(path, result):
    kd = result.decomposition
    trace = result.trace
    meta = {
        "model": result.model.label,
        "n_particles": trace.n_particles,
        "chain_length": int(kd.n_basis),
        "terminated": bool(kd.terminated),
        "c_norm": kd.c_norm,
        "tstar_boundary": bool(trace.tstar_boundary),
        "linear_fit_r2": trace.linear_r2,
        "stripe_width": result.correlation.stripe_width,
        "growth_rate": trace.growth_rate,
        "growth_r2": trace.growth_r2,
        "alpha_doubled": None if trace.alpha is None else 2 * trace.alpha,
        "nu_pass": result.proposition.nu_pass,
        "tail_pass": result.proposition.tail_pass,
        "log_complexity_at_tstar": result.proposition.log_complexity,
        "log_n_L": result.proposition.log_n_l,
        "log_N": result.proposition.log_n_particles,
        "gates": result.gates,
        "probe_max_abs_deviation":
            None if result.probes is None else result.probes.max_abs_deviation,
        "probe_imag_residue":
            None if result.probes is None else result.probes.imag_residue,
        "tail_window_note":
            "xi fitted on sites beyond the profile peak with phi^2 in "
            "[1e-12, 1e-3]",
    }
    _write_atomic(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _tstar_index(trace):
    return int(np.argmin(np.abs(trace.t_grid - trace.t_star)))


def render_single_figures(out_dir, result):
    out = Path(out_dir)
    trace = result.trace
    kd = result.decomposition
    wf = result.wavefunction
    n = trace.n_particles

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.semilogy(trace.t_grid, np.maximum(trace.f_exact, 1e-300), "k-",
                lw=1.8, label="exact")
    ax.semilogy(trace.t_grid, np.maximum(trace.f_reconstructed, 1e-300),
                "C0--", lw=1.4, label="chain reconstruction")
    pos = trace.f_variant > 0
    ax.semilogy(trace.t_grid[pos], trace.f_variant[pos], "C1:", lw=1.4,
                label="stripe variant")
    ax.axvline(trace.t_star, color="0.6", ls="-.", lw=1)
    if np.any(trace.leak_flags):
        t0 = trace.t_grid[np.argmax(trace.leak_flags)]
        ax.axvspan(t0, trace.t_grid[-1], color="0.92", zorder=0)
    ax.set_xlabel("t")
    ax.set_ylabel("Fisher information")
    ax.set_title(f"{result.model.label}: QFI growth, max/N$^2$ = "
                 f"{trace.f_star / n**2:.3f}")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(out / "fig_qfi.png", dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    m = kd.b.size
    ax.plot(np.arange(1, m + 1), kd.b, "C0.", ms=3, label="$b_n$")
    if trace.n_l is not None and trace.alpha is not None:
        ax.plot([1, trace.n_l], np.array([1, trace.n_l]) * trace.alpha, "C3-",
                lw=1, label=f"linear fit, slope {trace.alpha:.3f}")
        ax.axvline(trace.n_l, color="C3", ls=":", lw=1)
    ax2 = ax.twinx()
    k = _tstar_index(trace)
    ax2.fill_between(np.arange(wf.n_sites), wf.phi[k] ** 2, color="C2",
                     alpha=0.35, label=r"$\varphi_n(t^*)^2$")
    ax2.set_ylabel(r"$\varphi_n(t^*)^2$")
    ax.set_xlabel("chain index n")
    ax.set_ylabel("hopping amplitude")
    ax.set_title(f"{result.model.label}: chain amplitudes and the "
                 "wavefunction at $t^*$")
    ax.legend(frameon=False, fontsize=9, loc="upper left")
    fig.tight_layout()
    fig.savefig(out / "fig_lanczos.png", dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(5.6, 4.6))
    scale = 4.0 * kd.c_norm**2 / n**2
    im = ax.imshow(result.correlation.corr * scale, origin="lower",
                   aspect="equal", cmap="magma")
    fig.colorbar(im, ax=ax, label=r"Corr$(m,n) \cdot 4 c^2 / N^2$")
    if result.correlation.n_star is not None:
        ns = result.correlation.n_star
        ax.plot(ns, ns, "wx", ms=8)
    ax.set_xlabel("n")
    ax.set_ylabel("m")
    ax.set_title(f"{result.model.label}: correlation landscape")
    fig.tight_layout()
    fig.savefig(out / "fig_landscape.png", dpi=150)
    plt.close(fig)

    sp = result.stripe
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(np.arange(sp.f.size), sp.f * scale, "C0-", lw=1, label="$f_n$")
    ax.plot(np.arange(sp.f_bar.size) + 0.5, sp.f_bar * scale, "C1-", lw=1.4,
            label=r"$\bar f_n$")
    if sp.n_c is not None:
        ax.axvline(sp.n_c, color="0.5", ls=":", lw=1, label=f"$n_c$ = {sp.n_c}")
    if result.correlation.n_star is not None:
        ax.axvline(result.correlation.n_star, color="C3", ls="-.", lw=1,
                   label=f"$n^*$ = {result.correlation.n_star}")
    ax.set_xlabel("chain index n")
    ax.set_ylabel(r"stripe weight $\cdot\, 4 c^2 / N^2$")
    ax.set_title(f"{result.model.label}: stripe profile")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(out / "fig_stripe.png", dpi=150)
    plt.close(fig)


def render_sweep_figure(out_dir, sweep):
    ns = np.array([m.trace.n_particles for m in sweep.members], dtype=float)
    ts = np.array([m.trace.t_star for m in sweep.members])
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.semilogx(ns, ts, "C0o", ms=5)
    if sweep.fit is not None:
        xs = np.linspace(np.log(ns.min()), np.log(ns.max()), 50)
        ax.semilogx(np.exp(xs), sweep.fit.slope * xs + sweep.fit.intercept,
                    "C3-", lw=1,
                    label=(f"$t^* = {sweep.fit.slope:.2f} \\ln N "
                           f"{sweep.fit.intercept:+.2f}$, "
                           f"$R^2$={sweep.fit.r_squared:.4f}"))
        ax.legend(frameon=False, fontsize=9)
    ax.set_xlabel("N")
    ax.set_ylabel("$t^*$")
    ax.set_title("optimal time versus system size")
    fig.tight_layout()
    fig.savefig(Path(out_dir) / "fig_scaling.png", dpi=150)
    plt.close(fig)


def write_single_run(out_dir, result, figures=True):
    """Emit the full report bundle for one run into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kd = result.decomposition
    wf = result.wavefunction
    trace = result.trace
    write_lanczos_csv(out / "lanczos.csv", kd)
    write_phi_csv(out / "phi.csv", wf)
    write_chain_csv(out / "chain.csv", wf, trace.complexity, trace.xi)
    write_corr_csv(out / "corr.csv", result.correlation, trace.n_particles)
    write_stripe_csv(out / "stripe.csv", result.stripe)
    write_qfi_csv(out / "qfi.csv", trace)
    write_summary_csv(out / "summary.csv", trace, result.proposition)
    if result.probes is not None:
        write_probes_csv(out / "exact_probes.csv", result.probes)
    write_run_meta(out / "run_meta.json", result)
    if figures:
        render_single_figures(out, result)
    return out


def write_sweep(out_dir, sweep, figures=True):
    """Per-member subdirectories plus the aggregate table and fit."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for member in sweep.members:
        sub = out / f"N{member.trace.n_particles}"
        write_single_run(sub, member, figures=figures)
        rows.append(summary_row(member.trace, member.proposition))
    write_csv(out / "sweep.csv", SUMMARY_COLUMNS, rows)
    if sweep.fit is not None:
        write_csv(out / "sweep_fit.csv",
                  ["slope", "intercept", "r_squared", "n_points"],
                  [[sweep.fit.slope, sweep.fit.intercept,
                    sweep.fit.r_squared, sweep.fit.n_points]])
    if figures:
        render_sweep_figure(out, sweep)
    return out
