"""Command-line front end.

Subcommands:
  single    one model instance end to end, CSV bundle + figures
  sweep     the same pipeline across a list of sizes, plus the t* scaling fit
  selftest  small-system oracle-equivalence checks (seconds)

Configuration comes from flags, optionally seeded by a key = value file
(--config).  Flags win over the file, the file wins over defaults.  The
output directory defaults to ./krylovqfi_runs, overridable with the
KRYLOVQFI_OUTDIR environment variable; --out wins over both.

Exit codes: 0 success, 2 configuration error, 3 resource refusal,
4 invariant gate or selftest failure.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline, report
from .errors import ConfigError, InvariantGateError, ResourceRefusalError

ENV_OUTDIR = "KRYLOVQFI_OUTDIR"

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _parse_bool(key, raw):
    low = raw.strip().lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ConfigError(f"key '{key}': expected a boolean, got '{raw}'")


def _parse_sweep(raw):
    try:
        return [float(tok) for tok in str(raw).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"key 'sweep': expected numbers, got '{raw}'") from None


_COERCERS = {
    "model": str,
    "n_particles": int,
    "j_top": float,
    "chi": float,
    "omega": float,
    "coupling": float,
    "t_max": float,
    "t_points": int,
    "n_max": int,
    "b_tol": float,
    "leak_tol": float,
    "stripe_width": int,
    "nu": float,
    "n_probes": int,
    "with_projection": None,  # bool, handled explicitly
    "max_basis_bytes": int,
    "sweep": None,  # list, handled explicitly
    "jobs": int,
    "out_dir": str,
    "figures": None,  # bool
}


def parse_config_file(path):
    """key = value lines (# comments allowed) into a config dict."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{raw}'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _COERCERS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        if key == "sweep":
            values[key] = _parse_sweep(val)
        elif key in ("with_projection", "figures"):
            values[key] = _parse_bool(key, val)
        else:
            try:
                values[key] = _COERCERS[key](val)
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: key '{key}': cannot parse '{val}'") from None
    return values


def build_parser():
    parser = argparse.ArgumentParser(
        prog="krylovqfi",
        description="Fisher-information growth from operator-chain "
                    "delocalization, with exact cross checks.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file applied before flags")
    common.add_argument("--model", choices=pipeline.MODELS)
    common.add_argument("--n-particles", "-N", type=int, dest="n_particles",
                        help="particle number for the twisting model")
    common.add_argument("--j-top", type=float, dest="j_top",
                        help="spin per top for the coupled-tops model (N = 4J)")
    common.add_argument("--chi", type=float)
    common.add_argument("--omega", type=float)
    common.add_argument("--coupling", type=float,
                        help="coupled-tops anisotropy c in [-1, 1]")
    common.add_argument("--t-max", type=float, dest="t_max")
    common.add_argument("--t-points", type=int, dest="t_points")
    common.add_argument("--n-max", type=int, dest="n_max",
                        help="chain depth cap (default min(4N, d^2-1))")
    common.add_argument("--b-tol", type=float, dest="b_tol")
    common.add_argument("--leak-tol", type=float, dest="leak_tol")
    common.add_argument("--stripe-width", type=int, dest="stripe_width")
    common.add_argument("--nu", type=float)
    common.add_argument("--n-probes", type=int, dest="n_probes")
    common.add_argument("--no-projection", action="store_true",
                        help="skip the Heisenberg projection cross check")
    common.add_argument("--max-basis-bytes", type=int, dest="max_basis_bytes")
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--no-figures", action="store_true",
                        help="CSVs only, no png rendering")

    sub.add_parser("single", parents=[common],
                   help="run one model instance").set_defaults(func=cmd_single)
    sw = sub.add_parser("sweep", parents=[common],
                        help="run a size sweep and fit t* against ln N")
    sw.add_argument("--sizes", required=False,
                    help="comma-separated sizes (N, or 4J for coupled tops)")
    sw.set_defaults(func=cmd_sweep)
    sub.add_parser("selftest",
                   help="small-system oracle equivalence, exit 0 when clean"
                   ).set_defaults(func=cmd_selftest)
    return parser


def assemble_config(args):
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for key in _COERCERS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "no_projection", False):
        values["with_projection"] = False
    if getattr(args, "no_figures", False):
        values["figures"] = False
    if getattr(args, "out", None):
        values["out_dir"] = args.out
    if getattr(args, "sizes", None):
        values["sweep"] = _parse_sweep(args.sizes)
    try:
        config = pipeline.RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    config.validate()
    return config


def _resolve_out_dir(config, default_leaf):
    if config.out_dir:
        return Path(config.out_dir)
    base = Path(os.environ.get(ENV_OUTDIR, "krylovqfi_runs"))
    return base / default_leaf


def cmd_single(args):
    config = assemble_config(args)
    if config.sweep:
        raise ConfigError("sweep list given; use the sweep subcommand")
    result = pipeline.run_single(config)
    leaf = result.model.label
    out = report.write_single_run(_resolve_out_dir(config, leaf), result,
                                  figures=config.figures)
    t = result.trace
    print(f"{result.model.label}: t* = {t.t_star:.4f}, "
          f"F*/N^2 = {t.f_star / t.n_particles**2:.4f}, "
          f"n_L = {t.n_l}, n* = {t.n_star}, "
          f"depth bound {t.depth_bound}")
    print(f"wrote {out}")
    return 0


def cmd_sweep(args):
    config = assemble_config(args)
    if not config.sweep:
        raise ConfigError("sweep needs --sizes or a 'sweep' key in the config")
    sweep = pipeline.run_sweep(config)
    label = "twisting" if config.model == "twisting" else "coupled_tops"
    sizes = f"{int(min(sweep.sizes))}-{int(max(sweep.sizes))}"
    out = report.write_sweep(_resolve_out_dir(config, f"sweep_{label}_{sizes}"),
                             sweep, figures=config.figures)
    for member in sweep.members:
        t = member.trace
        print(f"  N = {t.n_particles:4d}: t* = {t.t_star:.4f}, "
              f"F*/N^2 = {t.f_star / t.n_particles**2:.4f}")
    if sweep.fit is not None:
        print(f"t* = {sweep.fit.slope:.4f} ln N + {sweep.fit.intercept:.4f} "
              f"(R^2 = {sweep.fit.r_squared:.5f})")
    else:
        print("scaling fit skipped: needs at least 4 distinct sizes")
    print(f"wrote {out}")
    return 0


def _selftest_cases():
    yield "twisting N=2", pipeline.RunConfig(
        model="twisting", n_particles=2, t_max=6.0, t_points=151, n_max=8)
    yield "twisting N=4", pipeline.RunConfig(
        model="twisting", n_particles=4, t_max=6.0, t_points=151, n_max=24)
    yield "coupled tops J=1/2", pipeline.RunConfig(
        model="coupled_tops", j_top=0.5, t_max=4.0, t_points=151, n_max=15)
    yield "coupled tops J=1, c=1", pipeline.RunConfig(
        model="coupled_tops", j_top=1.0, coupling=1.0, t_max=4.0,
        t_points=151, n_max=80)


def cmd_selftest(args):
    failures = 0
    for name, config in _selftest_cases():
        result = pipeline.run_single(config)
        t = result.trace
        ok = ~t.leak_flags
        rel = np.max(np.abs(t.f_reconstructed[ok] - t.f_exact[ok])
                     / np.maximum(t.f_exact[ok], t.n_particles))
        probe_dev = result.probes.max_abs_deviation
        good = rel <= 1e-6 and probe_dev <= 1e-8
        status = "ok" if good else "FAIL"
        failures += 0 if good else 1
        print(f"selftest {name}: {status} "
              f"(QFI rel dev {rel:.2e}, probe dev {probe_dev:.2e}, "
              f"chain {'closed' if result.decomposition.terminated else 'open'})")
    if failures:
        print(f"selftest: {failures} case(s) failed", file=sys.stderr)
        return 4
    print("selftest: all cases passed")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceRefusalError as exc:
        print(f"resource refusal: {exc}", file=sys.stderr)
        return 3
    except InvariantGateError as exc:
        print(f"invariant gate failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
