"""Report bundle: file inventory, header contracts, lossless float
serialization, the rescaled landscape column, and sweep aggregation."""

import json

import numpy as np
import pytest

from krylovqfi.pipeline import RunConfig, run_single, run_sweep
from krylovqfi.report import (
    SUMMARY_COLUMNS,
    _fmt,
    summary_row,
    write_csv,
    write_single_run,
    write_sweep,
)

CSV_FILES = {"lanczos.csv", "phi.csv", "chain.csv", "corr.csv", "stripe.csv",
             "qfi.csv", "summary.csv", "exact_probes.csv"}
FIG_FILES = {"fig_qfi.png", "fig_lanczos.png", "fig_landscape.png",
             "fig_stripe.png"}


@pytest.fixture(scope="module")
def run4():
    return run_single(RunConfig(model="twisting", n_particles=4, n_max=24,
                                t_points=81))


@pytest.fixture(scope="module")
def bundle(run4, tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    write_single_run(out, run4)
    return out


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_fmt_rules():
    assert _fmt(None) == ""
    assert _fmt(True) == "1" and _fmt(False) == "0"
    assert _fmt(np.bool_(True)) == "1"
    assert _fmt(7) == "7" and _fmt(np.int64(-3)) == "-3"
    for x in (0.1, 1.0 / 3.0, np.pi, 1e-300, -2.5e17):
        assert float(_fmt(x)) == x  # 17 significant digits are lossless


def test_file_inventory(bundle):
    names = {p.name for p in bundle.iterdir()}
    assert CSV_FILES <= names
    assert FIG_FILES <= names
    assert "run_meta.json" in names
    assert not any(n.endswith(".tmp") for n in names)


def test_headers(bundle):
    expected = {
        "lanczos.csv": ["n", "b_n"],
        "phi.csv": ["t", "n", "phi_n"],
        "chain.csv": ["t", "complexity", "xi", "leakage", "leakage_flag"],
        "corr.csv": ["m", "n", "value", "value_rescaled"],
        "stripe.csv": ["n", "f", "f_bar"],
        "qfi.csv": ["t", "F_exact", "F_reconstructed", "F_variant",
                    "leakage_flag"],
        "summary.csv": SUMMARY_COLUMNS,
        "exact_probes.csv": ["t", "n", "phi_projected"],
    }
    for name, header in expected.items():
        got, _ = read_rows(bundle / name)
        assert got == header, name


def test_qfi_roundtrip_exact(bundle, run4):
    _, rows = read_rows(bundle / "qfi.csv")
    trace = run4.trace
    assert len(rows) == trace.t_grid.size
    got = np.array([[float(r[0]), float(r[1]), float(r[2]), float(r[3])]
                    for r in rows])
    assert np.array_equal(got[:, 0], trace.t_grid)
    assert np.array_equal(got[:, 1], trace.f_exact)
    assert np.array_equal(got[:, 2], trace.f_reconstructed)
    assert np.array_equal(got[:, 3], trace.f_variant)
    flags = np.array([int(r[4]) for r in rows], dtype=bool)
    assert np.array_equal(flags, trace.leak_flags)


def test_lanczos_roundtrip(bundle, run4):
    _, rows = read_rows(bundle / "lanczos.csv")
    b = run4.decomposition.b
    assert [int(r[0]) for r in rows] == list(range(1, b.size + 1))
    assert np.array_equal(np.array([float(r[1]) for r in rows]), b)


def test_corr_rescaled_column(bundle, run4):
    _, rows = read_rows(bundle / "corr.csv")
    cl = run4.correlation
    n = run4.trace.n_particles
    scale = 4.0 * cl.c_norm**2 / n**2
    m1 = cl.corr.shape[0]
    assert len(rows) == m1 * m1
    for r in rows[:: max(1, len(rows) // 97)]:  # spot-check a spread
        m, k = int(r[0]), int(r[1])
        assert float(r[2]) == cl.corr[m, k]
        assert float(r[3]) == scale * cl.corr[m, k]
    # the rescaled corner is the initial QFI density
    first = rows[0]
    assert float(first[3]) == pytest.approx(1.0 / n, rel=1e-12)


def test_stripe_last_fbar_blank(bundle, run4):
    _, rows = read_rows(bundle / "stripe.csv")
    assert len(rows) == run4.stripe.f.size
    assert rows[-1][2] == ""  # f_bar is a midpoint average, one short
    assert float(rows[0][1]) == run4.stripe.f[0]


def test_summary_row(bundle, run4):
    _, rows = read_rows(bundle / "summary.csv")
    assert len(rows) == 1
    row = summary_row(run4.trace, run4.proposition)
    assert int(rows[0][0]) == row[0] == 4
    assert float(rows[0][1]) == row[1]
    assert float(rows[0][2]) == row[2]
    assert int(rows[0][-1]) == row[-1]


def test_run_meta(bundle, run4):
    meta = json.loads((bundle / "run_meta.json").read_text())
    assert meta["model"] == run4.model.label
    assert meta["n_particles"] == 4
    assert meta["chain_length"] == run4.decomposition.n_basis
    assert meta["terminated"] is True
    assert meta["gates"] == run4.gates
    assert meta["probe_max_abs_deviation"] == run4.probes.max_abs_deviation
    if run4.trace.alpha is not None:
        assert meta["alpha_doubled"] == 2 * run4.trace.alpha


def test_no_figures_and_no_probes(tmp_path):
    res = run_single(RunConfig(model="twisting", n_particles=4, n_max=24,
                               t_points=51, with_projection=False))
    out = write_single_run(tmp_path / "plain", res, figures=False)
    names = {p.name for p in out.iterdir()}
    assert not any(n.endswith(".png") for n in names)
    assert "exact_probes.csv" not in names
    assert "qfi.csv" in names


def test_rewrite_is_byte_identical(bundle, run4, tmp_path):
    out = write_single_run(tmp_path / "again", run4, figures=False)
    for name in ("qfi.csv", "lanczos.csv", "corr.csv", "summary.csv",
                 "run_meta.json"):
        assert (out / name).read_bytes() == (bundle / name).read_bytes()


def test_write_csv_none_cell(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["a", "b"], [[1, None], [2.5, 3]])
    assert p.read_text() == "a,b\n1,\n2.5,3\n"


def test_write_sweep(tmp_path):
    cfg = RunConfig(model="twisting", sweep=[4, 6, 8, 10], t_points=51,
                    with_projection=False)
    sweep = run_sweep(cfg)
    out = write_sweep(tmp_path / "sw", sweep, figures=True)
    for n in (4, 6, 8, 10):
        assert (out / f"N{n}" / "summary.csv").is_file()
        assert (out / f"N{n}" / "lanczos.csv").is_file()
    header, rows = read_rows(out / "sweep.csv")
    assert header == SUMMARY_COLUMNS
    assert [int(r[0]) for r in rows] == [4, 6, 8, 10]
    _, fit_rows = read_rows(out / "sweep_fit.csv")
    assert int(fit_rows[0][3]) == 4
    assert float(fit_rows[0][0]) == sweep.fit.slope
    assert (out / "fig_scaling.png").is_file()
