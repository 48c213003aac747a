import csv
import json

import pytest

from stagwalk.experiments import (
    COMPILE_COLUMNS,
    SEARCH_COLUMNS,
    TESSELLATION_COLUMNS,
    TROTTER_COLUMNS,
    ExperimentSpec,
    checks_exponent,
    linear_fit,
    replay_search_row,
    run_compile_verify,
    run_search_scaling,
    run_tessellation_scaling,
    run_trotter_scaling,
    search_row_dict,
    tessellation_realization,
    trotter_graphs,
    trotter_table,
)
from stagwalk.graph import generate_rgg, is_connected
from stagwalk.walk import ResourceLimitError


def header(path):
    with open(path) as fh:
        return next(csv.reader(fh))


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(kind="nonsense")
    with pytest.raises(ValueError):
        ExperimentSpec(kind="search", boundary="klein")
    assert ExperimentSpec(kind="search", sizes=[128, 64]).sizes == [64, 128]


def test_single_realization_reproducible():
    a = tessellation_realization(4, 2.0, 11, "open")
    b = tessellation_realization(4, 2.0, 11, "open")
    assert a == b
    assert 1 <= a["T"] <= 3


def test_small_tessellation_run(tmp_path):
    spec = ExperimentSpec("tessellation", sizes=[32, 64, 128], rhos=[2.0], budget=640, out_dir=str(tmp_path))
    res = run_tessellation_scaling(spec)
    assert [r["realizations"] for r in res.summary] == [20, 10, 5]
    assert res.mean_T(128, 2.0) > res.mean_T(32, 2.0)
    assert res.fits[2.0].slope > 0
    assert checks_exponent(res, 2.0) > 1.0
    for row in res.rows:
        assert is_connected(generate_rgg(row["N"], row["rho"], "open", row["seed"]))
    assert header(tmp_path / "tessellation.csv") == TESSELLATION_COLUMNS
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest["seeds"]) == len(res.rows)
    assert manifest["counters"]["rejected_seeds"] == sum(len(s["rejected"]) for s in manifest["seeds"])


def test_tessellation_run_independent_of_workers():
    spec = dict(sizes=[32, 64], rhos=[1.0], budget=200)
    a = run_tessellation_scaling(ExperimentSpec("tessellation", workers=1, **spec))
    b = run_tessellation_scaling(ExperimentSpec("tessellation", workers=2, **spec))
    assert a.rows == b.rows


def test_unconditioned_seeds_are_sequential():
    spec = ExperimentSpec("tessellation", sizes=[16], rhos=[1.0], budget=64, seed=5, require_connected=False)
    res = run_tessellation_scaling(spec)
    assert [r["seed"] for r in res.rows] == [5, 6, 7, 8]


def test_linear_fit():
    fit = linear_fit([0, 1, 2], [1, 3, 5])
    assert (fit.slope, fit.intercept, fit.r2) == pytest.approx((2, 1, 1))


def test_search_run_and_replay(tmp_path):
    spec = ExperimentSpec("search", sizes=[32, 48, 64], rhos=[2.0], boundary="periodic",
                          budget=96, out_dir=str(tmp_path))
    res, manifest = run_search_scaling(spec)
    assert len(res.rows) == 3 + 2 + 2
    assert header(tmp_path / "search.csv") == SEARCH_COLUMNS
    saved = json.loads((tmp_path / "manifest.json").read_text())
    with open(tmp_path / "search.csv") as fh:
        row = list(csv.DictReader(fh))[4]
    replayed = replay_search_row(saved, row)
    assert search_row_dict(replayed)["search_time"] == int(row["search_time"])
    assert replayed.theta_op == pytest.approx(float(row["theta_op"]))
    assert manifest.counters["realizations"] == 7


def test_search_spec_needs_one_rho():
    with pytest.raises(ValueError):
        run_search_scaling(ExperimentSpec("search", sizes=[16, 32, 64], rhos=[1.0, 2.0]))


def test_compile_sweep(tmp_path):
    rep = run_compile_verify(ExperimentSpec("compile", max_s=5, thetas_per_size=4, out_dir=str(tmp_path)))
    assert rep.ok
    assert rep.max_deviation < 1e-9
    assert len(rep.rows) == 20
    assert header(tmp_path / "compile.csv") == COMPILE_COLUMNS


def test_compile_sweep_resource_limit():
    with pytest.raises(ResourceLimitError):
        run_compile_verify(ExperimentSpec("compile", max_s=13))


def test_trotter_tables(tmp_path):
    graphs = trotter_graphs()
    assert set(graphs) == {"path3", "rgg16", "matching6"}
    table = trotter_table(graphs["path3"], [32, 64, 128, 256], t=1.0)
    assert table[0]["ratio"] is None
    assert all(0.375 <= r["ratio"] <= 0.625 for r in table[1:])
    rows = run_trotter_scaling(ExperimentSpec("trotter", ks=[8, 16], times=[1.0], out_dir=str(tmp_path)))
    assert max(r["error"] for r in rows if r["graph"] == "matching6") < 1e-12
    assert header(tmp_path / "trotter.csv") == TROTTER_COLUMNS
