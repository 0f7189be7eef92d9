import json
from pathlib import Path

import pytest

from tenet.cli import main

SPEC = {
    "n_series": 5,
    "length": 1500,
    "seed": 11,
    "noise_std": 0.5,
    "n_sectors": 2,
    "couplings": [
        {"source": 0, "target": 1, "lag": 1, "strength": 1.0, "kind": "linear"},
        {"source": 3, "target": 2, "lag": 5, "strength": 1.0, "kind": "threshold"},
    ],
}


@pytest.fixture
def dataset(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SPEC))
    assert main(["synth", "--spec", str(spec), "--out", str(tmp_path / "data")]) == 0
    return tmp_path / "data"


def test_synth_outputs(dataset, tmp_path):
    header = (dataset / "prices.csv").read_text().splitlines()[0]
    assert header == "timestamp,S0,S1,S2,S3,S4"
    assert (dataset / "ground_truth.csv").read_text().splitlines()[1:] == ["S0,S1,1,1.0,linear", "S3,S2,5,1.0,threshold"]
    spec = tmp_path / "spec.json"
    main(["synth", "--spec", str(spec), "--out", str(tmp_path / "again")])
    for name in ("prices.csv", "sectors.csv", "ground_truth.csv"):
        assert (tmp_path / "again" / name).read_bytes() == (dataset / name).read_bytes()


def test_analyze_outputs(dataset, tmp_path):
    out = tmp_path / "run"
    rc = main(
        ["analyze", "--prices", str(dataset / "prices.csv"), "--sectors", str(dataset / "sectors.csv"),
         "--lags", "1,5,10", "--out", str(out)]
    )
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["pvalue"] == 0.01
    assert [r["link_count"] for r in manifest["lags"]] == [1, 1, 0]
    assert manifest["lags"][0]["alpha"] == 0.01 / 25
    for entry in manifest["files"]:
        assert (out / entry["path"]).exists() and len(entry["sha256"]) == 64
    for name in ("link_counts.csv", "magnitudes.csv", "te_histograms.csv", "cross_lag_correlation.csv",
                 "degree_distributions.csv", "te_fits.csv", "sector_stats.csv"):
        assert (out / name).exists(), name
    edges = (out / "lag_001" / "network_edges.csv").read_text().splitlines()
    assert edges[1].startswith("S0,S1,")


def test_config_file_and_override(dataset, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"prices": str(dataset / "prices.csv"), "lags": [1, 2], "out": str(tmp_path / "a")}))
    assert main(["analyze", "--config", str(cfg), "--lags", "5"]) == 0
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config"]["lags"] == [5]


def test_hundred_node_scale_alpha_recorded(tmp_path):
    spec = dict(SPEC, n_series=98, length=400, couplings=[])
    p = tmp_path / "spec.json"
    p.write_text(json.dumps(spec))
    main(["synth", "--spec", str(p), "--out", str(tmp_path / "d")])
    assert main(["analyze", "--prices", str(tmp_path / "d" / "prices.csv"), "--lags", "1", "--out", str(tmp_path / "r")]) == 0
    m = json.loads((tmp_path / "r" / "manifest.json").read_text())
    assert m["lags"][0]["alpha"] == pytest.approx(1.0412328196584756e-06)
    assert m["config"]["lags"] == [1]


def test_default_lag_grid():
    from tenet.cli import RunConfig

    assert RunConfig().lags == [1, 5, 10, 20, 30, 40, 50, 60]


@pytest.mark.parametrize(
    "args",
    [
        ["--lags", ""],
        ["--tau", "2", "--lags", "1,4"],
        ["--pvalue", "1.5"],
        ["--validator", "permutation", "--surrogates", "999"],
    ],
)
def test_config_errors_exit_1(dataset, tmp_path, args, capsys):
    out = tmp_path / "bad"
    rc = main(["analyze", "--prices", str(dataset / "prices.csv"), "--out", str(out)] + args)
    assert rc == 1
    assert not (out / "manifest.json").exists()


def test_bad_input_file_exit_1(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("timestamp,A,B\n1,1,2\n2,0,2\n3,1,1\n")
    assert main(["analyze", "--prices", str(p), "--lags", "1", "--out", str(tmp_path / "o")]) == 1


def test_degenerate_input_exit_code(tmp_path):
    p = tmp_path / "p.csv"
    rows = "\n".join(f"{i},1,{1 + i % 3}" for i in range(20))
    p.write_text("timestamp,A,B\n" + rows + "\n")
    assert main(["analyze", "--prices", str(p), "--lags", "1", "--out", str(tmp_path / "o")]) == 1


def test_permutation_validator_runs(dataset, tmp_path):
    out = tmp_path / "perm"
    rc = main(["analyze", "--prices", str(dataset / "prices.csv"), "--lags", "1", "--validator", "permutation",
               "--surrogates", "199", "--correction", "none", "--out", str(out)])
    assert rc == 0
    assert (out / "lag_001" / "pvalues.csv").exists()
    m = json.loads((out / "manifest.json").read_text())
    assert m["lags"][0]["link_count"] >= 1


def test_calibrate(tmp_path):
    out = tmp_path / "cal.json"
    assert main(["calibrate", "--trials", "300", "--length", "500", "--pvalues", "0.05", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert len(rep["entries"]) == 2
    assert main(["calibrate", "--trials", "0", "--out", str(out)]) == 1
