"""End-to-end tests of the command-line interface."""

import csv
import json

import numpy as np
import pytest
import yaml

from ssglm.cli import main


@pytest.fixture()
def gauss_csv(tmp_path):
    rng = np.random.default_rng(17)
    n, p = 80, 8
    X = rng.standard_normal((n, p))
    Y = 0.3 + 1.5 * X[:, 0] - 1.2 * X[:, 4] + 0.4 * rng.standard_normal(n)
    path = tmp_path / "data.csv"
    header = ["y"] + [f"v{j}" for j in range(p)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(n):
            w.writerow([Y[i]] + list(X[i]))
    return str(path)


def test_fit_writes_results_and_json(gauss_csv, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["fit", "--input", gauss_csv, "--response", "y",
               "--family", "gaussian", "--selector", "sis", "--sis-cap", "4",
               "--B", "10", "--seed", "1", "--out", str(out)])
    assert rc == 0
    with open(out / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 9                 # intercept + 8 coefficients
    # sorted by ascending p-value; the signals (and intercept) lead
    top = {r["label"] for r in rows[:3]}
    assert {"v0", "v4"} <= top
    assert float(rows[0]["p_value"]) <= float(rows[-1]["p_value"])
    with open(out / "fit.json") as fh:
        payload = json.load(fh)
    assert len(payload["beta_hat"]) == 9
    assert payload["plan"]["B"] == 10
    assert len(payload["splits"]) == 10
    assert all(len(s["selected"]) <= 4 for s in payload["splits"])


def test_fit_deterministic_across_runs(gauss_csv, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["fit", "--input", gauss_csv, "--response", "y",
              "--sis-cap", "3", "--B", "6", "--seed", "5",
              "--out", str(out)])
        outs.append((out / "results.csv").read_text())
    assert outs[0] == outs[1]


def test_contrast_subcommand(gauss_csv, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["contrast", "--input", gauss_csv, "--response", "y",
               "--subset", "v0,v4", "--sis-cap", "3", "--B", "10",
               "--seed", "2", "--out", str(out)])
    assert rc == 0
    with open(out / "contrast.json") as fh:
        payload = json.load(fh)
    assert payload["subset"] == [1, 5]
    assert payload["labels"] == ["v0", "v4"]
    assert payload["df"] == 2
    assert payload["T"] > 0
    # joint null is wildly false here
    assert payload["p_value"] < 0.05
    msg = capsys.readouterr().out
    assert "T =" in msg


def test_contrast_difference_matrix(gauss_csv, tmp_path):
    out = tmp_path / "out"
    rc = main(["contrast", "--input", gauss_csv, "--response", "y",
               "--subset", "1,5", "--contrast-Q", "1,-1",
               "--contrast-R", "2.7", "--sis-cap", "3", "--B", "10",
               "--seed", "2", "--out", str(out)])
    assert rc == 0
    with open(out / "contrast.json") as fh:
        payload = json.load(fh)
    assert payload["Q"] == [[1.0, -1.0]]
    assert payload["R"] == [2.7]
    assert payload["df"] == 1


def test_simulate_subcommand(tmp_path):
    scenario = {
        "name": "cli-tiny", "family": "gaussian", "n": 50, "p": 8,
        "beta_spec": {"kind": "fixed", "indices": [2], "values": [1.0]},
        "B": 5, "replications": 2, "selector": "sis",
        "selector_options": {"d": 3}, "seed": 1,
    }
    spath = tmp_path / "scenario.yaml"
    spath.write_text(yaml.safe_dump(scenario))
    out = tmp_path / "out"
    rc = main(["simulate", "--scenario", str(spath), "--out", str(out)])
    assert rc == 0
    with open(out / "metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 9
    assert rows[0]["coef"] == "intercept"
    assert any(r["is_signal"] == "1" for r in rows)


def test_simulate_sweep_q(tmp_path):
    scenario = {
        "name": "cli-sweep", "family": "gaussian", "n": 50, "p": 6,
        "beta_spec": {"kind": "fixed", "indices": [1], "values": [1.0]},
        "B": 4, "replications": 2, "selector": "sis",
        "selector_options": {"d": 2}, "seed": 2,
    }
    spath = tmp_path / "scenario.yaml"
    spath.write_text(yaml.safe_dump(scenario))
    out = tmp_path / "out"
    rc = main(["simulate", "--scenario", str(spath),
               "--sweep-q", "0.4,0.6", "--out", str(out)])
    assert rc == 0
    with open(out / "plotdata_q_mse.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["q"] for r in rows] == ["0.4", "0.6"]


def test_config_file_with_flag_override(gauss_csv, tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump({"B": 6, "seed": 9, "sis_cap": 3}))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    main(["fit", "--input", gauss_csv, "--response", "y",
          "--config", str(cfg), "--out", str(out1)])
    # explicit flag beats the config value
    main(["fit", "--input", gauss_csv, "--response", "y",
          "--config", str(cfg), "--seed", "10", "--out", str(out2)])
    j1 = json.loads((out1 / "fit.json").read_text())
    j2 = json.loads((out2 / "fit.json").read_text())
    assert j1["plan"]["B"] == 6 and j2["plan"]["B"] == 6
    assert j1["plan"]["seed"] == 9
    assert j2["plan"]["seed"] == 10


def test_config_unknown_key(gauss_csv, tmp_path, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump({"bogus": 1}))
    rc = main(["fit", "--input", gauss_csv, "--response", "y",
               "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_cli_error_codes(tmp_path, capsys):
    # missing file -> OSError -> 5
    rc = main(["fit", "--input", str(tmp_path / "nope.csv"),
               "--response", "y", "--out", str(tmp_path / "o")])
    assert rc == 5
    assert "error[5]" in capsys.readouterr().err
    # bad value -> ValueError -> 2
    bad = tmp_path / "bad.csv"
    bad.write_text("y,a\n1,oops\n")
    rc = main(["fit", "--input", str(bad), "--response", "y",
               "--out", str(tmp_path / "o")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "error[2]" in err and "oops" in err


def test_cli_validates_options(gauss_csv, tmp_path, capsys):
    rc = main(["fit", "--input", gauss_csv, "--response", "y",
               "--q", "1.5", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "--q" in capsys.readouterr().err
