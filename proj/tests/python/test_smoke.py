import csv
import json
import os
import subprocess
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import flipscore as fs

SOURCE_DIR = Path(os.environ.get("FLIPSCORE_SOURCE_DIR", Path(__file__).resolve().parents[2]))
BINARY = os.environ.get("FLIPSCORE_BINARY")


def clustered_binomial(rng, clusters=30, per=5, beta=0.0):
    n = clusters * per
    x = rng.normal(size=(n, 1))
    z = np.column_stack([np.ones(n), rng.normal(size=n)])
    u = np.repeat(rng.normal(size=clusters), per)
    eta = beta * x[:, 0] + 0.3 * z[:, 1] + u
    y = (rng.uniform(size=n) < 1 / (1 + np.exp(-eta))).astype(float)
    cluster = np.repeat(np.arange(clusters), per)
    return fs.ModelData(y, x, z, cluster.tolist())


def test_family_examples():
    assert fs.Family.binomial().inverse_link(np.array([0.0]))[0] == pytest.approx(0.5)
    assert fs.Family.poisson().variance(np.array([2.0]))[0] == 2.0
    with pytest.raises(ArithmeticError):
        fs.Family.binomial().variance(np.array([1.0]))


def test_hat_projection_and_flips():
    h = fs.hat_projection(np.ones((4, 1)), np.ones(4))
    assert np.allclose(h, 0.25)
    flips = fs.generate_flips([1, 1, 2, 2, 3], 100, 7)
    assert flips.shape == (5, 100)
    assert np.all(flips[:, 0] == 1)
    assert np.all(flips[0] == flips[1])
    assert np.all(flips[2] == flips[3])


def test_flip_test_and_baselines():
    rng = np.random.default_rng(3)
    data = clustered_binomial(rng, beta=1.5)
    fam = fs.Family.binomial()
    res = fs.flip_test(data, fam, num_flips=400, seed=1)
    assert res.flipped.shape == (400, 1)
    assert res.p_values[0] <= 0.01
    assert res.z_value[0] == pytest.approx(res.score[0] / res.std_error[0])
    again = fs.flip_test(data, fam, num_flips=400, seed=1)
    assert np.array_equal(res.flipped, again.flipped)

    wald = fs.wald_glm_test(data, fam)
    gee = fs.gee_independence_fit(data, fam)
    assert gee.converged
    assert gee.beta_hat[0] == pytest.approx(wald.estimate, abs=1e-10)
    assert 0 < fs.gee_wald_test(gee).p_value < 1


def test_multi_df_single_column_matches_two_sided():
    rng = np.random.default_rng(4)
    data = clustered_binomial(rng)
    fam = fs.Family.binomial()
    single = fs.flip_test(data, fam, num_flips=200, seed=5)
    multi = fs.multi_df_test(data, fam, [0], num_flips=200, seed=5)
    assert multi.combined_p == single.p_values[0]


def test_degenerate_column_raises():
    rng = np.random.default_rng(5)
    data = clustered_binomial(rng)
    x = np.array(data.x)
    x[:, 0] = data.z[:, 1]
    data.x = x
    with pytest.raises(ArithmeticError):
        fs.flip_test(data, fs.Family.binomial(), num_flips=50)


def test_simulation_harness():
    sc = fs.Scenario()
    sc.reps = 30
    sc.flips = 50
    data = fs.simulate_cluster_dataset(sc, 0)
    assert data.n == 50
    assert len(set(data.cluster)) == 10
    res = fs.run_scenario(sc)
    assert [m.method for m in res.methods] == ["flipscores", "glm-wald", "gee"]
    for m in res.methods:
        assert m.lower <= m.rate <= m.upper
    assert fs.rejection_interval(0, 100)[0] == 0.0
    sc.mode = "within-correlated"
    assert sc.documented_limitation


def write_categorical_csv(path, seed=11):
    rng = np.random.default_rng(seed)
    countries = ["AT", "CZ", "DE", "FR", "HU", "IT", "PL", "SK"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["y", "age", "country", "id"])
        for j in range(80):
            u = rng.normal()
            age = round(float(rng.normal()), 4)
            for _ in range(3):
                w.writerow([int(rng.normal() < 0.3 * age + u), age, countries[j % 8], f"r{j}"])


def test_cli_json_matches_schema(tmp_path):
    data = tmp_path / "cat.csv"
    write_categorical_csv(data)
    args = ["test", "--input", str(data), "--response", "y", "--test", "age",
            "--term", "country=country", "--id", "id", "--flips", "200", "--seed", "9"]
    code, out, err = fs.run_cli(args)
    assert code == 0, err
    report = json.loads(out)
    schema = json.loads((SOURCE_DIR / "schema" / "test_report.schema.json").read_text())
    jsonschema.validate(report, schema)
    assert [r["Df"] for r in report["anova"]["rows"]] == [1, 7]
    assert fs.run_cli(args)[1] == out

    code, _, err = fs.run_cli(["test", "--input", str(tmp_path / "missing.csv"),
                               "--response", "y", "--test", "age"])
    assert code == 1
    assert "missing.csv" in err


@pytest.mark.skipif(not BINARY, reason="command-line binary not provided")
def test_simulate_binary(tmp_path):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({"N": [10], "n_per_cluster": [5], "reps": 10, "flips": 40}))
    proc = subprocess.run([BINARY, "simulate", "--config", str(cfg), "--format", "json"],
                          capture_output=True, text=True, check=True)
    rows = json.loads(proc.stdout)
    assert [r["method"] for r in rows] == ["flipscores", "glm-wald", "gee"]
    bad = tmp_path / "bad.json"
    bad.write_text('{"Nclusters": 3}')
    proc = subprocess.run([BINARY, "simulate", "--config", str(bad)], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "Nclusters" in proc.stderr
