import hashlib
import json

import jsonschema
import numpy as np
import pytest

from conftest import DATA, run_cli
from oracles import ar1, random_walk
from shiftcast import schemas
from shiftcast.cli import EXIT_DATA, EXIT_GRADCHECK, EXIT_OK, EXIT_USAGE

TRAIN_SMALL = ["--lookback", 8, "--horizon", 4, "--latent-dim", 8, "--fourier-width", 16,
               "--batch", 16, "--epochs", 2, "--seed", 1]


def check_schema(payload):
    jsonschema.validate(payload, schemas.BY_COMMAND[payload["command"]])


@pytest.fixture
def trained(tmp_path, toy_csv, capsys):
    out = tmp_path / "run"
    code, payload, _ = run_cli(capsys, "train", "--data", toy_csv, *TRAIN_SMALL, "--out", out)
    assert code == EXIT_OK
    return out, payload


def test_train_writes_artifacts(trained, toy_csv):
    out, payload = trained
    check_schema(payload)
    for name in ("manifest.json", "checkpoint.json", "history.jsonl", "norm_stats.json"):
        assert (out / name).is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["dataset"]["sha256"] == hashlib.sha256(toy_csv.read_bytes()).hexdigest()
    assert manifest["config"]["L"] == 8 and "finished" in manifest
    lines = (out / "history.jsonl").read_text().splitlines()
    assert len(lines) == payload["epochs_run"] == 2


def test_train_is_byte_identical_across_threads(tmp_path, toy_csv, capsys):
    outs = []
    for threads in (1, 2):
        out = tmp_path / f"t{threads}"
        code, _, _ = run_cli(capsys, "train", "--data", toy_csv, *TRAIN_SMALL, "--threads", threads,
                             "--out", out)
        assert code == EXIT_OK
        outs.append(out)
    for name in ("checkpoint.json", "history.jsonl", "norm_stats.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_threads_env_fallback(tmp_path, toy_csv, capsys, monkeypatch):
    monkeypatch.setenv("SHIFTCAST_THREADS", "2")
    code, _, _ = run_cli(capsys, "train", "--data", toy_csv, *TRAIN_SMALL, "--out", tmp_path / "e")
    assert code == EXIT_OK


def test_ablate_no_di_zeroes_time_kl(tmp_path, toy_csv, capsys):
    out = tmp_path / "nodi"
    code, _, _ = run_cli(capsys, "train", "--data", toy_csv, *TRAIN_SMALL, "--ablate", "no_di", "--out", out)
    assert code == EXIT_OK
    for line in (out / "history.jsonl").read_text().splitlines():
        rec = json.loads(line)
        assert rec["train"]["l_b"] == 0.0 and rec["val"]["l_b"] == 0.0


def test_train_usage_errors(tmp_path, toy_csv, capsys):
    code, payload, err = run_cli(capsys, "train", "--out", tmp_path)
    assert code == EXIT_USAGE and payload is None and "usage" in err and "--data" in err
    code, _, err = run_cli(capsys, "train", "--data", toy_csv, "--out", tmp_path, "--ablate", "no_magic")
    assert code == EXIT_USAGE and "no_magic" in err
    code, _, _ = run_cli(capsys, "train", "--data", toy_csv, "--out", tmp_path, "--alpha", "1.5")
    assert code == EXIT_USAGE


def test_train_data_errors(tmp_path, write_series, capsys):
    short = write_series(np.zeros((2, 20)))
    code, _, err = run_cli(capsys, "train", "--data", short, *TRAIN_SMALL, "--out", tmp_path / "x")
    assert code == EXIT_DATA and "error" in err
    code, _, _ = run_cli(capsys, "train", "--data", tmp_path / "missing.csv", *TRAIN_SMALL,
                         "--out", tmp_path / "y")
    assert code == EXIT_DATA


def test_eval_and_adjacency_export(trained, toy_csv, tmp_path, capsys):
    out, _ = trained
    adj = tmp_path / "adj"
    code, payload, _ = run_cli(capsys, "eval", "--checkpoint", out / "checkpoint.json", "--data", toy_csv,
                               "--export-adjacency", adj)
    assert code == EXIT_OK
    check_schema(payload)
    W = sorted(adj.glob("W_*.csv"))
    A = sorted(adj.glob("A_*.csv"))
    assert len(W) == len(A) == payload["n_windows"]
    for path in W:
        m = np.loadtxt(path, delimiter=",")
        assert m.shape == (3, 3) and np.max(np.abs(m.sum(axis=1) - 1)) < 1e-9
    a = np.loadtxt(A[0], delimiter=",")
    assert np.all((a > 0) & (a < 1))


def test_eval_rejects_mismatched_variable_count(trained, write_series, capsys):
    out, _ = trained
    other = write_series(np.random.default_rng(0).standard_normal((2, 200)), "two.csv")
    code, payload, err = run_cli(capsys, "eval", "--checkpoint", out / "checkpoint.json", "--data", other)
    assert code == EXIT_DATA and payload is None
    assert "N=3" in err and "N=2" in err


def test_eval_sampled_flag(trained, toy_csv, capsys):
    out, _ = trained
    args = ("eval", "--checkpoint", out / "checkpoint.json", "--data", toy_csv, "--split", "val")
    _, mean_mode, _ = run_cli(capsys, *args)
    _, sampled, _ = run_cli(capsys, *args, "--eval-sample")
    _, again, _ = run_cli(capsys, *args, "--eval-sample")
    assert sampled["sampled"] and not mean_mode["sampled"]
    assert sampled == again and sampled["mse"] != mean_mode["mse"]


@pytest.mark.parametrize("split", ["train", "test"])
def test_eval_matches_golden_values(split, capsys):
    golden = json.loads((DATA / "sine_golden.json").read_text())["metrics"][split]
    code, payload, _ = run_cli(capsys, "eval", "--checkpoint", DATA / "sine_run" / "checkpoint.json",
                               "--data", DATA / "sine.csv", "--split", split)
    assert code == EXIT_OK
    assert payload["n_windows"] == golden["n_windows"]
    assert abs(payload["mae"] - golden["mae"]) <= 1e-9
    assert abs(payload["mse"] - golden["mse"]) <= 1e-9


def test_synth_bundled_scenario_is_deterministic(tmp_path, capsys):
    code, payload, _ = run_cli(capsys, "synth", "--scenario", "intra_shift", "--out", tmp_path / "a.csv")
    assert code == EXIT_OK
    check_schema(payload)
    assert (payload["n_vars"], payload["n_steps"], payload["kind"]) == (8, 20_000, "intra")
    run_cli(capsys, "synth", "--scenario", "intra_shift", "--out", tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    g = np.loadtxt(payload["graphs"][0], delimiter=",")
    assert np.array_equal(g, np.eye(8))


def test_synth_inter_scenario_graphs(tmp_path, capsys):
    code, payload, _ = run_cli(capsys, "synth", "--scenario", "inter_shift", "--out", tmp_path / "i.csv")
    assert code == EXIT_OK and payload["kind"] == "inter" and len(payload["graphs"]) == 2
    g0, g1 = (np.loadtxt(p, delimiter=",") for p in payload["graphs"])
    assert not np.array_equal(g0, g1)
    assert np.allclose(np.abs(g0).sum(axis=1), 1.0)


def test_synth_errors(tmp_path, capsys):
    bad = tmp_path / "unstable.json"
    bad.write_text(json.dumps({"n_vars": 1, "n_steps": 50, "seed": 0, "regimes": [
        {"start": 0, "ar": [[0.5]]}, {"start": 25, "ar": [[1.2]]}]}))
    code, _, err = run_cli(capsys, "synth", "--scenario", bad, "--out", tmp_path / "u.csv")
    assert code == EXIT_DATA and "regime 1" in err
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _, err = run_cli(capsys, "synth", "--scenario", broken, "--out", tmp_path / "b.csv")
    assert code == EXIT_DATA and "invalid scenario" in err


def test_gradcheck_verdict_and_negative_control(capsys):
    code, payload, err = run_cli(capsys, "gradcheck", "--points", 1)
    assert code == EXIT_OK
    check_schema(payload)
    assert payload["passed"] and max(payload["errors"].values()) < 1e-4
    assert "dec.pred.W2" in err  # per-parameter table goes to stderr
    code, other, _ = run_cli(capsys, "gradcheck", "--points", 1, "--seed", 5)
    assert code == EXIT_OK and other["errors"] != payload["errors"]
    code, bad, err = run_cli(capsys, "gradcheck", "--points", 1, "--corrupt", "dec.pred.W2")
    assert code == EXIT_GRADCHECK and bad["failures"] == ["dec.pred.W2"] and "dec.pred.W2" in err


def test_adf_command(write_series, capsys):
    rw = write_series(np.vstack([random_walk(2000, 0), random_walk(2000, 1)]), "rw.csv")
    code, payload, _ = run_cli(capsys, "adf", "--data", rw)
    assert code == EXIT_OK
    check_schema(payload)
    assert -3 < payload["average"] < 1 and len(payload["statistics"]) == 2
    ar = write_series(ar1(2000, 0.2, 0), "ar.csv")
    _, payload, _ = run_cli(capsys, "adf", "--data", ar, "--max-lag", 2)
    assert payload["average"] < -10 and payload["max_lag"] == 2
    short = write_series(np.zeros((1, 3)) + np.arange(3), "short.csv")
    code, _, _ = run_cli(capsys, "adf", "--data", short)
    assert code == EXIT_DATA
