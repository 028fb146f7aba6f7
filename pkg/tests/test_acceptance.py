"""Acceptance suite: one test per criterion, each reporting a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they are
produced; they are also collected into an "acceptance criteria" section of the
terminal summary.
"""
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import run_cli
from oracles import ar1, mc_kl, random_walk
from shiftcast.cli import load_scenario, prepare_slices
from shiftcast.config import TrainConfig
from shiftcast.data import RawSeries, load_csv, make_windows, split, zscore_apply, zscore_fit, zscore_invert
from shiftcast.diagnostics import TINY, adf_summary
from shiftcast.losses import standard_normal_kl, time_kl
from shiftcast.model import JointPGM, draw_noise
from shiftcast.nn.autodiff import Tensor
from shiftcast.nn.layers import VAR_FLOOR, gumbel_sigmoid
from shiftcast.nn.rng import RngStream
from shiftcast.synth import gen_inter_shift, gen_intra_shift
from shiftcast.train import evaluate, train

pytestmark = pytest.mark.slow

DATA_DIRS = [Path(p) for p in (os.environ.get("SHIFTCAST_DATA_DIR"),) if p] + [
    Path(__file__).resolve().parents[1] / "data"]


def find_dataset(*names):
    for d in DATA_DIRS:
        for n in names:
            if (d / n).is_file():
                return d / n
    return None


def test_criterion_1_gradcheck(capsys, record_criterion):
    t0 = time.perf_counter()
    code, payload, _ = run_cli(capsys, "gradcheck")
    elapsed = time.perf_counter() - t0
    worst = max(payload["errors"].values())
    ok = code == 0 and payload["points"] == 3 and worst < 1e-4 and elapsed < 60
    record_criterion(1, ok, f"gradcheck max rel err {worst:.2e} over {len(payload['errors'])} params, "
                            f"{elapsed:.1f}s")
    assert ok


def test_criterion_2_kl_oracles(record_criterion):
    t0 = time.perf_counter()
    g = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        mu_q, mu_p = g.normal(0, 1.5, 2)
        var_q, var_p = g.uniform(0.2, 3.0, 2)
        m, se = mc_kl(mu_q, var_q, 0.0, 1.0, 10 ** 6, g)
        worst = max(worst, abs(standard_normal_kl(np.array([mu_q]), np.array([var_q])).item() - m) / se)
        m, se = mc_kl(mu_q, var_q, mu_p, var_p, 10 ** 6, g)
        closed = time_kl(np.array([mu_q]), np.array([var_q]), np.array([mu_p]), np.array([var_p]))
        worst = max(worst, abs(closed.item() - m) / se)
    elapsed = time.perf_counter() - t0
    ok = worst < 3.0 and elapsed < 120
    record_criterion(2, ok, f"40 KL points, worst |closed - MC| = {worst:.2f} SE, {elapsed:.1f}s")
    assert ok


def test_criterion_3_gumbel_sigmoid_law(record_criterion):
    devs = {}
    for w in (0.1, 0.25, 0.5, 0.75, 0.9):
        a = gumbel_sigmoid(Tensor(np.full(10 ** 5, w)), 0.1, rng=RngStream(31, ("law", w))).data
        devs[w] = abs(np.mean(a > 0.5) - w)
    ok = max(devs.values()) <= 0.01
    record_criterion(3, ok, "max |P(a>0.5) - w| = " + f"{max(devs.values()):.4f} at tau=0.1")
    assert ok


def _reproduce(path, seeds=(0, 1, 2)):
    config = TrainConfig()
    _, _, (tr, va, te) = prepare_slices(str(path), config.L, config.H)
    wt = make_windows(tr, config.L, config.H)
    wv = make_windows(va, config.L, config.H)
    wte = make_windows(te, config.L, config.H)
    out = []
    for s in seeds:
        t0 = time.perf_counter()
        ck, _ = train(config.with_(seed=s), wt, wv)
        m = evaluate(ck, wte)
        out.append((m.mse, m.mae, time.perf_counter() - t0))
    return np.array(out)


@pytest.mark.parametrize("name,files,max_mse,max_mae", [
    ("Exchange", ("exchange_rate.csv", "exchange.csv"), 0.10, 0.23),
    ("ETTh1", ("ETTh1.csv",), 0.52, 0.50),
])
def test_criterion_4_benchmark_reproduction(name, files, max_mse, max_mae, record_criterion):
    path = find_dataset(*files)
    if path is None:
        where = ", ".join(str(d) for d in DATA_DIRS)
        record_criterion(4, False, f"{name}: dataset not found (looked for {files} in {where})")
        pytest.fail(f"{name} CSV not available; set SHIFTCAST_DATA_DIR to a directory containing {files[0]}")
    res = _reproduce(path)
    mse, mae, secs = res[:, 0].mean(), res[:, 1].mean(), res[:, 2].max()
    limit = 1800 if name == "Exchange" else np.inf
    ok = mse <= max_mse and mae <= max_mae and secs < limit
    record_criterion(4, ok, f"{name}: mean test MSE {mse:.4f} (<= {max_mse}), MAE {mae:.4f} (<= {max_mae}), "
                            f"slowest seed {secs:.0f}s")
    assert ok


ABLATION_CONFIG = TrainConfig(L=48, H=4, d=64, b=64, max_epochs=10, patience=3, stride=4)


def _ablation_gap(scenario, generator, ablation, seeds=range(5)):
    raw = generator(load_scenario(scenario))
    tr, va, te = split(raw)
    stats = zscore_fit(tr)
    tr, va, te = (zscore_apply(p, stats) for p in (tr, va, te))
    c = ABLATION_CONFIG
    wt, wv, wte = make_windows(tr, c.L, c.H, 4), make_windows(va, c.L, c.H, 4), make_windows(te, c.L, c.H)
    full, ablated = [], []
    for s in seeds:
        full.append(evaluate(train(c.with_(seed=s), wt, wv)[0], wte).mse)
        ablated.append(evaluate(train(c.with_(seed=s, ablations=(ablation,)), wt, wv)[0], wte).mse)
    return float(np.median(full)), float(np.median(ablated))


@pytest.fixture(scope="module")
def ablation_clock():
    return {"t0": time.perf_counter()}


@pytest.mark.parametrize("scenario,generator,ablation,required", [
    ("inter_shift", gen_inter_shift, "no_inter", 0.05),
    ("intra_shift", gen_intra_shift, "no_gate", 0.03),
])
def test_criterion_5_ablation_direction(scenario, generator, ablation, required, ablation_clock,
                                        record_criterion):
    full, ablated = _ablation_gap(scenario, generator, ablation)
    gain = 1.0 - full / ablated
    elapsed = time.perf_counter() - ablation_clock["t0"]
    ok = gain >= required and elapsed < 1200
    record_criterion(5, ok, f"{scenario}: median test MSE full {full:.4f} vs {ablation} {ablated:.4f}, "
                            f"gain {gain:+.1%} (need >= {required:.0%}), cumulative {elapsed:.0f}s")
    assert ok


def _train_cli(data, out, threads):
    cmd = [sys.executable, "-m", "shiftcast", "train", "--data", str(data), "--lookback", "8", "--horizon", "4",
           "--latent-dim", "8", "--fourier-width", "16", "--batch", "16", "--epochs", "2", "--seed", "3",
           "--threads", str(threads), "--out", str(out)]
    subprocess.run(cmd, check=True, capture_output=True)
    return {n: (out / n).read_bytes() for n in ("checkpoint.json", "history.jsonl", "norm_stats.json")}


def test_criterion_6_invariant_suite(tmp_path, toy_csv, record_criterion):
    checks = {}
    g = RngStream(6)
    m = JointPGM(TINY, 3)
    X = g.child("X").normal((16, 3, TINY.L))
    Y = g.child("Y").normal((16, 3, TINY.H))
    noise = draw_noise([g.child("n", i) for i in range(16)], g.child("t"), 3, TINY.d)
    for nz in (noise, None):
        fw = m.forward(X, Y, nz)
        checks.setdefault("softmax rows", []).append(np.max(np.abs(fw.W.data.sum(-1) - 1)) <= 1e-9)
        checks.setdefault("gates in (0,1)", []).append(bool(np.all((fw.gate.data > 0) & (fw.gate.data < 1))))
        vs = (fw.time.var, fw.intra.var, fw.inter.var, fw.fused.var, fw.di.var)
        checks.setdefault("variances", []).append(all(np.all(v.data >= VAR_FLOOR) for v in vs))
        checks.setdefault("loss sum", []).append(
            abs(fw.total.item() - (fw.l_a.item() + fw.l_b.item() + fw.l_c.item())) <= 1e-12)
    raw = RawSeries(np.random.default_rng(6).normal(50, 7, (4, 500)))
    st = zscore_fit(raw)
    checks["z-score round trip"] = [np.max(np.abs(zscore_invert(zscore_apply(raw, st), st).values - raw.values))
                                    <= 1e-10]
    a = _train_cli(toy_csv, tmp_path / "a", 1)
    b = _train_cli(toy_csv, tmp_path / "b", 1)
    c = _train_cli(toy_csv, tmp_path / "c", 4)
    checks["byte-identical reruns"] = [a == b]
    checks["byte-identical across threads"] = [a == c]
    failed = [k for k, v in checks.items() if not all(v)]
    ok = not failed
    record_criterion(6, ok, f"{len(checks)} invariant groups" + (f", failed: {failed}" if failed else " hold"))
    assert ok


def test_criterion_7_overfit_sine(record_criterion):
    t = np.arange(32 + 16 + 499)
    series = RawSeries(np.sin(2 * np.pi * t / 24.0)[None, :])
    w = make_windows(series, 32, 16)
    config = TrainConfig(L=32, H=16, d=32, b=32, batch=32, max_epochs=50, patience=50)
    ck, h = train(config, w, w)
    mse = evaluate(ck, w).mse
    ok = mse < 0.01 and len(h.epochs) <= 50
    record_criterion(7, ok, f"single sine train MSE {mse:.5f} after {len(h.epochs)} epochs")
    assert ok


def test_criterion_8_adf_bands(record_criterion):
    rw = np.array([adf_summary(RawSeries(random_walk(5000, s)[None]))["average"] for s in range(100)])
    ar = np.array([adf_summary(RawSeries(ar1(5000, 0.2, s)[None]))["average"] for s in range(100)])
    ok = -3 < rw.mean() < 1 and ar.mean() < -10
    detail = (f"random walk mean {rw.mean():.2f} [5-95%: {np.percentile(rw, 5):.2f}, {np.percentile(rw, 95):.2f}], "
              f"AR(0.2) mean {ar.mean():.2f} [5-95%: {np.percentile(ar, 5):.2f}, {np.percentile(ar, 95):.2f}]")
    path = find_dataset("exchange_rate.csv", "exchange.csv")
    if path is None:
        detail += "; Exchange: not available"
    else:
        avg = adf_summary(load_csv(path))["average"]
        detail += f"; Exchange average {avg:.3f} (published value -1.902)"
    record_criterion(8, ok, detail)
    assert ok
