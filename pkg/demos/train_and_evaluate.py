"""Train a small model on a noisy two-variable sine, evaluate it, and inspect the learned graph.

Run: python demos/train_and_evaluate.py   (about half a minute on one core)
"""
import numpy as np

from shiftcast.config import TrainConfig
from shiftcast.data import RawSeries, make_windows, split, zscore_apply, zscore_fit
from shiftcast.train import evaluate, evaluate_model, train

g = np.random.default_rng(0)
t = np.arange(1200)
values = np.vstack([np.sin(2 * np.pi * t / 24), np.cos(2 * np.pi * t / 24) + 0.5 * np.sin(2 * np.pi * t / 7)])
raw = RawSeries(values + 0.1 * g.standard_normal(values.shape), ["a", "b"])

tr, va, te = split(raw)
stats = zscore_fit(tr)
tr, va, te = (zscore_apply(p, stats) for p in (tr, va, te))
config = TrainConfig(L=48, H=12, d=32, b=32, batch=32, max_epochs=20, patience=5)
wt, wv, wte = (make_windows(p, config.L, config.H) for p in (tr, va, te))

ckpt, history = train(config, wt, wv, on_epoch=lambda r: print(
    f"epoch {r.epoch:2d}  train loss {r.train.total:.4f}  (l_a {r.train.l_a:.3f}, l_b {r.train.l_b:.1e}, "
    f"l_c {r.train.l_c:.3f})  val mse {r.val_mse:.4f}"))
print(f"best epoch {history.best_epoch}")

model = ckpt.build_model()
last_value = evaluate_model(model, wte, predictor=lambda X: np.repeat(X[..., -1:], config.H, axis=-1))
print(f"test: model {evaluate(ckpt, wte)}  last-value baseline {last_value}")

X = np.stack([w.lookback for w in wte[:1]])
fw = model.forward(X)
np.set_printoptions(precision=3, suppress=True)
print("attention W (rows sum to 1):\n", fw.W.data[0])
print("expected adjacency A at eval time:\n", fw.A.data[0])
