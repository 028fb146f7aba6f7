"""Compare the full model against its three ablations on the bundled intra-shift scenario.

Short runs keep this to a few minutes; the acceptance suite uses five seeds.
Run: python demos/ablations.py
"""
import time

from shiftcast.cli import load_scenario
from shiftcast.config import TrainConfig
from shiftcast.data import make_windows, split, zscore_apply, zscore_fit
from shiftcast.synth import gen_intra_shift
from shiftcast.train import evaluate, train

raw = gen_intra_shift(load_scenario("intra_shift"))
tr, va, te = split(raw)
stats = zscore_fit(tr)
tr, va, te = (zscore_apply(p, stats) for p in (tr, va, te))
config = TrainConfig(L=48, H=4, d=64, b=64, max_epochs=6, patience=3, stride=4)
wt = make_windows(tr, config.L, config.H, 4)
wv = make_windows(va, config.L, config.H, 4)
wte = make_windows(te, config.L, config.H)

for ablation in ((), ("no_gate",), ("no_inter",), ("no_di",)):
    t0 = time.perf_counter()
    ckpt, history = train(config.with_(ablations=ablation), wt, wv)
    m = evaluate(ckpt, wte)
    print(f"{'+'.join(ablation) or 'full':9s} test mse {m.mse:.4f}  mae {m.mae:.4f}  "
          f"({len(history.epochs)} epochs, {time.perf_counter() - t0:.0f}s)")
