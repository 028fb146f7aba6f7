"""Adam training loop with early stopping, evaluation metrics and checkpoints.

A batch is split into fixed-size chunks whose gradients are summed in chunk
order. Chunks may run on worker threads; because chunk boundaries and the
accumulation order never depend on the thread count, seeded runs are
bit-identical however many threads are used.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from shiftcast.config import TrainConfig
from shiftcast.data import stack_windows
from shiftcast.errors import DivergedLoss, EmptyDataset, NonFiniteValue, ShapeMismatch
from shiftcast.losses import LossBreakdown, total_loss
from shiftcast.model import JointPGM, draw_noise
from shiftcast.nn import autodiff as ad
from shiftcast.nn.params import state_from_json, state_to_json
from shiftcast.nn.rng import RngStream

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "shiftcast-checkpoint"
CHECKPOINT_VERSION = 1
EVAL_CHUNK = 256


@dataclass(frozen=True)
class Metrics:
    mae: float
    mse: float

    def to_dict(self) -> dict:
        return {"mae": self.mae, "mse": self.mse}


@dataclass
class EpochRecord:
    epoch: int
    train: LossBreakdown
    val: LossBreakdown
    val_mae: float
    val_mse: float

    def to_dict(self) -> dict:
        return {"epoch": self.epoch, "train": self.train.to_dict(), "val": self.val.to_dict(),
                "val_mae": self.val_mae, "val_mse": self.val_mse}


@dataclass
class TrainHistory:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict()) + "\n" for e in self.epochs)

    @property
    def best(self) -> EpochRecord:
        return self.epochs[self.best_epoch]


@dataclass
class Checkpoint:
    config: TrainConfig
    n_vars: int
    state: dict[str, np.ndarray]
    best_epoch: int = -1

    @property
    def bank_seed(self) -> int:
        return self.config.seed

    def build_model(self) -> JointPGM:
        m = JointPGM(self.config, self.n_vars, init=False)
        m.load_state(self.state)
        return m

    def to_dict(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": self.config.to_dict(),
            "n_vars": self.n_vars,
            "bank": {"seed": self.bank_seed, "b": self.config.b},
            "best_epoch": self.best_epoch,
            "params": state_to_json(self.state),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Checkpoint":
        if obj.get("format") != CHECKPOINT_FORMAT or obj.get("version") != CHECKPOINT_VERSION:
            raise ValueError("not a shiftcast checkpoint (or unsupported version)")
        return cls(TrainConfig.from_dict(obj["config"]), int(obj["n_vars"]),
                   state_from_json(obj["params"]), int(obj.get("best_epoch", -1)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        return cls.from_dict(json.loads(Path(path).read_text()))


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1, c2 = 1.0 - b1 ** self.t, 1.0 - b2 ** self.t
        for k, g in grads.items():
            m = self.m.get(k)
            if m is None:
                m = self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            v = self.v[k]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            params[k] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def as_arrays(windows) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(windows, tuple) and len(windows) == 2 and isinstance(windows[0], np.ndarray):
        return windows
    windows = list(windows)
    if not windows:
        raise EmptyDataset("no windows")
    return stack_windows(windows)


def _chunks(n: int, size: int) -> list[slice]:
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def batch_gradients(model: JointPGM, X: np.ndarray, Y: np.ndarray, noise, chunk: int,
                    pool: ThreadPoolExecutor | None = None
                    ) -> tuple[dict[str, np.ndarray], LossBreakdown]:
    """Gradient of the batch-mean loss, accumulated over chunks in fixed order."""
    names, tensors = model.params.names(), model.params.tensors()
    n = X.shape[0]

    def run(sl: slice):
        w = (sl.stop - sl.start) / n
        fw = model.forward(X[sl], Y[sl], None if noise is None else noise.take(sl))
        g = ad.grad(fw.total * w, tensors)
        return g, (w * fw.l_a.item(), w * fw.l_b.item(), w * fw.l_c.item())

    parts = list(pool.map(run, _chunks(n, chunk))) if pool else [run(s) for s in _chunks(n, chunk)]
    grads = {k: np.zeros_like(t.data) for k, t in zip(names, tensors)}
    terms = [0.0, 0.0, 0.0]
    for g, vals in parts:
        for k, gi in zip(names, g):
            grads[k] += gi
        for i in range(3):
            terms[i] += vals[i]
    return grads, total_loss(*terms)


def _eval_noise(model: JointPGM, seed: int, idx: np.ndarray):
    root = RngStream(seed, ("eval",))
    return draw_noise([root.child(int(i)) for i in idx], root.child("time"), model.n_vars, model.config.d)


def evaluate_model(model: JointPGM, windows, sample: bool = False, seed: int | None = None,
                   predictor: Callable[[np.ndarray], np.ndarray] | None = None,
                   with_loss: bool = False):
    """MAE/MSE over every window, variable and horizon step.

    ``predictor`` replaces the model entirely (used for reference baselines).
    With ``with_loss`` the mean-mode LossBreakdown is returned as well.
    """
    X, Y = as_arrays(windows)
    if X.shape[1] != model.n_vars:
        raise ShapeMismatch(f"model expects N={model.n_vars} variables, data has N={X.shape[1]}")
    seed = model.config.seed if seed is None else seed
    abs_sum = sq_sum = 0.0
    terms = [0.0, 0.0, 0.0]
    n = X.shape[0]
    for sl in _chunks(n, EVAL_CHUNK):
        if predictor is not None:
            pred = np.asarray(predictor(X[sl]), dtype=np.float64)
        else:
            noise = _eval_noise(model, seed, np.arange(sl.start, sl.stop)) if sample else None
            fw = model.forward(X[sl], Y[sl] if with_loss else None, noise)
            pred = fw.pred.data
            if with_loss:
                w = (sl.stop - sl.start) / n
                terms = [terms[0] + w * fw.l_a.item(), terms[1] + w * fw.l_b.item(),
                         terms[2] + w * fw.l_c.item()]
        err = pred - Y[sl]
        abs_sum += float(np.abs(err).sum())
        sq_sum += float((err * err).sum())
    metrics = Metrics(abs_sum / Y.size, sq_sum / Y.size)
    if with_loss:
        return metrics, total_loss(*terms)
    return metrics


def evaluate(checkpoint: Checkpoint, windows, sample: bool = False, **kw) -> Metrics:
    return evaluate_model(checkpoint.build_model(), windows, sample=sample or checkpoint.config.eval_sample, **kw)


def train(config: TrainConfig, train_windows, val_windows, threads: int = 1,
          on_epoch: Callable[[EpochRecord], None] | None = None) -> tuple[Checkpoint, TrainHistory]:
    """Minimize the three-term loss with Adam; keep the best-validation parameters."""
    X, Y = as_arrays(train_windows)
    Xv, Yv = as_arrays(val_windows)
    if X.shape[0] == 0 or Xv.shape[0] == 0:
        raise EmptyDataset("training and validation sets must be nonempty")
    n_vars = X.shape[1]
    if X.shape[1:] != (n_vars, config.L) or Y.shape[1:] != (n_vars, config.H):
        raise ShapeMismatch(f"windows {X.shape[1:]}/{Y.shape[1:]} do not match L={config.L}, H={config.H}")
    model = JointPGM(config, n_vars)
    params = {k: t.data for k, t in model.params.items()}
    opt = Adam(config.lr)
    root = RngStream(config.seed)
    history = TrainHistory()
    best_mse, best_state, stale = math.inf, model.state(), 0
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        with threadpool_limits(limits=1):
            for epoch in range(config.max_epochs):
                order = root.child("shuffle", epoch).permutation(X.shape[0])
                sums = np.zeros(3)
                n_steps = 0
                for step, start in enumerate(range(0, len(order), config.batch)):
                    idx = order[start:start + config.batch]
                    noise = draw_noise([root.child("noise", epoch, int(i)) for i in idx],
                                       root.child("time", epoch, step), n_vars, config.d)
                    try:
                        grads, br = batch_gradients(model, X[idx], Y[idx], noise, config.chunk, pool)
                    except NonFiniteValue as exc:
                        raise DivergedLoss(f"epoch {epoch} step {step}: {exc}") from exc
                    if config.clip_norm is not None:
                        clip_global_norm(grads, config.clip_norm)
                    opt.step(params, grads)
                    sums += (br.l_a, br.l_b, br.l_c)
                    n_steps += 1
                train_br = total_loss(*(sums / n_steps))
                try:
                    vm, vbr = evaluate_model(model, (Xv, Yv), sample=config.eval_sample, with_loss=True)
                except NonFiniteValue as exc:
                    raise DivergedLoss(f"epoch {epoch} validation: {exc}") from exc
                rec = EpochRecord(epoch, train_br, vbr, vm.mae, vm.mse)
                history.epochs.append(rec)
                log.info("epoch %d train %.5f val_mse %.5f", epoch, train_br.total, vm.mse)
                if on_epoch:
                    on_epoch(rec)
                if vm.mse < best_mse:
                    best_mse, best_state, stale = vm.mse, model.state(), 0
                    history.best_epoch = epoch
                else:
                    stale += 1
                    if stale >= config.patience:
                        break
    finally:
        if pool:
            pool.shutdown()
    return Checkpoint(config, n_vars, best_state, history.best_epoch), history

