"""Full-model gradient verification and ADF summaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shiftcast.config import TrainConfig
from shiftcast.data import RawSeries, adf_statistic, default_max_lag
from shiftcast.model import JointPGM, draw_noise
from shiftcast.nn import autodiff as ad
from shiftcast.nn.gradcheck import grad_check_many
from shiftcast.nn.layers import W_CLAMP
from shiftcast.nn.rng import RngStream

TINY = TrainConfig(L=8, H=4, d=8, K=2, b=16, batch=2)
KINK_MARGIN = 1e-3


@dataclass
class GradCheckReport:
    errors: dict[str, float]  # parameter name -> max relative error over all points
    tol: float
    points: int

    @property
    def passed(self) -> bool:
        return all(e < self.tol for e in self.errors.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, e in self.errors.items() if not e < self.tol]


def _kink_distance(model: JointPGM, X: np.ndarray, noise) -> float:
    p = model.params
    fw = model.forward(X, noise=noise)
    pre = [model.M0 @ p["tfe.ff1.W"].data + p["tfe.ff1.b"].data]
    for name in ("rec", "pred"):
        pre.append(fw.fused.Z.data @ p[f"dec.{name}.W1"].data + p[f"dec.{name}.b1"].data)
    dist = min(float(np.abs(a).min()) for a in pre)
    if fw.W is not None:
        w = fw.W.data
        dist = min(dist, float(np.min(w - W_CLAMP)), float(np.min(1.0 - W_CLAMP - w)))
    return dist


def _draw_point(config: TrainConfig, n_vars: int, seed: int, attempt: int):
    rng = RngStream(seed, ("gradcheck", attempt))
    model = JointPGM(config.with_(seed=seed * 1000 + attempt), n_vars)
    B = config.batch
    X = rng.child("X").normal((B, n_vars, config.L))
    Y = rng.child("Y").normal((B, n_vars, config.H))
    noise = draw_noise([rng.child("noise", i) for i in range(B)], rng.child("time"), n_vars, config.d)
    return model, X, Y, noise


def gradcheck_model(config: TrainConfig = TINY, n_vars: int = 3, seed: int = 0, points: int = 3,
                    eps: float = 1e-4, tol: float = 1e-4, corrupt: str | None = None) -> GradCheckReport:
    """Compare reverse-mode gradients of the total loss with central differences.

    Each point redraws parameters, data and noise until every ReLU/LeakyReLU
    pre-activation and every clamped attention weight sits at least
    ``KINK_MARGIN`` away from its kink. ``corrupt`` names a parameter whose
    analytic gradient is deliberately perturbed (negative control).
    """
    errors: dict[str, float] = {}
    attempt = 0
    for _ in range(points):
        while True:
            model, X, Y, noise = _draw_point(config, n_vars, seed, attempt)
            attempt += 1
            if _kink_distance(model, X, noise) > KINK_MARGIN:
                break
        names, tensors = model.params.names(), model.params.tensors()
        fw = model.forward(X, Y, noise)
        analytic = ad.grad(fw.total, tensors)
        if corrupt is not None:
            analytic[names.index(corrupt)] = analytic[names.index(corrupt)] * 1.01 + 1e-3
        errs = grad_check_many(lambda: model.forward(X, Y, noise).total.item(),
                               [t.data for t in tensors], analytic, eps)
        for k, e in zip(names, errs):
            errors[k] = max(errors.get(k, 0.0), e)
    return GradCheckReport(errors, tol, points)


def adf_summary(series: RawSeries, max_lag: int | None = None) -> dict:
    lag = default_max_lag(series.n_steps) if max_lag is None else max_lag
    stats = {name: adf_statistic(row, lag) for name, row in zip(series.variable_names, series.values)}
    return {"max_lag": lag, "statistics": stats, "average": float(np.mean(list(stats.values())))}
