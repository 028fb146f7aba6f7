"""Three-term training objective: ELBO, time-latent KL and forecast MSE.

Every term is a mean over all of its elements.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from shiftcast.errors import NegativeVariance, NonFiniteLoss, ShapeMismatch
from shiftcast.nn import autodiff as ad
from shiftcast.nn.autodiff import Tensor


@dataclass(frozen=True)
class LossBreakdown:
    l_a: float
    l_b: float
    l_c: float
    total: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_var(*vs) -> None:
    for v in vs:
        if np.any(ad.as_tensor(v).data <= 0):
            raise NegativeVariance("variance must be strictly positive")


def mse(a, b) -> Tensor:
    a, b = ad.as_tensor(a), ad.as_tensor(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return ad.mean(ad.square(a - b))


def standard_normal_kl(mu, var) -> Tensor:
    """Mean of ``-log(sigma) + sigma^2/2 + mu^2/2 - 1/2`` (KL to N(0, 1))."""
    _check_var(var)
    mu, var = ad.as_tensor(mu), ad.as_tensor(var)
    return ad.mean(ad.log(var) * -0.5 + var * 0.5 + ad.square(mu) * 0.5 - 0.5)


def elbo_loss(recon, X, mu_Z, var_Z) -> Tensor:
    return mse(recon, X) + standard_normal_kl(mu_Z, var_Z)


def time_kl(mu_hat, var_hat, mu_t, var_t) -> Tensor:
    """Mean elementwise ``KL(N(mu_hat, var_hat) || N(mu_t, var_t))``."""
    _check_var(var_hat, var_t)
    mu_hat, var_hat = ad.as_tensor(mu_hat), ad.as_tensor(var_hat)
    ratio = var_hat / var_t
    return ad.mean(ad.log(ratio) * -0.5 + ratio * 0.5
                   + ad.square(mu_hat - mu_t) / var_t * 0.5 - 0.5)


def forecast_loss(pred, Y) -> Tensor:
    return mse(pred, Y)


def total_loss(a: float, b: float, c: float) -> LossBreakdown:
    a, b, c = float(a), float(b), float(c)
    total = a + b + c
    if not all(math.isfinite(v) for v in (a, b, c, total)):
        raise NonFiniteLoss(f"non-finite loss terms ({a}, {b}, {c})")
    return LossBreakdown(a, b, c, total)
