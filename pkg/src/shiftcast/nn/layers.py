"""Differentiable building blocks shared by every encoder and decoder."""
from __future__ import annotations

import numpy as np

from shiftcast.errors import NegativeVariance, ShapeMismatch
from shiftcast.nn import autodiff as ad
from shiftcast.nn.autodiff import Tensor, affine
from shiftcast.nn.rng import RngStream

VAR_FLOOR = 1e-6
LEAKY_SLOPE = 0.01
W_CLAMP = 1e-6
U_CLAMP = 1e-12

__all__ = [
    "affine",
    "time_affine",
    "feedforward2",
    "softmax_rows",
    "softplus_var",
    "gauss_sample",
    "gumbel_noise",
    "gumbel_sigmoid",
]


def time_affine(x, W, b=None) -> Tensor:
    """Affine map along the second-to-last (time) axis: ``(W^T x + b[:, None])``."""
    return ad.transpose(affine(ad.transpose(x), W, b))


def feedforward2(x, W1, b1, W2, b2, activation: str = "relu") -> Tensor:
    """Two affine layers with an activation in between."""
    h = affine(x, W1, b1)
    if activation == "relu":
        h = ad.relu(h)
    elif activation == "leaky_relu":
        h = ad.leaky_relu(h, LEAKY_SLOPE)
    else:
        raise ValueError(f"unknown activation {activation!r}")
    return affine(h, W2, b2)


def softmax_rows(m) -> Tensor:
    return ad.softmax(m, axis=-1)


def softplus_var(x) -> Tensor:
    """Positive variance head: ``log(1 + e^x) + 1e-6``."""
    return ad.softplus(x) + VAR_FLOOR


def gauss_sample(mu, var, rng: RngStream | None = None, eps: np.ndarray | None = None) -> Tensor:
    """Reparameterized draw ``mu + sqrt(var) * eps``.

    Pass either a stream or pre-drawn standard normal noise. With neither,
    the mean is returned.
    """
    mu, var = ad.as_tensor(mu), ad.as_tensor(var)
    if mu.shape != var.shape:
        raise ShapeMismatch(f"mean {mu.shape} and variance {var.shape} differ")
    if np.any(var.data < 0):
        raise NegativeVariance("gauss_sample received a negative variance")
    if eps is None:
        if rng is None:
            return mu
        eps = rng.normal(mu.shape)
    elif eps.shape != mu.shape:
        raise ShapeMismatch(f"noise {eps.shape} does not match mean {mu.shape}")
    return mu + ad.sqrt(var) * eps


def gumbel_noise(rng: RngStream, shape) -> np.ndarray:
    """Difference of two independent Gumbel(0, 1) draws, ``g1 - g2``."""
    u1 = np.clip(rng.uniform(shape), U_CLAMP, 1.0 - U_CLAMP)
    u2 = np.clip(rng.uniform(shape), U_CLAMP, 1.0 - U_CLAMP)
    return -np.log(-np.log(u1)) + np.log(-np.log(u2))


def gumbel_sigmoid(w, tau: float, rng: RngStream | None = None, noise: np.ndarray | None = None) -> Tensor:
    """Relaxed Bernoulli edge sample ``sigmoid((logit(w) + g1 - g2) / tau)``.

    ``noise`` supplies ``g1 - g2`` directly; zeros give the noiseless relaxation.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    w = ad.clip(w, W_CLAMP, 1.0 - W_CLAMP)
    logits = ad.log(w) - ad.log(1.0 - w)
    if noise is None and rng is not None:
        noise = gumbel_noise(rng, w.shape)
    if noise is not None:
        logits = logits + noise
    return ad.sigmoid(logits * (1.0 / tau))
