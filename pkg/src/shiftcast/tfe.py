"""Time factor encoder.

Normalized temporal orders spanning lookback and horizon are lifted with a
frozen multi-scale Fourier bank, mapped to an ``L x d`` time factor and then
to a Gaussian time latent of shape ``N x d``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shiftcast.errors import InvalidWindow, ShapeMismatch
from shiftcast.nn import autodiff as ad
from shiftcast.nn.autodiff import Tensor
from shiftcast.nn.layers import affine, gauss_sample, softplus_var, time_affine
from shiftcast.nn.params import ParamStore
from shiftcast.nn.rng import RngStream

SCALES = (0.01, 0.1, 1.0, 5.0, 10.0, 20.0, 50.0, 100.0)


def order_set(L: int, H: int) -> np.ndarray:
    """``(i + L) / (L + H - 1)`` for ``i = -L .. H-1``: evenly spaced on [0, 1]."""
    if L < 1 or H < 1:
        raise InvalidWindow(f"lookback and horizon must be >= 1, got L={L}, H={H}")
    return np.arange(L + H, dtype=np.float64) / (L + H - 1)


@dataclass(frozen=True)
class FourierBank:
    b: int
    seed: int
    entries: tuple  # one length b/16 frequency vector per scale, ascending scale order

    @classmethod
    def create(cls, b: int, seed: int) -> "FourierBank":
        per = b // (2 * len(SCALES))
        if b <= 0 or per * 2 * len(SCALES) != b:
            raise ValueError(f"Fourier width b must be a positive multiple of {2 * len(SCALES)}, got {b}")
        rng = RngStream(seed, ("fourier_bank",))
        return cls(b, seed, tuple(s * rng.normal(per) for s in SCALES))

    @property
    def width_per_scale(self) -> int:
        return self.b // (2 * len(SCALES))


def fourier_features(t: np.ndarray, bank: FourierBank) -> np.ndarray:
    """``(L+H) x b`` matrix ``sin(2 pi B_1 t) | cos(2 pi B_1 t) | ... | cos(2 pi B_8 t)``."""
    t = np.asarray(t, dtype=np.float64)[:, None]
    blocks = []
    for B in bank.entries:
        arg = 2.0 * np.pi * t * B[None, :]
        blocks += [np.sin(arg), np.cos(arg)]
    return np.concatenate(blocks, axis=1)


def init_params(store: ParamStore, n_vars: int, L: int, H: int, b: int, d: int,
                rng: RngStream | None) -> None:
    store.add("tfe.ff1.W", (b, d), b, rng)
    store.add("tfe.ff1.b", (d,), b, rng)
    store.add("tfe.ff2.W", (L + H, L), L + H, rng)
    store.add("tfe.ff2.b", (L,), L + H, rng)
    store.add("tfe.mu.W", (L, n_vars), L, rng)
    store.add("tfe.mu.b", (n_vars,), L, rng)
    store.add("tfe.var.W", (L, n_vars), L, rng)
    store.add("tfe.var.b", (n_vars,), L, rng)


def encode_time(M0, params: ParamStore) -> Tensor:
    """Feature width b -> d with ReLU, then time axis (L+H) -> L. Returns ``L x d``."""
    W2 = params["tfe.ff2.W"]
    if ad.as_tensor(M0).shape[-2] != W2.shape[0]:
        raise ShapeMismatch(f"time factor input has {ad.as_tensor(M0).shape[-2]} rows, expected {W2.shape[0]}")
    h = ad.relu(affine(M0, params["tfe.ff1.W"], params["tfe.ff1.b"]))
    return time_affine(h, W2, params["tfe.ff2.b"])


@dataclass
class TimeLatent:
    mu: Tensor
    var: Tensor
    sample: Tensor


def time_gauss(M1, params: ParamStore, rng: RngStream | None = None,
               eps: np.ndarray | None = None, zero_var: bool = False) -> TimeLatent:
    """Map the ``L x d`` time factor to ``N x d`` mean/variance along the time axis."""
    mu = time_affine(M1, params["tfe.mu.W"], params["tfe.mu.b"])
    var = softplus_var(time_affine(M1, params["tfe.var.W"], params["tfe.var.b"]))
    sample_var = var * 0.0 if zero_var else var
    return TimeLatent(mu, var, gauss_sample(mu, sample_var, rng=rng, eps=eps))
