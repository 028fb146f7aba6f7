"""Independence-based series encoder: intra-series and inter-series learners.

All functions accept a leading batch axis; shapes below omit it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from shiftcast.errors import AlphaOutOfRange, ShapeMismatch
from shiftcast.nn import autodiff as ad
from shiftcast.nn.autodiff import Tensor
from shiftcast.nn.layers import affine, gauss_sample, gumbel_sigmoid, softmax_rows, softplus_var, time_affine
from shiftcast.nn.params import ParamStore
from shiftcast.nn.rng import RngStream


@dataclass
class GaussianLatent:
    mu: Tensor
    var: Tensor
    sample: Tensor


@dataclass
class FusedLatent:
    Z: Tensor
    mu: Tensor
    var: Tensor


def init_params(store: ParamStore, n_vars: int, L: int, d: int, K: int,
                rng: RngStream | None) -> None:
    store.add("gate.W", (L, n_vars), L, rng)
    store.add("gate.b", (n_vars,), L, rng)
    store.add("intra.embed.W", (L, d), L, rng)
    store.add("intra.embed.b", (d,), L, rng)
    for head in ("mu", "var"):
        store.add(f"intra.{head}.W", (d, d), d, rng)
        store.add(f"intra.{head}.b", (d,), d, rng)
    store.add("inter.query.W", (d, d), d, rng)
    store.add("inter.key.W", (d, d), d, rng)
    for k in range(1, K + 1):
        store.add(f"inter.hop{k}.W", (d, d), d, rng)
    for head in ("mu", "var"):
        store.add(f"inter.{head}.W", (d, d), d, rng)
        store.add(f"inter.{head}.b", (d,), d, rng)


# intra-series learner


def embed_series(X, params: ParamStore) -> Tensor:
    """One shared ``L -> d`` linear layer applied to every series row."""
    X = ad.as_tensor(X)
    W = params["intra.embed.W"]
    if X.shape[-1] != W.shape[0]:
        raise ShapeMismatch(f"lookback length {X.shape[-1]} does not match embedding input {W.shape[0]}")
    return affine(X, W, params["intra.embed.b"])


def temporal_gate(M1, params: ParamStore) -> Tensor:
    """``sigmoid`` of a linear map taking the ``L x d`` time factor to ``N x d``."""
    return ad.sigmoid(time_affine(M1, params["gate.W"], params["gate.b"]))


def apply_gate(G, H) -> Tensor:
    G, H = ad.as_tensor(G), ad.as_tensor(H)
    if G.shape[-2:] != H.shape[-2:]:
        raise ShapeMismatch(f"gate {G.shape} does not match embeddings {H.shape}")
    return G * H


def _gauss_head(x, params: ParamStore, prefix: str, rng, eps) -> GaussianLatent:
    mu = affine(x, params[f"{prefix}.mu.W"], params[f"{prefix}.mu.b"])
    var = softplus_var(affine(x, params[f"{prefix}.var.W"], params[f"{prefix}.var.b"]))
    return GaussianLatent(mu, var, gauss_sample(mu, var, rng=rng, eps=eps))


def intra_gauss(H_hat, params: ParamStore, rng: RngStream | None = None,
                eps: np.ndarray | None = None) -> GaussianLatent:
    return _gauss_head(H_hat, params, "intra", rng, eps)


# inter-series learner


def attention_graph(Z_hat, params: ParamStore) -> Tensor:
    """Row-stochastic ``N x N`` weights ``softmax(Q K^T / sqrt(d))``."""
    WQ, WK = params["inter.query.W"], params["inter.key.W"]
    Q = affine(Z_hat, WQ)
    Kt = affine(Z_hat, WK)
    scores = ad.matmul(Q, ad.transpose(Kt)) * (1.0 / math.sqrt(WQ.shape[1]))
    return softmax_rows(scores)


def sample_adjacency(W, tau: float, rng: RngStream | None = None,
                     noise: np.ndarray | None = None) -> Tensor:
    """Elementwise Gumbel-sigmoid relaxation of the attention weights."""
    return gumbel_sigmoid(W, tau, rng=rng, noise=noise)


def multi_hop(H_hat, A, params: ParamStore, K: int) -> Tensor:
    """``sum_k Linear_k(A^k H_hat)`` with bias-free per-hop maps."""
    if K < 1:
        raise ValueError("K must be >= 1")
    A, h = ad.as_tensor(A), ad.as_tensor(H_hat)
    if A.shape[-1] != h.shape[-2]:
        raise ShapeMismatch(f"adjacency {A.shape} incompatible with representations {h.shape}")
    out = None
    for k in range(1, K + 1):
        h = ad.matmul(A, h)
        term = affine(h, params[f"inter.hop{k}.W"])
        out = term if out is None else out + term
    return out


def inter_gauss(H_tilde, params: ParamStore, rng: RngStream | None = None,
                eps: np.ndarray | None = None) -> GaussianLatent:
    return _gauss_head(H_tilde, params, "inter", rng, eps)


def fuse(intra: GaussianLatent, inter: GaussianLatent | None, alpha: float) -> FusedLatent:
    """``Z = alpha Z_hat + (1 - alpha) Z_tilde`` with the matching moments.

    The two samples carry independent noise, so the fused variance is
    ``alpha^2 var_hat + (1 - alpha)^2 var_tilde``. ``inter=None`` is only
    allowed with ``alpha == 1``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    if inter is None:
        if alpha != 1.0:
            raise ValueError("inter branch is required unless alpha == 1")
        return FusedLatent(intra.sample, intra.mu, intra.var)
    if intra.mu.shape != inter.mu.shape:
        raise ShapeMismatch(f"intra {intra.mu.shape} and inter {inter.mu.shape} latents differ")
    a, c = alpha, 1.0 - alpha
    return FusedLatent(
        intra.sample * a + inter.sample * c,
        intra.mu * a + inter.mu * c,
        intra.var * (a * a) + inter.var * (c * c),
    )
