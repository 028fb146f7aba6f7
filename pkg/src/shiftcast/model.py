"""Full forward pass: time factor encoder, series encoder, dynamic inference, decoders, loss."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from shiftcast import decoder, ise, tfe
from shiftcast.config import TrainConfig
from shiftcast.errors import ShapeMismatch
from shiftcast.losses import elbo_loss, forecast_loss, time_kl
from shiftcast.nn.autodiff import Tensor
from shiftcast.nn.layers import gumbel_noise
from shiftcast.nn.params import ParamStore
from shiftcast.nn.rng import RngStream


@dataclass
class Noise:
    """Pre-drawn noise for one batch; every array has a leading window axis except ``time``."""

    intra: np.ndarray  # B x N x d
    inter: np.ndarray  # B x N x d
    gumbel: np.ndarray  # B x N x N, already g1 - g2
    time: np.ndarray  # N x d

    def take(self, idx) -> "Noise":
        return Noise(self.intra[idx], self.inter[idx], self.gumbel[idx], self.time)


def draw_noise(streams: Sequence[RngStream], time_stream: RngStream, n_vars: int, d: int) -> Noise:
    """One stream per window; every window draws the full bundle in a fixed order."""
    intra, inter, gum = [], [], []
    for s in streams:
        intra.append(s.normal((n_vars, d)))
        inter.append(s.normal((n_vars, d)))
        gum.append(gumbel_noise(s, (n_vars, n_vars)))
    return Noise(np.stack(intra), np.stack(inter), np.stack(gum), time_stream.normal((n_vars, d)))


@dataclass
class Forward:
    M1: Tensor
    time: tfe.TimeLatent
    gate: Tensor
    H: Tensor
    H_hat: Tensor
    intra: ise.GaussianLatent
    W: Tensor | None
    A: Tensor | None
    H_tilde: Tensor | None
    inter: ise.GaussianLatent | None
    fused: ise.FusedLatent
    di: decoder.InferredTimeLatent | None
    recon: Tensor
    pred: Tensor
    l_a: Tensor | None = None
    l_b: Tensor | None = None
    l_c: Tensor | None = None
    total: Tensor | None = None


class JointPGM:
    """Dual-encoder latent forecaster for ``n_vars`` series.

    ``forward`` runs in sampling mode when ``noise`` is given and in mean mode
    otherwise: every Gaussian node returns its mean and the adjacency is the
    noiseless tempered sigmoid of the attention weights.
    """

    def __init__(self, config: TrainConfig, n_vars: int, init: bool = True):
        self.config = config
        self.n_vars = n_vars
        c = config
        self.bank = tfe.FourierBank.create(c.b, c.seed)
        self.M0 = tfe.fourier_features(tfe.order_set(c.L, c.H), self.bank)
        rng = RngStream(c.seed, ("init",)) if init else None
        self.params = ParamStore()
        tfe.init_params(self.params, n_vars, c.L, c.H, c.b, c.d, rng)
        ise.init_params(self.params, n_vars, c.L, c.d, c.K, rng)
        decoder.init_params(self.params, c.L, c.H, c.d, rng)

    def forward(self, X, Y=None, noise: Noise | None = None, gate_override=None) -> Forward:
        c, p = self.config, self.params
        X = np.asarray(X, dtype=np.float64) if not isinstance(X, Tensor) else X
        if X.shape[-2:] != (self.n_vars, c.L):
            raise ShapeMismatch(f"expected lookback of shape (N={self.n_vars}, L={c.L}), got {X.shape[-2:]}")

        M1 = tfe.encode_time(self.M0, p)
        time = tfe.time_gauss(M1, p, eps=None if noise is None else noise.time)

        H = ise.embed_series(X, p)
        if gate_override is not None:
            G = Tensor(np.broadcast_to(np.asarray(gate_override, float), (self.n_vars, c.d)).copy())
        elif not c.use_gate:
            G = Tensor(np.ones((self.n_vars, c.d)))
        else:
            G = ise.temporal_gate(M1, p)
        H_hat = ise.apply_gate(G, H)
        intra = ise.intra_gauss(H_hat, p, eps=None if noise is None else noise.intra)

        W = A = H_tilde = inter = None
        if c.use_inter:
            W = ise.attention_graph(intra.sample, p)
            gnoise = np.zeros(W.shape) if noise is None else noise.gumbel
            A = ise.sample_adjacency(W, c.tau, noise=gnoise)
            H_tilde = ise.multi_hop(H_hat, A, p, c.K)
            inter = ise.inter_gauss(H_tilde, p, eps=None if noise is None else noise.inter)
        fused = ise.fuse(intra, inter, c.effective_alpha)

        di = decoder.dynamic_infer(fused.Z, p) if c.use_di else None
        recon = decoder.reconstruct(fused.Z, p)
        pred = decoder.predict(fused.Z, p)
        out = Forward(M1, time, G, H, H_hat, intra, W, A, H_tilde, inter, fused, di, recon, pred)

        if Y is not None:
            out.l_a = elbo_loss(recon, X, fused.mu, fused.var)
            out.l_b = time_kl(di.mu, di.var, time.mu, time.var) if di is not None else Tensor(0.0)
            out.l_c = forecast_loss(pred, Y)
            out.total = out.l_a + out.l_b + out.l_c
        return out

    def predict(self, X, noise: Noise | None = None) -> np.ndarray:
        return self.forward(X, noise=noise).pred.data

    def state(self) -> dict[str, np.ndarray]:
        return self.params.state()

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        self.params.load_state(state)
