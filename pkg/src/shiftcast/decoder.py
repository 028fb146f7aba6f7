"""Dynamic inference of time factors and the one-shot reconstruction/prediction decoders."""
from __future__ import annotations

from dataclasses import dataclass

from shiftcast.nn.autodiff import Tensor
from shiftcast.nn.layers import affine, feedforward2, softplus_var
from shiftcast.nn.params import ParamStore
from shiftcast.nn.rng import RngStream


@dataclass
class InferredTimeLatent:
    Z_hat_t: Tensor
    mu: Tensor
    var: Tensor


def init_params(store: ParamStore, L: int, H: int, d: int, rng: RngStream | None,
                with_di: bool = True) -> None:
    if with_di:
        for name in ("proj", "mu", "var"):
            store.add(f"di.{name}.W", (d, d), d, rng)
            store.add(f"di.{name}.b", (d,), d, rng)
    for name, width in (("rec", L), ("pred", H)):
        store.add(f"dec.{name}.W1", (d, d), d, rng)
        store.add(f"dec.{name}.b1", (d,), d, rng)
        store.add(f"dec.{name}.W2", (d, width), d, rng)
        store.add(f"dec.{name}.b2", (width,), d, rng)


def dynamic_infer(Z, params: ParamStore) -> InferredTimeLatent:
    z_t = affine(Z, params["di.proj.W"], params["di.proj.b"])
    mu = affine(z_t, params["di.mu.W"], params["di.mu.b"])
    var = softplus_var(affine(z_t, params["di.var.W"], params["di.var.b"]))
    return InferredTimeLatent(z_t, mu, var)


def _decode(Z, params: ParamStore, name: str) -> Tensor:
    p = f"dec.{name}"
    return feedforward2(Z, params[f"{p}.W1"], params[f"{p}.b1"], params[f"{p}.W2"], params[f"{p}.b2"],
                        activation="leaky_relu")


def reconstruct(Z, params: ParamStore) -> Tensor:
    """Row-wise ``d -> L`` map, shared across series."""
    return _decode(Z, params, "rec")


def predict(Z, params: ParamStore) -> Tensor:
    """Row-wise ``d -> H`` map in a single step; no autoregressive feedback."""
    return _decode(Z, params, "pred")
