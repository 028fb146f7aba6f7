"""Dense float64 numeric kernel: tape autodiff, layers, parameters, RNG."""
from shiftcast.nn.autodiff import Tensor, grad
from shiftcast.nn.gradcheck import grad_check
from shiftcast.nn.layers import (
    affine,
    feedforward2,
    gauss_sample,
    gumbel_sigmoid,
    softmax_rows,
    softplus_var,
    time_affine,
)
from shiftcast.nn.params import ParamStore
from shiftcast.nn.rng import RngStream

__all__ = [
    "Tensor",
    "grad",
    "grad_check",
    "affine",
    "feedforward2",
    "gauss_sample",
    "gumbel_sigmoid",
    "softmax_rows",
    "softplus_var",
    "time_affine",
    "ParamStore",
    "RngStream",
]
