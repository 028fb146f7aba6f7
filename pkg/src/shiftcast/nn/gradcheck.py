"""Central finite-difference gradient verification."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from shiftcast.errors import NonFiniteGradient

ABS_FLOOR = 1e-8


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = ABS_FLOOR) -> float:
    """Max coordinate-wise ``|a - n| / max(|a|, |n|, floor)``."""
    a, n = np.ravel(analytic), np.ravel(numeric)
    if a.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom))


def numeric_grad(f: Callable[[], float], x: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    """Central differences of ``f`` w.r.t. the array ``x``, perturbed in place."""
    g = np.zeros_like(x)
    flat, gflat = x.reshape(-1), g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f()
        flat[i] = orig - eps
        fm = f()
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return g


def grad_check(f: Callable[[np.ndarray], tuple[float, np.ndarray]], point: np.ndarray,
               eps: float = 1e-4) -> float:
    """Compare the gradient returned by ``f`` with central differences.

    ``f(x)`` returns ``(value, gradient)``. Returns the max relative error.
    """
    x = np.array(point, dtype=np.float64)
    _, analytic = f(x)
    analytic = np.asarray(analytic, dtype=np.float64)
    if not np.all(np.isfinite(analytic)):
        raise NonFiniteGradient("analytic gradient contains NaN or Inf")
    numeric = numeric_grad(lambda: float(f(x)[0]), x, eps)
    if not np.all(np.isfinite(numeric)):
        raise NonFiniteGradient("finite-difference gradient contains NaN or Inf")
    return relative_error(analytic, numeric)


def grad_check_many(loss: Callable[[], float], arrays: Sequence[np.ndarray],
                    analytic: Sequence[np.ndarray], eps: float = 1e-4) -> list[float]:
    """Per-array max relative error; ``arrays`` are perturbed in place."""
    errs = []
    for arr, ga in zip(arrays, analytic):
        if not np.all(np.isfinite(ga)):
            raise NonFiniteGradient("analytic gradient contains NaN or Inf")
        gn = numeric_grad(loss, arr, eps)
        errs.append(relative_error(ga, gn))
    return errs
