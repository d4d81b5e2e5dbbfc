"""NumPy implementations of the hot kernels (the fallback backend).

The compiled extension in _ckernels.pyx mirrors this module function by
function; both operate on contiguous float64 arrays.
"""

from __future__ import annotations

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    # exp overflow for very negative inputs still yields the correct limit 0
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def linear_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ w + b


def linear_backward(x, w, gy, need_gx=True):
    gx = gy @ w.T if need_gx else None
    gw = x.T @ gy
    gb = gy.sum(axis=0)
    return gx, gw, gb


def silu_forward(x: np.ndarray) -> np.ndarray:
    return x * sigmoid(x)


def silu_backward(x: np.ndarray, gy: np.ndarray) -> np.ndarray:
    s = sigmoid(x)
    return gy * (s * (1.0 + x * (1.0 - s)))


def adam_update(p, g, m, v, step, lr, beta1, beta2, eps):
    """In-place Adam with bias correction; `step` is the 1-based step count."""
    m[...] = beta1 * m + (1.0 - beta1) * g
    v[...] = beta2 * v + (1.0 - beta2) * (g * g)
    mhat = m / (1.0 - beta1**step)
    vhat = v / (1.0 - beta2**step)
    p[...] -= lr * mhat / (np.sqrt(vhat) + eps)
