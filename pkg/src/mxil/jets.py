"""Truncated time-Taylor arithmetic.

A jet of order ``K - 1`` is an array whose leading axis holds the
normalised coefficients ``c_k = (d_t^k v)(t0) / k!`` for ``k < K``.
"""

from __future__ import annotations

from math import factorial

import numpy as np
from numpy.typing import NDArray


def cauchy(a: NDArray, b: NDArray) -> NDArray:
    """Coefficients of the product of two jets (elementwise in trailing axes)."""
    K = min(a.shape[0], b.shape[0])
    tail = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((K,) + tail, dtype=np.result_type(a, b))
    for k in range(K):
        for i in range(k + 1):
            out[k] += a[i] * b[k - i]
    return out


def sq_norm(v: NDArray) -> NDArray:
    """Jet of ``|v|^2`` for a vector jet with components in the last axis."""
    return sum(cauchy(v[..., i], v[..., i]) for i in range(v.shape[-1]))


def outer(v: NDArray) -> NDArray:
    """Jet of ``v v^T`` for a vector jet."""
    return cauchy(v[..., :, None], v[..., None, :])


def constant(value: NDArray, K: int) -> NDArray:
    out = np.zeros((K,) + np.shape(value))
    out[0] = value
    return out


def to_derivatives(coeffs: NDArray) -> NDArray:
    """Normalised coefficients to plain derivatives ``d_t^k v``."""
    f = np.array([factorial(k) for k in range(coeffs.shape[0])], dtype=float)
    return coeffs * f.reshape((-1,) + (1,) * (coeffs.ndim - 1))


def from_derivatives(derivs: NDArray) -> NDArray:
    f = np.array([factorial(k) for k in range(derivs.shape[0])], dtype=float)
    return derivs / f.reshape((-1,) + (1,) * (derivs.ndim - 1))
