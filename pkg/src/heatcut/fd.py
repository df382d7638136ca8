"""Central finite-difference stencils."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def central_weights(order: int, npoints: int) -> tuple:
    """Weights w_k for f^(order)(0) ~ sum_k w_k f(k h) / h^order, k = -m..m."""
    if npoints % 2 == 0 or npoints <= order:
        raise ValueError(f"need an odd stencil with more than {order} points, got {npoints}")
    m = npoints // 2
    k = np.arange(-m, m + 1, dtype=float)
    V = np.vander(k, increasing=True).T
    rhs = np.zeros(npoints)
    rhs[order] = np.prod(np.arange(1, order + 1, dtype=float))
    return tuple(np.linalg.solve(V, rhs))


def stencil_points(order: int) -> int:
    """Smallest odd stencil of at least five points that resolves `order`."""
    return max(5, order + 1 + order % 2)


def derivative(f_values: np.ndarray, order: int, h: float) -> np.ndarray:
    """Apply a central stencil to samples f(kh) stacked along axis 0."""
    w = np.asarray(central_weights(order, f_values.shape[0]))
    return np.tensordot(w, f_values, axes=(0, 0)) / h**order


def first_second(f, h: float):
    """First and second derivative of a scalar function at 0 with the 5-point stencil."""
    s = h * np.arange(-2, 3)
    vals = np.array([f(si) for si in s])
    return derivative(vals, 1, h), derivative(vals, 2, h)


def derivative_norms(curve, m_max: int, h_low: float, h_high: float) -> np.ndarray:
    """Norms of derivatives 1..m_max of a vector-valued curve at 0.

    Orders up to 4 use a 5-point stencil with step h_low; higher orders use
    the smallest wider stencil with step h_high.
    """
    out = np.zeros(m_max)
    cache: dict = {}

    def sample(h, npts):
        key = (h, npts)
        if key not in cache:
            m = npts // 2
            cache[key] = np.array([np.atleast_1d(curve(k * h)) for k in range(-m, m + 1)])
        return cache[key]

    for order in range(1, m_max + 1):
        if order <= 4:
            h, npts = h_low, 5
        else:
            h, npts = h_high, stencil_points(order)
        out[order - 1] = np.linalg.norm(derivative(sample(h, npts), order, h))
    return out
