"""Gauss-Legendre rules on the square split along its diagonal, plus
high-order finite-difference differentiation on uniform grids."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def gauss_legendre_01(order: int):
    """Nodes and weights of the ``order``-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _panelled(order: int, panels: int):
    x, w = gauss_legendre_01(order)
    edges = np.arange(panels) / panels
    nodes = (edges[:, None] + x[None, :] / panels).ravel()
    weights = np.tile(w / panels, panels)
    return nodes, weights


def split_square_rule(l: float, order: int, panels: int = 1):
    """Product rule on [-l, l]^2 that never samples the diagonal q = q'.

    Each triangle is pulled back to the unit square by the collapsed map
    (u, v) -> (u, u v), whose Jacobian u is absorbed in the weights, and
    the unit square is covered by ``panels x panels`` Gauss-Legendre panels.

    Returns ``(q, q_prime, weights)``; the first half of the nodes lies in
    q > q', the second half is its mirror image in q < q'.
    """
    if order < 1 or panels < 1:
        raise ValueError("order and panels must be positive")
    u, wu = _panelled(order, panels)
    v, wv = _panelled(order, panels)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wu, wv) * uu * (2.0 * l) ** 2
    hi = -l + 2.0 * l * uu.ravel()
    lo = -l + 2.0 * l * (uu * vv).ravel()
    w = ww.ravel()
    return np.concatenate([hi, lo]), np.concatenate([lo, hi]), np.concatenate([w, w])


@lru_cache(maxsize=64)
def _fd_stencil(offsets: tuple[int, ...]) -> np.ndarray:
    # first-derivative weights for unit spacing, exact on polynomials of degree len-1
    k = len(offsets)
    a = np.vander(np.asarray(offsets, dtype=float), k, increasing=True).T
    rhs = np.zeros(k)
    rhs[1] = 1.0
    return np.linalg.solve(a, rhs)


def derivative(values: np.ndarray, h: float, width: int = 7) -> np.ndarray:
    """Order ``width - 1`` finite-difference derivative of uniform samples."""
    m = len(values)
    if m < width:
        raise ValueError(f"need at least {width} samples")
    half = width // 2
    out = np.empty(m, dtype=np.result_type(values, float))
    central = _fd_stencil(tuple(range(-half, half + 1)))
    acc = np.zeros(m - 2 * half, dtype=out.dtype)
    for j, c in enumerate(central):
        acc = acc + c * values[j : m - 2 * half + j]
    out[half : m - half] = acc
    for i in list(range(half)) + list(range(m - half, m)):
        start = min(max(i - half, 0), m - width)
        offs = tuple(range(start - i, start - i + width))
        out[i] = _fd_stencil(offs) @ values[start : start + width]
    return out / h


def log_log_slope(x, y):
    """Least-squares slope of log(y) against log(x); None when under-determined."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return None
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
