"""Gauss-Legendre rules mapped onto mesh faces and element boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_POINTS = 64


@dataclass(frozen=True, eq=False)
class QuadRule:
    points: np.ndarray  # (q, dim) physical coordinates
    weights: np.ndarray  # (q,)

    def __len__(self) -> int:
        return self.weights.size


def _legendre(n: int, x: np.ndarray):
    """Return P_n(x) and P_n'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for m in range(2, n + 1):
        p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
    return p1, n * (x * p1 - p0) / (x * x - 1.0)


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_1d(n: int):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [-1, 1]."""
    n = int(n)
    if not 1 <= n <= MAX_POINTS:
        raise ValueError(f"number of Gauss points must lie in [1, {MAX_POINTS}], got {n}")
    if n == 1:
        return np.zeros(1), np.full(1, 2.0)
    x, w = _gauss_legendre(n)
    return x.copy(), w.copy()


def _interval_rule(a: float, b: float, n: int):
    x, w = gauss_legendre_1d(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _tensor_rule(lo, hi, axes, order: int, dim: int, fixed=None):
    grids, wts = [], []
    for a in axes:
        x, w = _interval_rule(lo[a], hi[a], order)
        grids.append(x)
        wts.append(w)
    mesh = np.meshgrid(*grids, indexing="ij")
    wmesh = np.meshgrid(*wts, indexing="ij")
    q = mesh[0].size if mesh else 1
    pts = np.empty((q, dim))
    for i, a in enumerate(axes):
        pts[:, a] = mesh[i].ravel()
    if fixed is not None:
        pts[:, fixed[0]] = fixed[1]
    weights = np.prod([w.ravel() for w in wmesh], axis=0) if wmesh else np.ones(1)
    return QuadRule(pts, weights)


def face_quadrature(face, order: int) -> QuadRule:
    """Tensor Gauss rule with ``order`` points per tangential direction."""
    dim = face.lo.size
    axes = [a for a in range(dim) if a != face.axis]
    return _tensor_rule(face.lo, face.hi, axes, order, dim, fixed=(face.axis, face.coord))


def volume_quadrature(lo, hi, order: int) -> QuadRule:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return _tensor_rule(lo, hi, list(range(lo.size)), order, lo.size)


def default_order(wavenumber: float, length: float) -> int:
    """Points per direction for products of plane waves over ``length``.

    A product of two waves oscillates at up to ``2 |k|``; Gauss-Legendre
    reaches double precision on such an integrand with about ``|k| L + 7`` points.
    """
    return min(MAX_POINTS, max(10, math.ceil(abs(wavenumber) * length) + 8))
