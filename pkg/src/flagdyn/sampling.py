"""Deterministic low-discrepancy samplers.

All samplers are stateless functions of (seed, index) built on Kronecker
sequences with generalized golden-ratio increments, so reports and
certificates are reproducible across runs and platforms.
"""

from __future__ import annotations

import numpy as np


def _phi(dim: int) -> float:
    # generalized golden ratio: unique positive root of x**(dim+1) = x + 1
    x = 2.0
    for _ in range(64):
        x = (1 + x) ** (1.0 / (dim + 1))
    return x


def kronecker(n: int, dim: int, seed: int = 0) -> np.ndarray:
    """(n, dim) low-discrepancy points in the unit cube."""
    g = _phi(dim)
    alpha = (1.0 / g) ** np.arange(1, dim + 1)
    start = 0.5 + 0.618033988749895 * seed
    idx = np.arange(1, n + 1)[:, None]
    return (start + idx * alpha[None, :]) % 1.0


def ball_points(n: int, dim: int, seed: int = 0) -> np.ndarray:
    """(n, dim) low-discrepancy points in the unit ball (radial map)."""
    if dim == 1:
        u = kronecker(n, 1, seed)[:, 0]
        return (2.0 * u - 1.0)[:, None]
    u = kronecker(n, dim + 1, seed)
    dirs = sphere_points_from_cube(u[:, :dim])
    radii = u[:, dim] ** (1.0 / dim)
    return dirs * radii[:, None]


def sphere_points(n: int, dim: int, seed: int = 0) -> np.ndarray:
    """(n, dim) low-discrepancy unit vectors (dim >= 1)."""
    if dim == 1:
        signs = np.where(kronecker(n, 1, seed)[:, 0] < 0.5, -1.0, 1.0)
        return signs[:, None]
    u = kronecker(n, dim, seed)
    return sphere_points_from_cube(u)


def sphere_points_from_cube(u: np.ndarray) -> np.ndarray:
    """Map unit-cube rows to the unit sphere via the Gaussian inverse CDF."""
    from scipy.special import ndtri

    z = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return z / norms


def simplex_weights(n: int, k: int, seed: int = 0) -> np.ndarray:
    """(n, k) positive weights summing to 1 (low-discrepancy Dirichlet-like)."""
    u = kronecker(n, k, seed)
    w = -np.log(np.clip(u, 1e-12, 1.0))
    return w / np.sum(w, axis=1, keepdims=True)
