"""Minkowski-space primitives for the hyperboloid models of H^2 and H^3.

The last coordinate is timelike: in dimension ``n + 1`` the form is
``diag(1, ..., 1, -1)``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

J4 = np.diag([1.0, 1.0, 1.0, -1.0])
J3 = np.diag([1.0, 1.0, -1.0])


def form(dim: int) -> np.ndarray:
    return J4 if dim == 4 else J3 if dim == 3 else np.diag([1.0] * (dim - 1) + [-1.0])


def mdot(u, v) -> float | np.ndarray:
    """Lorentzian product, last coordinate timelike; broadcasts over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.sum(u[..., :-1] * v[..., :-1], axis=-1) - u[..., -1] * v[..., -1]


def classify(v, tol: float = 1e-12) -> str:
    q = float(mdot(v, v))
    if q > tol:
        return "spacelike"
    if q < -tol:
        return "timelike"
    return "lightlike"


def normalize_spacelike(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    q = mdot(v, v)
    if q <= 0:
        raise ValueError("vector is not spacelike")
    return v / np.sqrt(q)


def normalize_timelike(v) -> np.ndarray:
    """Scale onto the upper sheet ``<v, v> = -1``, last coordinate positive."""
    v = np.asarray(v, dtype=float)
    q = mdot(v, v)
    if q >= 0:
        raise ValueError("vector is not timelike")
    v = v / np.sqrt(-q)
    return v if v[-1] > 0 else -v


def point_distance(x, y) -> float:
    """Hyperbolic distance between two unit timelike vectors.

    Uses the chord form ``2 asinh(|x - y| / 2)``, which stays accurate for
    nearby points where ``acosh(-<x, y>)`` loses half the digits.
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    q = max(0.0, float(mdot(d, d)))
    return float(2.0 * np.arcsinh(np.sqrt(q) / 2.0))


def lorentz_cross(a, b) -> np.ndarray:
    """Vector orthogonal to ``a`` and ``b`` for the 3-dimensional form."""
    return J3 @ np.cross(a, b)


def reflection(n) -> np.ndarray:
    """Matrix of ``x -> x - 2 <x, n> n`` for a unit spacelike ``n``."""
    n = np.asarray(n, dtype=float)
    J = form(len(n))
    return np.eye(len(n)) - 2.0 * np.outer(n, n) @ J


def random_lorentz(rng: np.random.Generator, dim: int = 4, scale: float = 0.5) -> np.ndarray:
    """Random Lorentz transformation ``exp(J S)`` with ``S`` antisymmetric."""
    J = form(dim)
    A = rng.normal(scale=scale, size=(dim, dim))
    return expm(J @ (A - A.T) / 2)
