"""Shallow-water model: states, constants, exact flux and shared scalar kernels.

All kernels accept either Python floats or numpy arrays (broadcast
elementwise) and return the same kind they were given.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

EPS_MACHINE = 2.0**-52


class DomainError(ValueError):
    """Raised when a kernel is evaluated outside its mathematical domain."""


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class PhysicalConstants:
    g: float = 9.81
    eps_m: float = EPS_MACHINE

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"gravity must be positive, got {self.g}")
        if not self.eps_m > 0:
            raise ValueError(f"dry threshold must be positive, got {self.eps_m}")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class State:
    """Conserved pair (h, q); fields may be floats or equal-shape arrays."""

    h: float | np.ndarray
    q: float | np.ndarray

    def __post_init__(self):
        if (np.asarray(self.h) < 0).any():
            raise ValueError("water height must be non-negative")

    def is_dry(self, c: PhysicalConstants = DEFAULT_CONSTANTS):
        return np.asarray(self.h) <= c.eps_m


def velocity(s: State, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """q/h on wet states, 0 where h <= eps_m."""
    h = np.asarray(s.h, dtype=float)
    q = np.asarray(s.q, dtype=float)
    wet = h > c.eps_m
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(wet, q / np.where(wet, h, 1.0), 0.0)
    return _scalar_or_array(u)


def exact_flux(s: State, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Physical flux (q, q^2/h + g h^2/2); dry states give (0, 0)."""
    h = np.asarray(s.h, dtype=float)
    q = np.asarray(s.q, dtype=float)
    wet = h > c.eps_m
    u = np.asarray(velocity(s, c))
    f_h = np.where(wet, q, 0.0)
    f_q = np.where(wet, q * u + 0.5 * c.g * h * h, 0.0)
    return _scalar_or_array(f_h), _scalar_or_array(f_q)


def bernoulli(s: State, z, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Bernoulli invariant q^2/(2h^2) + g(h + z) of a wet state."""
    h = np.asarray(s.h, dtype=float)
    if np.any(h <= c.eps_m):
        raise DomainError("Bernoulli invariant is undefined on dry states")
    q = np.asarray(s.q, dtype=float)
    return _scalar_or_array(q * q / (2.0 * h * h) + c.g * (h + np.asarray(z, dtype=float)))


def _froude_sq(h_l, h_r, q_bar, g):
    # unchecked; callers guarantee positive heights on the entries they keep
    return q_bar * q_bar * (h_l + h_r) / (2.0 * g * h_l * h_l * h_r * h_r)


def froude_sq(h_l, h_r, q_bar, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Two-height approximate squared Froude number.

    Equals q^2/(g h^3) when both heights coincide. Both heights must be
    strictly positive; dry contexts must short-circuit before calling.
    """
    h_l = np.asarray(h_l, dtype=float)
    h_r = np.asarray(h_r, dtype=float)
    if np.any(h_l <= 0) or np.any(h_r <= 0):
        raise DomainError("froude_sq needs strictly positive heights")
    return _scalar_or_array(_froude_sq(h_l, h_r, np.asarray(q_bar, dtype=float), c.g))


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [-1/2, 1/2] and weights summing to one."""
    if n_points not in _GAUSS_CACHE:
        if not 1 <= n_points <= 5:
            raise ValueError(f"n_points must be in 1..5, got {n_points}")
        x, w = np.polynomial.legendre.leggauss(n_points)
        _GAUSS_CACHE[n_points] = (0.5 * x, 0.5 * w)
    return _GAUSS_CACHE[n_points]


def cell_average(f: Callable, a, b, n_points: int = 5):
    """Gauss-Legendre average of ``f`` over [a, b].

    ``a`` and ``b`` may be arrays of cell bounds, in which case ``f`` must
    be vectorized. Exact for polynomials of degree <= 2*n_points - 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b <= a):
        raise ValueError("cell_average needs a < b")
    nodes, weights = gauss_legendre(n_points)
    mid = 0.5 * (a + b)
    width = b - a
    total = np.zeros(np.broadcast(a, b).shape)
    for x, w in zip(nodes, weights):
        total = total + w * np.asarray(f(mid + x * width), dtype=float)
    return _scalar_or_array(total)


class ConfigurationError(ValueError):
    """Inconsistent run or boundary configuration."""


class InvariantViolation(RuntimeError):
    """A solver invariant (non-negative heights) was broken."""
