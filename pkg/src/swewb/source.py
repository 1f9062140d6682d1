"""Topography source discretizations.

``hdr_source`` is the first-order well-balanced source paired with the
hydrodynamic reconstruction; ``hsr_source`` is the classical hydrostatic
one; ``ho_source`` is a Gauss quadrature of -g h Z' for the high-order
schemes.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .core import DEFAULT_CONSTANTS, PhysicalConstants, _scalar_or_array, gauss_legendre
from .reconstruction import calH


class SourceValue(NamedTuple):
    s_h: float | np.ndarray
    s_q: float | np.ndarray


def _as_source(s_q):
    s_q = _scalar_or_array(s_q)
    return SourceValue(0.0 if np.ndim(s_q) == 0 else np.zeros_like(s_q), s_q)


def hdr_source(h_left_plus, h_right_minus, q_cell, dz_cell, dx,
               c: PhysicalConstants = DEFAULT_CONSTANTS, z_scale=1.0) -> SourceValue:
    """Well-balanced source for one cell.

    ``h_left_plus`` is the reconstructed height on the cell side of its left
    interface, ``h_right_minus`` the one at its right interface, and
    ``dz_cell`` the difference of the two interface topography values.
    The source vanishes when both heights are dry.
    """
    hm = np.asarray(h_left_plus, dtype=float)
    hp = np.asarray(h_right_minus, dtype=float)
    q = np.asarray(q_cell, dtype=float)
    dz = np.asarray(dz_cell, dtype=float)
    total = hm + hp
    wet = total > c.eps_m
    denom = np.where(wet, total, 1.0)
    H = np.asarray(calH(hm, hp, q, dz, c, z_scale))
    s_q = (-c.g * 2.0 * hm * hp / denom * dz + 4.0 * c.g / denom * H**3) / dx
    return _as_source(np.where(wet, s_q, 0.0))


def hsr_source(h_left_plus, h_right_minus, dx, c: PhysicalConstants = DEFAULT_CONSTANTS) -> SourceValue:
    hm = np.asarray(h_left_plus, dtype=float)
    hp = np.asarray(h_right_minus, dtype=float)
    return _as_source(0.5 * c.g * (hp * hp - hm * hm) / dx)


def central_derivative(z_fn: Callable, step: float) -> Callable:
    """Fourth-order central difference of ``z_fn``."""

    def dz(x):
        x = np.asarray(x, dtype=float)
        return (-z_fn(x + 2 * step) + 8 * z_fn(x + step) - 8 * z_fn(x - step) + z_fn(x - 2 * step)) / (12 * step)

    return dz


def ho_source(h_poly: Callable, dz_fn: Callable, x_left, dx, order: int = 3,
              c: PhysicalConstants = DEFAULT_CONSTANTS) -> SourceValue:
    """Cell average of -g h(x) Z'(x) by two-point Gauss-Legendre.

    ``h_poly(x)`` evaluates the reconstructed height at absolute positions;
    cells are ``[x_left, x_left + dx]`` (``x_left`` may be an array).
    Two points are exact up to degree 3, enough for orders 2 and 3.
    """
    if order not in (2, 3):
        raise ValueError(f"high-order source supports orders 2 and 3, got {order}")
    nodes, weights = gauss_legendre(2)
    mid = np.asarray(x_left, dtype=float) + 0.5 * dx
    total = 0.0
    for xi, w in zip(nodes, weights):
        x = mid + xi * dx
        total = total + w * np.asarray(h_poly(x), dtype=float) * np.asarray(dz_fn(x), dtype=float)
    return _as_source(-c.g * total)
