"""HLL numerical flux with Davis wave-speed bounds."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import DEFAULT_CONSTANTS, PhysicalConstants, State, _scalar_or_array, exact_flux, velocity

DEGENERATE_SPREAD = 1e-14


class FluxResult(NamedTuple):
    f_h: float | np.ndarray
    f_q: float | np.ndarray
    s_max: float | np.ndarray


def _celerity(h, c):
    return np.sqrt(c.g * np.where(h > c.eps_m, h, 0.0))


def wave_speeds(w_l: State, w_r: State, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Davis estimates (s_l, s_r); both zero when both states are dry."""
    h_l = np.asarray(w_l.h, dtype=float)
    h_r = np.asarray(w_r.h, dtype=float)
    u_l = np.asarray(velocity(w_l, c))
    u_r = np.asarray(velocity(w_r, c))
    c_l = _celerity(h_l, c)
    c_r = _celerity(h_r, c)
    s_l = np.minimum(u_l - c_l, u_r - c_r)
    s_r = np.maximum(u_l + c_l, u_r + c_r)
    both_dry = (h_l <= c.eps_m) & (h_r <= c.eps_m)
    s_l = np.where(both_dry, 0.0, s_l)
    s_r = np.where(both_dry, 0.0, s_r)
    return _scalar_or_array(s_l), _scalar_or_array(s_r)


def hll_flux(w_l: State, w_r: State, c: PhysicalConstants = DEFAULT_CONSTANTS) -> FluxResult:
    """Three-branch HLL flux.

    Discharges attached to dry states (h <= eps_m) are treated as zero,
    in line with the dry-velocity convention, so a reconstructed dry
    interface state cannot inject a spurious intermediate mass.
    """
    h_l = np.asarray(w_l.h, dtype=float)
    h_r = np.asarray(w_r.h, dtype=float)
    q_l = np.where(h_l > c.eps_m, np.asarray(w_l.q, dtype=float), 0.0)
    q_r = np.where(h_r > c.eps_m, np.asarray(w_r.q, dtype=float), 0.0)
    left = State(h_l, q_l)
    right = State(h_r, q_r)
    s_l, s_r = (np.asarray(s) for s in wave_speeds(left, right, c))
    fl_h, fl_q = (np.asarray(f) for f in exact_flux(left, c))
    fr_h, fr_q = (np.asarray(f) for f in exact_flux(right, c))

    spread = s_r - s_l
    degenerate = spread <= DEGENERATE_SPREAD
    inv = 1.0 / np.where(degenerate, 1.0, spread)
    mid_h = (s_r * fl_h - s_l * fr_h + s_l * s_r * (h_r - h_l)) * inv
    mid_q = (s_r * fl_q - s_l * fr_q + s_l * s_r * (q_r - q_l)) * inv

    upwind_l = (s_l >= 0) | degenerate
    upwind_r = (s_r <= 0) & ~upwind_l
    f_h = np.where(upwind_l, fl_h, np.where(upwind_r, fr_h, mid_h))
    f_q = np.where(upwind_l, fl_q, np.where(upwind_r, fr_q, mid_q))
    s_max = np.maximum(np.abs(s_l), np.abs(s_r))
    return FluxResult(_scalar_or_array(f_h), _scalar_or_array(f_q), _scalar_or_array(s_max))


def max_wave_speed(states: State, c: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """max(|u| + sqrt(g h)) over a field; 0 on an all-dry field."""
    h = np.atleast_1d(np.asarray(states.h, dtype=float))
    if h.size == 0:
        raise ValueError("max_wave_speed needs at least one state")
    u = np.atleast_1d(np.asarray(velocity(states, c)))
    return float(np.max(np.abs(u) + _celerity(h, c)))
