"""Interface reconstructions: hydrostatic (HSR) and hydrodynamic (HDR).

The hydrodynamic reconstruction perturbs the hydrostatic interface heights
by ``2 Fr^2 H`` where ``H`` is an explicit linearized solution of the
per-interface Bernoulli relation. No nonlinear solve is ever performed;
the quintic whose root ``H`` approximates is exposed only as a residual
for verification.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import (
    DEFAULT_CONSTANTS,
    DomainError,
    PhysicalConstants,
    State,
    _froude_sq,
    _scalar_or_array,
    velocity,
)

FLAT_TOL = 1e-14


class HArgs(NamedTuple):
    h_l: float
    h_r: float
    q_bar: float
    dz: float


class InterfacePair(NamedTuple):
    w_minus: State
    w_plus: State


class IntermediateState(NamedTuple):
    w_star: State
    z_star: float | np.ndarray


def _arrays(*xs):
    return np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in xs))


def calH(h_l, h_r, q_bar, dz, c: PhysicalConstants = DEFAULT_CONSTANTS, z_scale=1.0):
    """Linearized Bernoulli perturbation H(h_l, h_r, q_bar, dz).

    Total function. Branches, first match wins:

    * at rest next to a dry side whose bed emerges (``h_l < dz`` with
      ``h_r`` dry, or ``h_r < -dz`` with ``h_l`` dry): ``(h_r - h_l)/2``;
    * any other dry height: 0;
    * flat jump, ``|dz| <= 1e-14 max(1, z_scale)`` (this also covers the
      resonant ``Fr^2 = 1, dz = 0`` case): 0;
    * otherwise the closed-form root of the linearized quadratic.

    ``z_scale`` is the magnitude of the topography values the jump was
    formed from, so that "dz == 0" is detected relative to them.
    """
    h_l, h_r, q_bar, dz = _arrays(h_l, h_r, q_bar, dz)
    eps = c.eps_m
    dh = h_r - h_l
    dry_l = h_l <= eps
    dry_r = h_r <= eps
    at_rest = np.abs(q_bar) <= eps
    emerged = at_rest & ((dry_r & (h_l < dz)) | (dry_l & (h_r < -dz)))
    flat = np.abs(dz) <= FLAT_TOL * np.maximum(1.0, np.abs(z_scale))
    active = ~(dry_l | dry_r | flat)

    # inactive entries get harmless placeholders, so no floating-point warnings arise
    hl = np.where(active, h_l, 1.0)
    hr = np.where(active, h_r, 1.0)
    adz = np.where(active, np.abs(dz), 1.0)
    adh3 = np.abs(dh) ** 3
    one_m_fr2 = 1.0 - _froude_sq(hl, hr, q_bar, c.g)
    sz = np.sign(dz)
    e = dh + 0.25 * one_m_fr2 * sz * np.sqrt(adh3 / adz)
    x = np.sqrt(adz * adh3)
    s = np.sign(one_m_fr2) * sz
    root = np.sqrt(e * e + x)
    # E - s*root cancels when sign(E) == s; use the conjugate form there
    cancel = (np.sign(e) == s) & (e != 0)
    denom = np.where(cancel, np.abs(e) + root, 1.0)
    h_val = 0.25 * np.where(cancel, -s * x / denom, e - s * root)

    out = np.where(active, h_val, 0.0)
    out = np.where(emerged, 0.5 * dh, out)
    return _scalar_or_array(out)


def quadratic_residual(H, h_l, h_r, q_bar, dz, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Residual of the linearized quadratic whose root ``calH`` returns."""
    H, h_l, h_r, q_bar, dz = _arrays(H, h_l, h_r, q_bar, dz)
    dh = h_r - h_l
    if np.any(dz == 0) or np.any(dh == 0):
        raise DomainError("quadratic residual needs dz != 0 and h_r != h_l")
    if np.any(h_l <= 0) or np.any(h_r <= 0):
        raise DomainError("quadratic residual needs positive heights")
    fr2 = _froude_sq(h_l, h_r, q_bar, c.g)
    slope = 4.0 * np.sign(dz) * np.sqrt(np.abs(dz) / np.abs(dh) ** 3)
    return _scalar_or_array(2.0 * H * (1.0 - fr2 + slope * (dh - 2.0 * H)) + dz)


def quintic_residual(H, h_l, h_r, q_bar, dz, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Residual of the exact degree-five relation satisfied by steady data."""
    H, h_l, h_r, q_bar, dz = _arrays(H, h_l, h_r, q_bar, dz)
    h_bar = 0.5 * (h_l + h_r)
    sq = (h_bar * h_bar - H * H) ** 2
    return _scalar_or_array(2.0 * H * (c.g * sq - q_bar * q_bar * h_bar) + c.g * dz * sq)


def intermediate_state(w_l: State, w_r: State, z_l, z_r) -> IntermediateState:
    """Pick the pair on the higher side; ties go to the right cell."""
    z_l, z_r = _arrays(z_l, z_r)
    left = z_l > z_r
    h = np.where(left, np.asarray(w_l.h, dtype=float), np.asarray(w_r.h, dtype=float))
    q = np.where(left, np.asarray(w_l.q, dtype=float), np.asarray(w_r.q, dtype=float))
    z = np.where(left, z_l, z_r)
    return IntermediateState(State(_scalar_or_array(h), _scalar_or_array(q)), _scalar_or_array(z))


def _froude_times_H(h, h_star, q, dz, c, z_scale):
    # 2 Fr^2 H, defined as 0 as soon as one of the heights is dry
    wet = (h > c.eps_m) & (h_star > c.eps_m)
    hs = np.where(wet, h, 1.0)
    hst = np.where(wet, h_star, 1.0)
    fr2 = _froude_sq(hs, hst, q, c.g)
    H = np.asarray(calH(hs, hst, q, dz, c, z_scale))
    return np.where(wet, 2.0 * fr2 * H, 0.0)


def hdr_interface_states(
    w_l: State, w_r: State, z_l, z_r, c: PhysicalConstants = DEFAULT_CONSTANTS
) -> InterfacePair:
    """Hydrodynamic reconstruction of the two states at one interface."""
    h_l, q_l, h_r, q_r, z_l, z_r = _arrays(w_l.h, w_l.q, w_r.h, w_r.q, z_l, z_r)
    star = intermediate_state(State(h_l, q_l), State(h_r, q_r), z_l, z_r)
    z_star = np.asarray(star.z_star)
    h_star = np.asarray(star.w_star.h)
    z_scale = np.maximum(np.abs(z_l), np.abs(z_r))
    # both sides in a single vectorized pass
    shape = h_l.shape
    both = lambda a, b: np.concatenate([np.ravel(a), np.ravel(b)])  # noqa: E731
    h_side = both(h_l, h_r)
    z_side = both(z_l, z_r)
    zs = both(z_star, z_star)
    corr = _froude_times_H(h_side, both(h_star, h_star), both(q_l, q_r), zs - z_side, c, both(z_scale, z_scale))
    h_new = np.maximum(0.0, h_side + (z_side - zs) + corr)
    half = h_new.size // 2
    h_minus = h_new[:half].reshape(shape)
    h_plus = h_new[half:].reshape(shape)
    return InterfacePair(
        State(_scalar_or_array(h_minus), _scalar_or_array(q_l)),
        State(_scalar_or_array(h_plus), _scalar_or_array(q_r)),
    )


def hsr_interface_states(
    w_l: State, w_r: State, z_l, z_r, c: PhysicalConstants = DEFAULT_CONSTANTS
) -> InterfacePair:
    """Classical hydrostatic reconstruction; momenta rebuilt as h * u."""
    h_l, h_r, z_l, z_r = _arrays(w_l.h, w_r.h, z_l, z_r)
    z_star = np.maximum(z_l, z_r)
    h_minus = np.maximum(0.0, h_l + z_l - z_star)
    h_plus = np.maximum(0.0, h_r + z_r - z_star)
    u_l = np.asarray(velocity(w_l, c))
    u_r = np.asarray(velocity(w_r, c))
    return InterfacePair(
        State(_scalar_or_array(h_minus), _scalar_or_array(h_minus * u_l)),
        State(_scalar_or_array(h_plus), _scalar_or_array(h_plus * u_r)),
    )
