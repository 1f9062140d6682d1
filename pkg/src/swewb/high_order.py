"""Well-balanced high-order extension.

Limited polynomial reconstructions (degree 1 minmod, degree 2 quadratic
with a box limiter) are blended toward the cell means by a per-interface
steady-state detector theta. Where the data are a discrete steady state
theta vanishes and the update collapses onto the first-order fully
well-balanced step; elsewhere theta is 1 up to O(dx^d) and the scheme keeps
its high order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import DEFAULT_CONSTANTS, PhysicalConstants, State, _scalar_or_array
from .flux import hll_flux
from .reconstruction import InterfacePair, hdr_interface_states
from .scheme import (
    BoundaryCondition,
    FieldState,
    StageResult,
    Topography,
    apply_boundary,
    enforce_nonnegative,
    first_order_source,
)
from .source import central_derivative, ho_source

NOT_STEADY = 1e300
FROZEN_C = 1e-14


def minmod(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same = a * b > 0
    return _scalar_or_array(np.where(same, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0))


def slope_minmod(w_prev, w, w_next, dx):
    """Minmod of the one-sided differences, per variable."""
    w_prev, w, w_next = (np.asarray(v, dtype=float) for v in (w_prev, w, w_next))
    return minmod((w - w_prev) / dx, (w_next - w) / dx)


@dataclass(frozen=True)
class CellPolynomial:
    """Per-cell polynomials ``mean + b xi + c (xi^2 - dx^2/12)``.

    ``xi = x - x_i``; the quadratic term is shifted so that the cell
    average equals ``mean`` for any coefficients. Arrays are shaped
    ``(n_vars, n_cells)``.
    """

    mean: np.ndarray
    b: np.ndarray
    c: np.ndarray
    dx: float

    def deviation(self, xi):
        return self.b * xi + self.c * (xi * xi - self.dx**2 / 12.0)

    def __call__(self, xi):
        return self.mean + self.deviation(xi)

    def traces(self):
        """Deviations at the left (-dx/2) and right (+dx/2) cell faces."""
        return self.deviation(-0.5 * self.dx), self.deviation(0.5 * self.dx)

    def scaled(self, factor) -> "CellPolynomial":
        return CellPolynomial(self.mean, self.b * factor, self.c * factor, self.dx)


def poly_reconstruct(values, degree: int, dx: float) -> CellPolynomial:
    """Limited reconstruction for every cell that has two neighbours.

    ``values`` is ``(n_vars, n)`` (or 1-D) over a ghost-extended row; the
    result covers cells ``1 .. n-2``.
    """
    v = np.atleast_2d(np.asarray(values, dtype=float))
    prev, mid, nxt = v[:, :-2], v[:, 1:-1], v[:, 2:]
    if degree == 1:
        return CellPolynomial(mid, slope_minmod(prev, mid, nxt, dx), np.zeros_like(mid), dx)
    if degree != 2:
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    b = (nxt - prev) / (2.0 * dx)
    curv = (nxt - 2.0 * mid + prev) / (2.0 * dx * dx)
    lo = np.minimum(np.minimum(prev, mid), nxt) - mid
    hi = np.maximum(np.maximum(prev, mid), nxt) - mid
    d_left = -0.5 * b * dx + curv * dx * dx / 6.0
    d_right = 0.5 * b * dx + curv * dx * dx / 6.0
    d_max = np.maximum(d_left, d_right)
    d_min = np.minimum(d_left, d_right)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.ones_like(mid)
        phi = np.where(d_max > hi, np.minimum(phi, hi / d_max), phi)
        phi = np.where(d_min < lo, np.minimum(phi, lo / d_min), phi)
    phi = np.clip(phi, 0.0, 1.0)
    return CellPolynomial(mid, b * phi, curv * phi, dx)


def positivity_fix(p: CellPolynomial, dx: float | None = None, eps_m: float = DEFAULT_CONSTANTS.eps_m,
                   var: int = 0) -> CellPolynomial:
    """Scale the height polynomial so both face values are non-negative.

    The mean is untouched, so the cell average is preserved; a mean at or
    below ``eps_m`` yields the constant polynomial.
    """
    mean = p.mean[var]
    d_left, d_right = (t[var] for t in p.traces())
    worst = np.minimum(d_left, d_right)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(mean + worst < 0, mean / -worst, 1.0)
    lam = np.where(mean <= eps_m, 0.0, np.clip(lam, 0.0, 1.0))
    factor = np.ones_like(p.mean)
    factor[var] = lam
    return p.scaled(factor)


def steady_indicator_eps(w_l: State, w_r: State, z_l, z_r, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Distance of an interface pair from a per-interface steady state.

    Norm of the jumps of discharge and Bernoulli invariant. Two dry cells,
    or a pair at rest whose wet side sits below the dry side's bed, count
    as steady (0); any other wet/dry pair is flagged as unsteady.
    """
    h_l, q_l, h_r, q_r, z_l, z_r = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (w_l.h, w_l.q, w_r.h, w_r.q, z_l, z_r)))
    eps = c.eps_m
    dry_l = h_l <= eps
    dry_r = h_r <= eps
    wet = ~(dry_l | dry_r)
    hl = np.where(wet, h_l, 1.0)
    hr = np.where(wet, h_r, 1.0)
    b_l = q_l * q_l / (2 * hl * hl) + c.g * (hl + z_l)
    b_r = q_r * q_r / (2 * hr * hr) + c.g * (hr + z_r)
    out = np.where(wet, np.hypot(q_r - q_l, b_r - b_l), NOT_STEADY)
    at_rest = (np.abs(q_l) <= eps) & (np.abs(q_r) <= eps)
    emerged = at_rest & ((dry_r & ~dry_l & (h_l + z_l < z_r)) | (dry_l & ~dry_r & (h_r + z_r < z_l)))
    out = np.where((dry_l & dry_r) | emerged, 0.0, out)
    return _scalar_or_array(out)


def c_coefficient(w_now: tuple[State, State], w_prev: tuple[State, State] | None, dt: float | None,
                  c_theta: float = 1.0):
    """Time-derivative scale of the detector; 1 on the very first step."""
    if w_prev is None or dt is None:
        return _scalar_or_array(np.ones_like(np.asarray(w_now[0].h, dtype=float)))
    (l_now, r_now), (l_prev, r_prev) = w_now, w_prev
    change_l = np.hypot(np.asarray(l_now.h) - l_prev.h, np.asarray(l_now.q) - l_prev.q)
    change_r = np.hypot(np.asarray(r_now.h) - r_prev.h, np.asarray(r_now.q) - r_prev.q)
    return _scalar_or_array(c_theta * (change_l + change_r) / (2.0 * dt))


def steady_indicator_theta(eps, dx: float, C, d: int):
    """theta = eps / (eps + (dx/C)^(d+1)), forced to 0 when eps == 0 or C ~ 0."""
    eps = np.asarray(eps, dtype=float)
    C = np.asarray(C, dtype=float)
    frozen = C <= FROZEN_C
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        scale = (dx / np.where(frozen, 1.0, C)) ** (d + 1)
        theta = eps / (eps + scale)
    theta = np.where((eps == 0) | frozen, 0.0, theta)
    return _scalar_or_array(np.clip(theta, 0.0, 1.0))


def blended_interface_states(poly_l: CellPolynomial, poly_r: CellPolynomial, theta, dx: float | None = None):
    """Face values pulled toward the means by ``theta``.

    Returns the (n_vars, ...) rows for the state left of the interface
    (from ``poly_l`` at +dx/2) and right of it (``poly_r`` at -dx/2). The
    polynomials are expected to be positivity-fixed already.
    """
    theta = np.asarray(theta, dtype=float)
    w_minus = poly_l.mean + theta * poly_l.traces()[1]
    w_plus = poly_r.mean + theta * poly_r.traces()[0]
    return w_minus, w_plus


def blended_source(theta_left, theta_right, s1, s_hat):
    m = 0.5 * (np.asarray(theta_left, dtype=float) + np.asarray(theta_right, dtype=float))
    return _scalar_or_array((1.0 - m) * np.asarray(s1, dtype=float) + m * np.asarray(s_hat, dtype=float))


def detector(field: FieldState, topo: Topography, bc: BoundaryCondition, order: int, dx: float,
             c_theta: float = 1.0, c: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """theta at the ``n + 1`` interfaces of the physical cells, frozen at t^n."""
    hg, qg, zg = apply_boundary(field.h, field.q, bc, topo.z_cell, 1, c)
    left = State(hg[:-1], qg[:-1])
    right = State(hg[1:], qg[1:])
    eps = steady_indicator_eps(left, right, zg[:-1], zg[1:], c)
    if field.prev_h is None:
        C = c_coefficient((left, right), None, None, c_theta)
    else:
        ph, pq, _ = apply_boundary(field.prev_h, field.prev_q, bc, topo.z_cell, 1, c)
        C = c_coefficient((left, right), (State(ph[:-1], pq[:-1]), State(ph[1:], pq[1:])), field.prev_dt, c_theta)
    return np.atleast_1d(steady_indicator_theta(eps, dx, C, order - 1))


def _velocity_bounds(hg, qg, eps):
    """Min/max cell velocity over each 3-cell window of a ghost-extended row."""
    wet = hg > eps
    u = np.where(wet, qg / np.where(wet, hg, 1.0), 0.0)
    window = np.stack([u[:-2], u[1:-1], u[2:]])
    return window.min(axis=0), window.max(axis=0)


def _clip_face_velocity(h_face, q_face, u_lo, u_hi, eps):
    # keeps q/h bounded where the reconstructed height goes to zero
    wet = h_face > eps
    u = q_face / np.where(wet, h_face, 1.0)
    return np.where(wet, h_face * np.clip(u, u_lo, u_hi), 0.0)


def _pressure(h, g):
    return 0.5 * g * h * h


def high_order_rhs(h, q, topo: Topography, bc: BoundaryCondition, order: int, theta: np.ndarray,
                   dx: float, x_left: float, c: PhysicalConstants = DEFAULT_CONSTANTS,
                   flux=hll_flux) -> StageResult:
    """Semi-discrete operator of the blended high-order HDR scheme.

    The bed is reconstructed with (h, q). Both sides of a face are blended
    toward one shared face value of Z, so at theta = 1 the bed jump is zero
    and the hydrodynamic correction disappears, while at theta = 0 the
    cell means Z_i, Z_{i+1} of the first-order scheme are recovered. The
    quadrature source carries the matching hydrostatic pressure corrections.
    """
    h = np.asarray(h, dtype=float)
    hg, qg, zg = apply_boundary(h, q, bc, topo.z_cell, 2, c)
    poly = positivity_fix(poly_reconstruct(np.stack([hg, qg, zg]), order - 1, dx), dx, c.eps_m)
    means = poly.mean
    w_minus, w_plus = blended_interface_states(
        CellPolynomial(means[:, :-1], poly.b[:, :-1], poly.c[:, :-1], dx),
        CellPolynomial(means[:, 1:], poly.b[:, 1:], poly.c[:, 1:], dx),
        theta,
    )
    # the positivity scaling can land a rounding error below zero
    w_minus[0] = np.maximum(w_minus[0], 0.0)
    w_plus[0] = np.maximum(w_plus[0], 0.0)
    u_lo, u_hi = _velocity_bounds(hg, qg, c.eps_m)
    w_minus[1] = _clip_face_velocity(w_minus[0], w_minus[1], u_lo[:-1], u_hi[:-1], c.eps_m)
    w_plus[1] = _clip_face_velocity(w_plus[0], w_plus[1], u_lo[1:], u_hi[1:], c.eps_m)
    dev_left, dev_right = poly.traces()
    z_l, z_r = means[2, :-1], means[2, 1:]
    z_face = 0.5 * ((z_l + dev_right[2, :-1]) + (z_r + dev_left[2, 1:]))
    w_minus[2] = z_l + theta * (z_face - z_l)
    w_plus[2] = z_r + theta * (z_face - z_r)

    # blended faces and cell-mean faces (for the first-order source) in one call
    m = theta.size
    cat = np.concatenate
    both = hdr_interface_states(
        State(cat([w_minus[0], means[0, :-1]]), cat([w_minus[1], means[1, :-1]])),
        State(cat([w_plus[0], means[0, 1:]]), cat([w_plus[1], means[1, 1:]])),
        cat([w_minus[2], z_l]), cat([w_plus[2], z_r]), c,
    )
    hm, qm = np.asarray(both.w_minus.h), np.asarray(both.w_minus.q)
    hp, qp = np.asarray(both.w_plus.h), np.asarray(both.w_plus.q)
    pair = InterfacePair(State(hm[:m], qm[:m]), State(hp[:m], qp[:m]))
    fo_pair = InterfacePair(State(hm[m:], qm[m:]), State(hp[m:], qp[m:]))
    fr = flux(pair.w_minus, pair.w_plus, c)
    f_h = np.asarray(fr.f_h)
    f_q = np.asarray(fr.f_q)
    s1 = first_order_source("hdr", fo_pair, q, z_l, z_r, dx, c)

    n = h.size
    inner = slice(1, n + 1)
    h_poly = CellPolynomial(means[0, inner], poly.b[0, inner], poly.c[0, inner], dx)
    centers = x_left + (np.arange(n) + 0.5) * dx
    dz_fn = topo.dz_fn or central_derivative(topo.z_fn, dx / 8.0)
    s_hat = np.asarray(ho_source(lambda x: h_poly(x - centers), dz_fn, centers - 0.5 * dx, dx, max(order, 2), c).s_q)
    h_face_minus = np.asarray(pair.w_minus.h)
    h_face_plus = np.asarray(pair.w_plus.h)
    s_hat = s_hat + (
        _pressure(h_face_minus[1:], c.g) - _pressure(w_minus[0, 1:], c.g)
        - _pressure(h_face_plus[:-1], c.g) + _pressure(w_plus[0, :-1], c.g)
    ) / dx

    s_q = blended_source(theta[:-1], theta[1:], s1, s_hat)
    return StageResult(
        -(f_h[1:] - f_h[:-1]) / dx,
        -(f_q[1:] - f_q[:-1]) / dx + s_q,
        float(f_h[0]),
        float(f_h[-1]),
        float(np.max(fr.s_max)),
    )


SSPRK_WEIGHTS = {2: (0.5, 0.5), 3: (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0)}


def ssprk_step(order: int, rhs: Callable, u, dt: float, l0=None, stage_hook: Callable | None = None):
    """Shu-Osher SSPRK2 / SSPRK3 step of ``u' = rhs(u)``.

    ``l0`` reuses an already evaluated ``rhs(u)``; ``stage_hook`` is applied
    to every intermediate and final stage (e.g. a positivity clamp).
    The effective right-hand side is the convex combination of the stage
    evaluations with weights ``SSPRK_WEIGHTS[order]``.
    """
    hook = stage_hook or (lambda v: v)
    u = np.asarray(u, dtype=float)
    k0 = rhs(u) if l0 is None else l0
    u1 = hook(u + dt * k0)
    if order == 2:
        return hook(0.5 * u + 0.5 * (u1 + dt * rhs(u1)))
    if order == 3:
        u2 = hook(0.75 * u + 0.25 * (u1 + dt * rhs(u1)))
        return hook(u / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs(u2)))
    raise ValueError(f"SSPRK order must be 2 or 3, got {order}")


def fv_step_high_order(field: FieldState, topo: Topography, bc: BoundaryCondition, order: int, dt: float,
                       dx: float, x_left: float, theta: np.ndarray, c: PhysicalConstants = DEFAULT_CONSTANTS,
                       stage0: StageResult | None = None, record: list | None = None) -> FieldState:
    """One full SSPRK step of the order-2 or order-3 HDR scheme.

    ``theta`` is held fixed over the stages. Each stage result is appended
    to ``record`` when given, so callers can rebuild boundary mass fluxes.
    """
    n = field.h.size
    first = [stage0]

    def rhs(u):
        if first[0] is not None:
            st, first[0] = first[0], None
        else:
            st = high_order_rhs(u[0], u[1], topo, bc, order, theta, dx, x_left, c)
        if record is not None:
            record.append(st)
        return np.stack([st.dh, st.dq])

    def clamp(u):
        return np.stack([enforce_nonnegative(u[0]), u[1]])

    u = ssprk_step(order, rhs, np.stack([field.h, field.q]), dt, stage_hook=clamp)
    assert u.shape == (2, n)
    return field.advanced(u[0], u[1], dt)
