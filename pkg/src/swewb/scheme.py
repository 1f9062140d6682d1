"""Mesh, topography, ghost-cell boundaries and the first-order update."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import (
    DEFAULT_CONSTANTS,
    ConfigurationError,
    InvariantViolation,
    PhysicalConstants,
    State,
    cell_average,
)
from .flux import hll_flux, max_wave_speed
from .reconstruction import hdr_interface_states, hsr_interface_states
from .source import hdr_source, hsr_source

NEGATIVE_HEIGHT_TOL = 1e-13


@dataclass(frozen=True)
class Grid:
    x_left: float
    x_right: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 1 or not self.x_right > self.x_left:
            raise ConfigurationError(f"invalid grid {self}")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def edges(self) -> np.ndarray:
        return self.x_left + np.arange(self.n_cells + 1) * self.dx


@dataclass(frozen=True)
class Topography:
    """Analytic bed ``z_fn`` and its cell averages.

    ``dz_fn`` is the analytic derivative if one is known; the high-order
    source falls back to finite differences otherwise.
    """

    z_fn: Callable
    z_cell: np.ndarray
    dz_fn: Callable | None = None

    @classmethod
    def from_function(cls, grid: Grid, z_fn: Callable, dz_fn: Callable | None = None, n_points: int = 5):
        edges = grid.edges
        z_cell = np.asarray(cell_average(z_fn, edges[:-1], edges[1:], n_points), dtype=float)
        return cls(z_fn, np.atleast_1d(z_cell), dz_fn)

    @property
    def z_iface(self) -> np.ndarray:
        """max(Z_i, Z_{i+1}) at interior interfaces."""
        return np.maximum(self.z_cell[:-1], self.z_cell[1:])


@dataclass(frozen=True)
class Side:
    """One end of the domain.

    ``kind`` is ``periodic``, ``neumann``, ``dirichlet`` or ``mixed``. For
    ``mixed``, a component left as ``None`` is copied from the nearest
    interior cell; with ``subcritical_only`` the prescribed height is only
    imposed while the nearest interior cell is subcritical.
    """

    kind: str
    h: float | None = None
    q: float | None = None
    subcritical_only: bool = False

    def __post_init__(self):
        if self.kind not in ("periodic", "neumann", "dirichlet", "mixed"):
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet" and (self.h is None or self.q is None):
            raise ConfigurationError("dirichlet boundary needs both h and q")


def periodic() -> Side:
    return Side("periodic")


def neumann() -> Side:
    return Side("neumann")


def dirichlet(h: float, q: float) -> Side:
    return Side("dirichlet", h, q)


def mixed(h: float | None = None, q: float | None = None, subcritical_only: bool = False) -> Side:
    return Side("mixed", h, q, subcritical_only)


@dataclass(frozen=True)
class BoundaryCondition:
    left: Side
    right: Side

    def __post_init__(self):
        if (self.left.kind == "periodic") != (self.right.kind == "periodic"):
            raise ConfigurationError("periodic boundaries must be set on both sides")

    @property
    def is_periodic(self) -> bool:
        return self.left.kind == "periodic"


def _side_ghost(side: Side, h_in: float, q_in: float, c: PhysicalConstants) -> tuple[float, float]:
    if side.kind == "neumann":
        return h_in, q_in
    if side.kind == "dirichlet":
        return side.h, side.q
    h_g = h_in if side.h is None else side.h
    q_g = q_in if side.q is None else side.q
    if side.subcritical_only and side.h is not None:
        supercritical = h_in <= c.eps_m or q_in * q_in >= c.g * h_in**3
        if supercritical:
            h_g = h_in
    return h_g, q_g


def apply_boundary(h, q, bc: BoundaryCondition, z_cell, n_ghost: int,
                   c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Ghost-extend (h, q, z) by ``n_ghost`` cells on each side."""
    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    z = np.asarray(z_cell, dtype=float)
    if n_ghost not in (1, 2):
        raise ConfigurationError(f"n_ghost must be 1 or 2, got {n_ghost}")
    if bc.is_periodic:
        if h.size < n_ghost:
            raise ConfigurationError("periodic grid smaller than ghost layer")
        return (np.concatenate([h[-n_ghost:], h, h[:n_ghost]]),
                np.concatenate([q[-n_ghost:], q, q[:n_ghost]]),
                np.concatenate([z[-n_ghost:], z, z[:n_ghost]]))
    hl, ql = _side_ghost(bc.left, h[0], q[0], c)
    hr, qr = _side_ghost(bc.right, h[-1], q[-1], c)
    pad = np.ones(n_ghost)
    return (np.concatenate([hl * pad, h, hr * pad]),
            np.concatenate([ql * pad, q, qr * pad]),
            np.concatenate([z[0] * pad, z, z[-1] * pad]))


@dataclass
class FieldState:
    """Cell averages at ``time`` plus the previous full-step snapshot."""

    h: np.ndarray
    q: np.ndarray
    time: float = 0.0
    prev_h: np.ndarray | None = None
    prev_q: np.ndarray | None = None
    prev_dt: float | None = None
    steps: int = 0

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        if self.h.shape != self.q.shape:
            raise ConfigurationError("h and q must have the same shape")
        if self.h.size == 0:
            raise ConfigurationError("empty field")
        if np.any(self.h < 0):
            raise InvariantViolation("negative water height in field")

    @property
    def state(self) -> State:
        return State(self.h, self.q)

    def advanced(self, h, q, dt: float) -> "FieldState":
        return FieldState(h, q, self.time + dt, self.h.copy(), self.q.copy(), dt, self.steps + 1)


class StageResult(NamedTuple):
    """Semi-discrete right-hand side and the quantities the driver needs."""

    dh: np.ndarray
    dq: np.ndarray
    flux_left: float
    flux_right: float
    s_max: float


def cfl_dt(field: FieldState, dx: float, cfl: float = 0.5, c: PhysicalConstants = DEFAULT_CONSTANTS,
           t_end: float | None = None, speed: float | None = None) -> float:
    """CFL time step, clipped so the run lands exactly on ``t_end``.

    ``speed`` overrides the cell-based maximum wave speed (the driver
    passes the larger of cell and interface speeds).
    """
    if not 0 < cfl <= 1:
        raise ConfigurationError(f"cfl must be in (0, 1], got {cfl}")
    s = max_wave_speed(field.state, c) if speed is None else speed
    dt = dx if s <= 0 else cfl * dx / s
    if t_end is not None:
        dt = min(dt, t_end - field.time)
    return dt


def enforce_nonnegative(h: np.ndarray) -> np.ndarray:
    """Clamp round-off negatives to zero; abort on anything larger."""
    lowest = float(np.min(h))
    if lowest < -NEGATIVE_HEIGHT_TOL:
        raise InvariantViolation(f"negative water height {lowest:.3e}")
    return np.maximum(h, 0.0) if lowest < 0 else h


def interface_states(recon: str, h_l, q_l, h_r, q_r, z_l, z_r, c=DEFAULT_CONSTANTS):
    if recon == "hdr":
        return hdr_interface_states(State(h_l, q_l), State(h_r, q_r), z_l, z_r, c)
    if recon == "hsr":
        return hsr_interface_states(State(h_l, q_l), State(h_r, q_r), z_l, z_r, c)
    raise ConfigurationError(f"unknown reconstruction {recon!r}")


def first_order_source(recon: str, pair, q_cell, z_l, z_r, dx, c=DEFAULT_CONSTANTS):
    """Cell sources from the interface pairs of one ghost layer.

    ``pair`` holds ``n + 1`` interfaces around ``n`` cells; ``z_l, z_r``
    are the topography values the pairs were built from.
    """
    h_left_plus = np.asarray(pair.w_plus.h)[:-1]
    h_right_minus = np.asarray(pair.w_minus.h)[1:]
    if recon == "hsr":
        return hsr_source(h_left_plus, h_right_minus, dx, c).s_q
    z_star = np.maximum(z_l, z_r)
    z_scale = np.maximum(np.abs(z_star[:-1]), np.abs(z_star[1:]))
    return hdr_source(h_left_plus, h_right_minus, q_cell, z_star[1:] - z_star[:-1], dx, c, z_scale).s_q


def first_order_rhs(h, q, topo: Topography, bc: BoundaryCondition, recon: str, dx: float,
                    c: PhysicalConstants = DEFAULT_CONSTANTS, flux=hll_flux) -> StageResult:
    hg, qg, zg = apply_boundary(h, q, bc, topo.z_cell, 1, c)
    z_l, z_r = zg[:-1], zg[1:]
    pair = interface_states(recon, hg[:-1], qg[:-1], hg[1:], qg[1:], z_l, z_r, c)
    fr = flux(pair.w_minus, pair.w_plus, c)
    f_h = np.asarray(fr.f_h)
    f_q = np.asarray(fr.f_q)
    s_q = first_order_source(recon, pair, q, z_l, z_r, dx, c)
    return StageResult(
        -(f_h[1:] - f_h[:-1]) / dx,
        -(f_q[1:] - f_q[:-1]) / dx + s_q,
        float(f_h[0]),
        float(f_h[-1]),
        float(np.max(fr.s_max)),
    )


def fv_step_first_order(field: FieldState, topo: Topography, bc: BoundaryCondition, recon: str,
                        dt: float, dx: float, c: PhysicalConstants = DEFAULT_CONSTANTS,
                        stage: StageResult | None = None) -> FieldState:
    """One forward-Euler finite-volume step; ``stage`` reuses a computed RHS."""
    if stage is None:
        stage = first_order_rhs(field.h, field.q, topo, bc, recon, dx, c)
    h_new = enforce_nonnegative(field.h + dt * stage.dh)
    q_new = field.q + dt * stage.dq
    return field.advanced(h_new, q_new, dt)


def mass_balance_check(before, after, boundary_fluxes, dt: float, dx: float) -> float:
    """Residual of the discrete mass budget over one step.

    ``boundary_fluxes`` is the (left, right) mass flux actually applied at
    the domain ends during the step.
    """
    before = np.asarray(before, dtype=float)
    after = np.asarray(after, dtype=float)
    if before.shape != after.shape:
        raise ConfigurationError("mass check needs matching field lengths")
    f_left, f_right = boundary_fluxes
    return float(abs(after.sum() - before.sum() + dt / dx * (f_right - f_left)))
