"""Time loop shared by the four schemes (hsr1, hdr1, hdr2, hdr3)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import DEFAULT_CONSTANTS, ConfigurationError, InvariantViolation, PhysicalConstants
from .flux import max_wave_speed
from .high_order import SSPRK_WEIGHTS, detector, fv_step_high_order, high_order_rhs
from .scheme import (
    BoundaryCondition,
    FieldState,
    Grid,
    Topography,
    cfl_dt,
    first_order_rhs,
    fv_step_first_order,
)

SCHEMES = ("hsr1", "hdr1", "hdr2", "hdr3")
# high-order stages may need a smaller step than the CFL bound near dry fronts
MAX_HALVINGS = 12


@dataclass(frozen=True)
class SchemeConfig:
    recon: str
    order: int
    cfl: float = 0.5
    c_theta: float = 1.0

    def __post_init__(self):
        if (self.recon, self.order) not in (("hsr", 1), ("hdr", 1), ("hdr", 2), ("hdr", 3)):
            raise ConfigurationError(f"unsupported scheme {self.recon}{self.order}")
        if not 0 < self.cfl <= 1:
            raise ConfigurationError(f"cfl must be in (0, 1], got {self.cfl}")
        if not self.c_theta > 0:
            raise ConfigurationError(f"c_theta must be positive, got {self.c_theta}")

    @classmethod
    def from_name(cls, name: str, cfl: float = 0.5, c_theta: float = 1.0) -> "SchemeConfig":
        if name not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {name!r}; expected one of {', '.join(SCHEMES)}")
        return cls(name[:3], int(name[3]), cfl, c_theta)

    @property
    def name(self) -> str:
        return f"{self.recon}{self.order}"


class StepInfo(NamedTuple):
    """What a step callback sees.

    ``flux_left``/``flux_right`` are the mass fluxes effectively applied at
    the two domain ends over the step (RK-weighted for high order), so that
    ``mass_balance_check(before.h, after.h, (flux_left, flux_right), dt, dx)``
    measures the telescoping defect.
    """

    before: FieldState
    after: FieldState
    dt: float
    flux_left: float
    flux_right: float
    theta: np.ndarray | None


def step(field: FieldState, grid: Grid, topo: Topography, bc: BoundaryCondition, scheme: SchemeConfig,
         t_end: float | None = None, c: PhysicalConstants = DEFAULT_CONSTANTS) -> StepInfo:
    """Advance one CFL-limited step.

    A high-order step whose stages would produce a negative height is
    retried with half the time step.
    """
    dx = grid.dx
    if scheme.order == 1:
        st = first_order_rhs(field.h, field.q, topo, bc, scheme.recon, dx, c)
        speed = max(max_wave_speed(field.state, c), st.s_max)
        dt = cfl_dt(field, dx, scheme.cfl, c, t_end, speed)
        after = fv_step_first_order(field, topo, bc, scheme.recon, dt, dx, c, stage=st)
        return StepInfo(field, after, dt, st.flux_left, st.flux_right, None)

    theta = detector(field, topo, bc, scheme.order, dx, scheme.c_theta, c)
    st0 = high_order_rhs(field.h, field.q, topo, bc, scheme.order, theta, dx, grid.x_left, c)
    speed = max(max_wave_speed(field.state, c), st0.s_max)
    dt = cfl_dt(field, dx, scheme.cfl, c, t_end, speed)
    for attempt in range(MAX_HALVINGS + 1):
        stages: list = []
        try:
            after = fv_step_high_order(field, topo, bc, scheme.order, dt, dx, grid.x_left, theta, c,
                                       stage0=st0, record=stages)
            break
        except InvariantViolation:
            if attempt == MAX_HALVINGS:
                raise
            dt *= 0.5
    weights = SSPRK_WEIGHTS[scheme.order]
    f_left = sum(w * s.flux_left for w, s in zip(weights, stages))
    f_right = sum(w * s.flux_right for w, s in zip(weights, stages))
    return StepInfo(field, after, dt, f_left, f_right, theta)


def simulate(field: FieldState, grid: Grid, topo: Topography, bc: BoundaryCondition, scheme: SchemeConfig,
             t_end: float, c: PhysicalConstants = DEFAULT_CONSTANTS,
             callback: Callable[[StepInfo], None] | None = None, max_steps: int = 10_000_000) -> FieldState:
    """Run from ``field.time`` to ``t_end``; ``callback`` sees every step."""
    if field.h.size != grid.n_cells or topo.z_cell.size != grid.n_cells:
        raise ConfigurationError("field, topography and grid sizes disagree")
    if t_end < field.time:
        raise ConfigurationError(f"t_end {t_end} is before the current time {field.time}")
    # the final step lands on t_end up to round-off in the accumulated time
    while field.time < t_end * (1 - 1e-14) and t_end - field.time > 1e-300:
        if field.steps >= max_steps:
            raise ConfigurationError(f"step budget of {max_steps} exhausted at t = {field.time}")
        info = step(field, grid, topo, bc, scheme, t_end, c)
        if callback is not None:
            callback(info)
        field = info.after
    return field
