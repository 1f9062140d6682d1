"""Benchmark catalog, error measures and convergence studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import DEFAULT_CONSTANTS, ConfigurationError, PhysicalConstants, cell_average
from .scheme import (
    BoundaryCondition,
    FieldState,
    Grid,
    Topography,
    dirichlet,
    mixed,
    neumann,
    periodic,
)
from .solver import SCHEMES, SchemeConfig, StepInfo, simulate


def bump(x):
    """Compactly supported smooth bump centred at 1/2, equal to 1 there."""
    x = np.asarray(x, dtype=float)
    s = 4.0 * (x - 0.5)
    inside = np.abs(s) < 1.0
    s_in = np.where(inside, s, 0.0)
    out = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - s_in * s_in)), 0.0)
    return float(out) if out.ndim == 0 else out


def bump_derivative(x):
    x = np.asarray(x, dtype=float)
    s = 4.0 * (x - 0.5)
    inside = np.abs(s) < 1.0
    s_in = np.where(inside, s, 0.0)
    d = -8.0 * s_in / (1.0 - s_in * s_in) ** 2 * np.asarray(bump(x))
    out = np.where(inside, d, 0.0)
    return float(out) if out.ndim == 0 else out


def _gm_bed(x):
    x = np.asarray(x, dtype=float)
    return np.maximum(0.0, 0.05 * (x - 8.0) * (12.0 - x))


def _gm_bed_derivative(x):
    x = np.asarray(x, dtype=float)
    return np.where((x > 8.0) & (x < 12.0), 0.05 * (20.0 - 2.0 * x), 0.0)


def _slope_bed(x):
    return 0.5 * np.asarray(x, dtype=float)


def _slope_bed_derivative(x):
    return np.full_like(np.asarray(x, dtype=float), 0.5)


def _step_bed(x):
    return np.where(np.asarray(x, dtype=float) < 0.5, 0.0, 0.01)


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


# h_R such that q^2/(2h^2) + g(h + Z) matches across the step for q = 1, h_L = 1
CONTACT_H_RIGHT = 0.2545853624828563


@dataclass(frozen=True)
class ExperimentSpec:
    """A benchmark setup.

    ``initial(grid, topo)`` returns cell averages ``(h, q)``. Most entries
    define the water through a free surface so that the discrete lake at
    rest ``h_i + Z_i = const`` holds exactly for the averaged data.
    """

    name: str
    x_left: float
    x_right: float
    z_fn: Callable
    dz_fn: Callable | None
    initial: Callable
    bc: BoundaryCondition
    t_end: float
    n_cells: int
    c_theta: float = 1.0
    schemes: tuple[str, ...] = SCHEMES
    steady: bool = False
    params: dict = field(default_factory=dict)

    def grid(self, n_cells: int | None = None) -> Grid:
        return Grid(self.x_left, self.x_right, n_cells or self.n_cells)

    def setup(self, n_cells: int | None = None):
        """(grid, topography, initial field) for the requested resolution."""
        grid = self.grid(n_cells)
        topo = Topography.from_function(grid, self.z_fn, self.dz_fn)
        h, q = self.initial(grid, topo)
        return grid, topo, FieldState(np.asarray(h, dtype=float), np.asarray(q, dtype=float))


def _from_surface(eta: Callable, q: Callable | float = 0.0):
    # h_i = max(0, avg(eta) - Z_i) keeps the discrete lake at rest exact
    def initial(grid: Grid, topo: Topography):
        a, b = grid.edges[:-1], grid.edges[1:]
        eta_avg = np.asarray(cell_average(eta, a, b))
        h = np.maximum(0.0, eta_avg - topo.z_cell)
        if callable(q):
            q_avg = np.asarray(cell_average(q, a, b))
        else:
            q_avg = np.full(grid.n_cells, float(q))
        return h, np.where(h > 0, q_avg, 0.0)

    return initial


def _dry_dam(grid: Grid, topo: Topography):
    a, b = grid.edges[:-1], grid.edges[1:]
    h = np.asarray(cell_average(lambda x: np.where(x < 0.5, 1.0 - _slope_bed(x), 0.0), a, b))
    return np.maximum(h, 0.0), np.zeros(grid.n_cells)


def _contact(grid: Grid, topo: Topography):
    a, b = grid.edges[:-1], grid.edges[1:]
    h = np.asarray(cell_average(lambda x: np.where(x < 0.5, 1.0, CONTACT_H_RIGHT), a, b))
    return h, np.ones(grid.n_cells)


def _gm(name: str, q0: float, h0: float, t_end: float) -> ExperimentSpec:
    bc = BoundaryCondition(mixed(q=q0), mixed(h=h0, subcritical_only=True))
    return ExperimentSpec(name, 0.0, 25.0, _gm_bed, _gm_bed_derivative, _from_surface(lambda x: h0 + 0 * x, q0),
                          bc, t_end, 75, steady=True, params={"q0": q0, "H0": h0})


def experiment_catalog() -> dict[str, ExperimentSpec]:
    two = lambda x: 2.0 + 0 * x  # noqa: E731
    half = lambda x: 0.5 + 0 * x  # noqa: E731
    specs = [
        ExperimentSpec("accuracy", 0.0, 1.0, bump, bump_derivative,
                       _from_surface(lambda x: 2.0 + np.cos(2 * np.pi * x) ** 2, lambda x: np.sin(2 * np.pi * x)),
                       BoundaryCondition(periodic(), periodic()), 5e-3, 40,
                       params={"reference_cells": 20 * 2**9, "paper_reference_cells": 20 * 2**12}),
        ExperimentSpec("lake_rest_submerged", 0.0, 1.0, bump, bump_derivative, _from_surface(two),
                       BoundaryCondition(dirichlet(2.0, 0.0), dirichlet(2.0, 0.0)), 1.0, 50, steady=True),
        ExperimentSpec("lake_rest_emerged", 0.0, 1.0, bump, bump_derivative, _from_surface(half),
                       BoundaryCondition(dirichlet(0.5, 0.0), dirichlet(0.5, 0.0)), 1.0, 50, steady=True),
        _gm("gm_subcritical", 4.42, 2.0, 500.0),
        _gm("gm_transcritical", 1.53, 0.66, 125.0),
        _gm("gm_transcritical_shock", 0.18, 0.33, 1000.0),
        ExperimentSpec("dam_wet", 0.0, 1.0, _slope_bed, _slope_bed_derivative,
                       _from_surface(lambda x: np.where(x < 0.5, 1.5, 1.0)),
                       BoundaryCondition(neumann(), neumann()), 0.05, 50, c_theta=0.15),
        ExperimentSpec("dam_dry", 0.0, 1.0, _slope_bed, _slope_bed_derivative, _dry_dam,
                       BoundaryCondition(neumann(), neumann()), 0.075, 50, c_theta=0.1),
        ExperimentSpec("stationary_contact", 0.0, 1.0, _step_bed, _zero, _contact,
                       BoundaryCondition(neumann(), neumann()), 0.075, 100,
                       params={"h_right": CONTACT_H_RIGHT, "z_right": 0.01}),
    ]
    return {s.name: s for s in specs}


def get_experiment(name: str) -> ExperimentSpec:
    catalog = experiment_catalog()
    if name not in catalog:
        raise KeyError(f"unknown experiment {name!r}; known: {', '.join(catalog)}")
    return catalog[name]


class SteadyErrors(NamedTuple):
    e_q: float
    e_B: float
    skipped: int


def l2_error(approx, reference, dx: float) -> float:
    """sqrt(dx * sum (a_i - ref_i)^2) after block-averaging ``reference``."""
    approx = np.asarray(approx, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if reference.size % approx.size:
        raise ConfigurationError(f"reference size {reference.size} is not a multiple of {approx.size}")
    coarse = reference.reshape(approx.size, -1).mean(axis=1)
    return float(math.sqrt(dx * np.sum((approx - coarse) ** 2)))


def bernoulli_cells(h, q, z, c: PhysicalConstants = DEFAULT_CONSTANTS):
    """Cellwise Bernoulli values, NaN on dry cells."""
    h = np.asarray(h, dtype=float)
    wet = h > c.eps_m
    hs = np.where(wet, h, 1.0)
    return np.where(wet, np.asarray(q) ** 2 / (2 * hs * hs) + c.g * (hs + np.asarray(z)), np.nan)


def steady_errors(h, q, z, dx: float, c: PhysicalConstants = DEFAULT_CONSTANTS) -> SteadyErrors:
    """Discrete steadiness measures over neighbouring cells.

    ``e = sqrt((1/dx) sum |v_{i+1} - v_i|^2)`` for v = q and v = B; pairs
    touching a dry cell are skipped and counted.
    """
    q = np.asarray(q, dtype=float)
    b = bernoulli_cells(h, q, z, c)
    ok = ~(np.isnan(b[1:]) | np.isnan(b[:-1]))
    dq = (q[1:] - q[:-1])[ok]
    db = (b[1:] - b[:-1])[ok]
    return SteadyErrors(float(math.sqrt(np.sum(dq * dq) / dx)), float(math.sqrt(np.sum(db * db) / dx)),
                        int(np.count_nonzero(~ok)))


def convergence_orders(errors: Sequence[float]) -> list[float]:
    """log2(e_k / e_{k+1}); NaN where an error vanishes."""
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        raise ConfigurationError("need at least two grids to measure an order")
    out = []
    for a, b in zip(errors[:-1], errors[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else math.nan)
    return out


@dataclass
class RunResult:
    spec: ExperimentSpec
    scheme: SchemeConfig
    grid: Grid
    topo: Topography
    initial: FieldState
    final: FieldState


def run_experiment(spec: ExperimentSpec, scheme: str | SchemeConfig, n_cells: int | None = None,
                   t_end: float | None = None, cfl: float = 0.5, c_theta: float | None = None,
                   callback: Callable[[StepInfo], None] | None = None,
                   c: PhysicalConstants = DEFAULT_CONSTANTS) -> RunResult:
    if isinstance(scheme, str):
        scheme = SchemeConfig.from_name(scheme, cfl, spec.c_theta if c_theta is None else c_theta)
    grid, topo, field0 = spec.setup(n_cells)
    final = simulate(field0, grid, topo, spec.bc, scheme, spec.t_end if t_end is None else t_end, c, callback)
    return RunResult(spec, scheme, grid, topo, field0, final)


def error_report(result: RunResult, c: PhysicalConstants = DEFAULT_CONSTANTS) -> dict[str, float]:
    """Steady residuals plus L2 distances to the initial data."""
    dx = result.grid.dx
    f, f0 = result.final, result.initial
    se = steady_errors(f.h, f.q, result.topo.z_cell, dx, c)
    return {
        "e_q": se.e_q,
        "e_B": se.e_B,
        "skipped_pairs": float(se.skipped),
        "l2_h_vs_initial": l2_error(f.h, f0.h, dx),
        "l2_q_vs_initial": l2_error(f.q, f0.q, dx),
    }


class ConvergenceRow(NamedTuple):
    n_cells: int
    variable: str
    error: float
    order: float


def convergence_study(spec: ExperimentSpec, scheme: str, levels: int = 5, base_cells: int = 40,
                      reference_cells: int | None = None, reference_scheme: str = "hdr3",
                      cfl: float = 0.5, reference: FieldState | None = None) -> list[ConvergenceRow]:
    """Errors on dyadic grids ``base_cells * 2^k`` against a fine run."""
    ref_n = reference_cells or spec.params.get("reference_cells", 10240)
    sizes = [base_cells * 2**k for k in range(levels)]
    if any(ref_n % n for n in sizes):
        raise ConfigurationError(f"reference cells {ref_n} must be a multiple of every level")
    if reference is None:
        reference = run_experiment(spec, reference_scheme, ref_n, cfl=cfl).final
    rows = []
    errs = {"h": [], "q": []}
    for n in sizes:
        final = run_experiment(spec, scheme, n, cfl=cfl).final
        dx = (spec.x_right - spec.x_left) / n
        errs["h"].append(l2_error(final.h, reference.h, dx))
        errs["q"].append(l2_error(final.q, reference.q, dx))
    for var in ("h", "q"):
        orders = [math.nan] + convergence_orders(errs[var])
        rows.extend(ConvergenceRow(n, var, e, o) for n, e, o in zip(sizes, errs[var], orders))
    return rows
