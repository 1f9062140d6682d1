"""Command-line front end: ``swewb list | run | convergence``."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ConfigurationError, InvariantViolation
from .experiments import (
    ConvergenceRow,
    RunResult,
    convergence_study,
    error_report,
    experiment_catalog,
    run_experiment,
)
from .solver import SCHEMES, SchemeConfig

OUT_ENV = "SWEWB_OUT"


@dataclass(frozen=True)
class RunConfig:
    command: str
    experiment: str | None = None
    scheme: str | None = None
    schemes: tuple[str, ...] = ()
    n_cells: int | None = None
    cfl: float = 0.5
    t_end: float | None = None
    c_theta: float | None = None
    out: Path | None = None
    levels: int = 5
    base_cells: int = 40
    ref_cells: int | None = None
    seed: int = 0
    overrides: tuple[str, ...] = ()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    names = sorted(experiment_catalog())
    p = _Parser(prog="swewb", description="Well-balanced shallow-water finite-volume runs")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list", help="print the experiment names")

    run = sub.add_parser("run", help="run one experiment with one scheme")
    run.add_argument("--experiment", required=True, choices=names)
    run.add_argument("--scheme", required=True, choices=SCHEMES)
    run.add_argument("--cells", type=int)
    run.add_argument("--cfl", type=float, default=0.5)
    run.add_argument("--tend", type=float)
    run.add_argument("--ctheta", type=float)
    run.add_argument("--out", type=Path)
    run.add_argument("--seed", type=int, default=0)

    conv = sub.add_parser("convergence", help="dyadic refinement study")
    conv.add_argument("--experiment", default="accuracy", choices=names)
    conv.add_argument("--schemes", default=",".join(SCHEMES))
    conv.add_argument("--levels", type=int, default=5)
    conv.add_argument("--base-cells", type=int, default=40)
    conv.add_argument("--ref-cells", type=int)
    conv.add_argument("--cfl", type=float, default=0.5)
    conv.add_argument("--out", type=Path)
    return p


def parse_args(argv: list[str] | None = None) -> RunConfig:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "list":
        return RunConfig("list")
    if not 0 < ns.cfl <= 1:
        parser.error(f"--cfl must be in (0, 1], got {ns.cfl}")
    out = ns.out if ns.out is not None else (Path(os.environ[OUT_ENV]) if OUT_ENV in os.environ else None)
    if ns.command == "run":
        if ns.cells is not None and ns.cells < 4:
            parser.error("--cells must be at least 4")
        if ns.ctheta is not None and not ns.ctheta > 0:
            parser.error("--ctheta must be positive")
        if ns.tend is not None and not ns.tend >= 0:
            parser.error("--tend must be non-negative")
        spec = experiment_catalog()[ns.experiment]
        given = {"cells": ns.cells, "tend": ns.tend, "ctheta": ns.ctheta}
        return RunConfig("run", ns.experiment, ns.scheme,
                         n_cells=spec.n_cells if ns.cells is None else ns.cells,
                         cfl=ns.cfl,
                         t_end=spec.t_end if ns.tend is None else ns.tend,
                         c_theta=spec.c_theta if ns.ctheta is None else ns.ctheta,
                         out=out, seed=ns.seed,
                         overrides=tuple(k for k, v in given.items() if v is not None))
    schemes = tuple(s.strip() for s in ns.schemes.split(",") if s.strip())
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        parser.error(f"unknown scheme(s) {', '.join(bad) or '(none)'}; expected from {', '.join(SCHEMES)}")
    if ns.levels < 2:
        parser.error("--levels must be at least 2")
    if ns.base_cells < 4:
        parser.error("--base-cells must be at least 4")
    return RunConfig("convergence", ns.experiment, schemes=schemes, cfl=ns.cfl, out=out, levels=ns.levels,
                     base_cells=ns.base_cells, ref_cells=ns.ref_cells)


def _fmt(v) -> str:
    return "%.17g" % v


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def write_solution(path: Path, result: RunResult) -> None:
    f, z = result.final, result.topo.z_cell
    wet = f.h > 0
    u = np.where(wet, f.q / np.where(wet, f.h, 1.0), 0.0)
    rows = ([_fmt(v) for v in row] for row in zip(result.grid.centers, f.h, f.q, z, f.h + z, u))
    _write_csv(path, ["x", "h", "q", "z", "free_surface", "u"], rows)


def read_solution(path: Path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]} if rows else {}


def _out_dir(cfg: RunConfig, name: str) -> Path:
    root = cfg.out if cfg.out is not None else Path("swewb_out")
    path = root if cfg.out is not None else root / name
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror}") from exc
    return path


def run_and_emit(cfg: RunConfig) -> Path:
    spec = experiment_catalog()[cfg.experiment]
    c_theta = spec.c_theta if cfg.c_theta is None else cfg.c_theta
    scheme = SchemeConfig.from_name(cfg.scheme, cfg.cfl, c_theta)
    result = run_experiment(spec, scheme, cfg.n_cells, cfg.t_end)
    out = _out_dir(cfg, f"{cfg.experiment}_{cfg.scheme}")
    write_solution(out / "solution.csv", result)
    _write_csv(out / "errors.csv", ["metric", "value"],
               ([k, _fmt(v)] for k, v in error_report(result).items()))
    meta = {
        "experiment": spec.name,
        "scheme": scheme.name,
        "n_cells": result.grid.n_cells,
        "cfl": _fmt(scheme.cfl),
        "t_end": _fmt(result.final.time),
        "c_theta": _fmt(c_theta),
        "steps": result.final.steps,
        "seed": cfg.seed,
        "overrides": ";".join(cfg.overrides),
    }
    _write_csv(out / "run_meta.csv", ["key", "value"], ([k, v] for k, v in meta.items()))
    return out


def convergence_and_emit(cfg: RunConfig) -> Path:
    spec = experiment_catalog()[cfg.experiment]
    out = _out_dir(cfg, f"{cfg.experiment}_convergence")
    ref_n = cfg.ref_cells or spec.params.get("reference_cells", 10240)
    reference = run_experiment(spec, "hdr3", ref_n, cfl=cfg.cfl).final
    rows: list[tuple[str, ConvergenceRow]] = []
    for s in cfg.schemes:
        for r in convergence_study(spec, s, cfg.levels, cfg.base_cells, ref_n, cfl=cfg.cfl, reference=reference):
            rows.append((s, r))
    _write_csv(out / "convergence.csv", ["N", "variable", "error", "order", "scheme"],
               ([r.n_cells, r.variable, _fmt(r.error), "NA" if np.isnan(r.order) else _fmt(r.order), s]
                for s, r in rows))
    return out


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        if cfg.command == "list":
            for name in experiment_catalog():
                print(name)
            return 0
        out = run_and_emit(cfg) if cfg.command == "run" else convergence_and_emit(cfg)
        print(out)
        return 0
    except InvariantViolation as exc:
        print(f"swewb: invariant violated: {exc}", file=sys.stderr)
        return 1
    except ConfigurationError as exc:
        print(f"swewb: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"swewb: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
