import csv
import subprocess
import sys

import numpy as np
import pytest

from swewb.cli import main, parse_args, read_solution
from swewb.experiments import get_experiment, run_experiment


def _rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def test_list_prints_nine_names(capsys):
    assert main(["list"]) == 0
    names = capsys.readouterr().out.split()
    assert len(names) == 9 and "gm_subcritical" in names


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "swewb", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and len(out.stdout.split()) == 9
    bad = subprocess.run([sys.executable, "-m", "swewb", "run", "--experiment", "bogus", "--scheme", "hdr1"],
                         capture_output=True, text=True)
    assert bad.returncode == 2 and "bogus" in bad.stderr


def test_parse_fills_catalog_defaults():
    cfg = parse_args(["run", "--experiment", "gm_subcritical", "--scheme", "hdr1", "--cells", "75"])
    assert (cfg.t_end, cfg.n_cells, cfg.scheme, cfg.c_theta) == (500.0, 75, "hdr1", 1.0)
    assert cfg.overrides == ("cells",)
    cfg = parse_args(["run", "--experiment", "dam_dry", "--scheme", "hdr2"])
    assert (cfg.t_end, cfg.c_theta, cfg.overrides) == (0.075, 0.1, ())


@pytest.mark.parametrize("argv", [
    ["run", "--experiment", "bogus", "--scheme", "hdr1"],
    ["run", "--experiment", "dam_wet", "--scheme", "hdr4"],
    ["run", "--experiment", "dam_wet", "--scheme", "hdr1", "--cells", "2"],
    ["run", "--experiment", "dam_wet", "--scheme", "hdr1", "--cfl", "1.5"],
    ["run", "--experiment", "dam_wet", "--scheme", "hdr1", "--ctheta", "-1"],
    ["convergence", "--schemes", "hdr1,nope"],
    ["convergence", "--levels", "1"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_run_writes_csvs(tmp_path):
    out = tmp_path / "lake"
    assert main(["run", "--experiment", "lake_rest_submerged", "--scheme", "hdr1", "--out", str(out)]) == 0
    sol = _rows(out / "solution.csv")
    assert sol[0] == ["x", "h", "q", "z", "free_surface", "u"]
    assert len(sol) == 51
    # 17 significant digits: every emitted value parses back to the same double
    _, topo, _ = get_experiment("lake_rest_submerged").setup()
    assert [float(r[3]) for r in sol[1:]] == list(topo.z_cell)
    errs = dict(_rows(out / "errors.csv")[1:])
    for key in ("e_q", "e_B", "l2_h_vs_initial", "l2_q_vs_initial"):
        assert float(errs[key]) <= 1e-12
    meta = dict(_rows(out / "run_meta.csv")[1:])
    assert meta["scheme"] == "hdr1" and meta["n_cells"] == "50" and meta["overrides"] == ""
    raw = (out / "solution.csv").read_bytes()
    assert b"\r\n" not in raw


def test_hsr_has_nonzero_steady_error(tmp_path):
    out = tmp_path / "gm"
    assert main(["run", "--experiment", "gm_subcritical", "--scheme", "hsr1", "--tend", "50", "--out", str(out)]) == 0
    errs = dict(_rows(out / "errors.csv")[1:])
    assert float(errs["e_q"]) > 0
    assert dict(_rows(out / "run_meta.csv")[1:])["overrides"] == "tend"


def test_solution_round_trip(tmp_path):
    out = tmp_path / "dam"
    assert main(["run", "--experiment", "dam_wet", "--scheme", "hdr2", "--out", str(out)]) == 0
    back = read_solution(out / "solution.csv")
    ref = run_experiment(get_experiment("dam_wet"), "hdr2").final
    for key, arr in (("h", ref.h), ("q", ref.q)):
        assert np.all(np.abs(back[key] - arr) <= 1e-15 * np.maximum(np.abs(arr), 1e-300))


def test_runs_are_deterministic(tmp_path):
    argv = ["run", "--experiment", "dam_dry", "--scheme", "hdr3", "--seed", "7"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    for name in ("solution.csv", "errors.csv", "run_meta.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_env_var_sets_output_root(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SWEWB_OUT", str(tmp_path / "root"))
    assert main(["run", "--experiment", "lake_rest_emerged", "--scheme", "hsr1", "--tend", "0.01"]) == 0
    assert (tmp_path / "root" / "solution.csv").exists()


def test_unwritable_output_is_runtime_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc = main(["run", "--experiment", "lake_rest_emerged", "--scheme", "hsr1", "--tend", "0.01",
               "--out", str(blocker / "sub")])
    assert rc == 1
    assert str(blocker) in capsys.readouterr().err


def test_convergence_table(tmp_path):
    out = tmp_path / "conv"
    rc = main(["convergence", "--experiment", "accuracy", "--schemes", "hdr2", "--levels", "4",
               "--ref-cells", "1280", "--out", str(out)])
    assert rc == 0
    rows = _rows(out / "convergence.csv")
    assert rows[0][:4] == ["N", "variable", "error", "order"]
    h_rows = [r for r in rows[1:] if r[1] == "h"]
    assert [int(r[0]) for r in h_rows] == [40, 80, 160, 320]
    assert h_rows[0][3] == "NA"
    assert float(h_rows[-1][3]) == pytest.approx(2.0, abs=0.4)
