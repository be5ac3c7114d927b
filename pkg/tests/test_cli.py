import json
import subprocess
import sys

import numpy as np
import pytest

from quasinodal import build_grid, count_nodes
from quasinodal.cli_reporting import (
    RunRecord,
    SolverConfig,
    load_config,
    main,
    parse_config_text,
    read_profile,
)
from quasinodal.errors import ConfigError

SMALL = ["--R", "20", "--n", "2000"]


def test_config_parsing_with_dotted_keys():
    cfg = parse_config_text("# comment\ngrid.R = 12.5\nnonlinearity.l = 2\nsolver.k=3\ntol.radius = none\n")
    assert cfg.R == 12.5 and cfg.l == 2.0 and cfg.k == 3 and cfg.radius_tol is None
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize(
    "text",
    ["grid.R = abc", "nonsense.key = 1", "no equals sign", "tol.el_residual = 0"],
)
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config_text(text).validate()


def test_vanishing_mode_needs_zero_set():
    with pytest.raises(ConfigError):
        parse_config_text("solver.mode = vanishing").validate()


def test_environment_overrides():
    cfg = load_config(None, env={"QUASINODAL_THREADS": "3", "QUASINODAL_OUTPUT_DIR": "/tmp/x"})
    assert cfg.threads == 3 and cfg.output_dir == "/tmp/x"


def test_check_exit_codes(tmp_path):
    assert main(["check", "--all", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "check.json").read_text())["property_reports"][0]["passed"]
    assert main(["check", "--model", "semilinear", "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("grid.N = two\n")
    assert main(["check", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["check", "--bogus-flag"]) == 2


def test_solve_writes_record_and_profile(tmp_path):
    assert main(["solve", "nodal", "--k", "2", *SMALL, "--out", str(tmp_path)]) == 0
    rec = RunRecord.read(tmp_path / "solve_nodal_k2.json")
    assert rec.reports[0]["node_count"] == 2 and rec.reports[0]["converged"]
    assert rec.config["grid"]["R"] == 20.0
    grid = build_grid(3, 20.0, 2000)
    r, u, fu = read_profile(tmp_path / "solve_nodal_k2_profile.csv", grid)
    assert count_nodes(u) == 2
    np.testing.assert_array_equal(r, grid.nodes)
    assert (tmp_path / "solve_nodal_k2_profile.csv").read_text().startswith("r,u,f_u\n")


def test_profile_is_lossless(tmp_path):
    from quasinodal.cli_reporting import build_problem, write_profile
    from quasinodal import solve_annulus_ground

    cfg = SolverConfig(R=20.0, n=2000)
    em, opts = build_problem(cfg)
    u, _ = solve_annulus_ground(em, None, 1, opts)
    path = write_profile(tmp_path / "p.csv", em, u)
    _, back, fu = read_profile(path, em.grid)
    assert np.array_equal(back.values, u.values)
    assert np.array_equal(fu, em.transform.forward(u.values))


def test_vanishing_below_threshold_fails_with_record(tmp_path):
    assert main(["solve", "vanishing", "--l", "100", "--out", str(tmp_path)]) == 1
    rec = RunRecord.read(tmp_path / "solve_vanishing.json")
    assert rec.error["type"] == "SeedConstructionFailed"
    assert not (tmp_path / "solve_vanishing_profile.csv").exists()


def test_nonconvergence_exit_code(tmp_path):
    args = ["solve", "ground", *SMALL, "--set", "solver.max_iters=1", "--set", "tol.el_residual=1e-30"]
    assert main(args + ["--out", str(tmp_path)]) == 1
    rec = RunRecord.read(tmp_path / "solve_ground.json")
    assert rec.error["type"] == "MaxItersExceeded" and rec.reports[0]["converged"] is False


def test_sweep(tmp_path):
    assert main(["sweep", "--n", "1000,2000", "--R", "20", "--out", str(tmp_path)]) == 0
    rec = RunRecord.read(tmp_path / "sweep_ground.json")
    assert len(rec.convergence_table) == 2 and rec.extras["max_relative_spread"] <= 1e-2
    assert main(["sweep", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--n", "10,abc", "--out", str(tmp_path)]) == 2


def test_reproducible_records(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["solve", "signchange", *SMALL, "--out", str(d)]) == 0
    ra, rb = RunRecord.read(a / "solve_signchange.json"), RunRecord.read(b / "solve_signchange.json")
    assert ra.payload() == rb.payload()
    assert (a / "solve_signchange_profile.csv").read_bytes() == (b / "solve_signchange_profile.csv").read_bytes()


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "quasinodal", "check", "--transform", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0 and "PASS" in out.stdout
