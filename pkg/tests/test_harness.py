import json

import numpy as np
import pytest

from lindrate.cli import main
from lindrate.harness import (
    COLUMNS, ConfigError, ExperimentConfig, build_config, convergence_study, read_config_file,
    relative_error, rows_to_csv, rows_to_json, run_experiment,
)
from lindrate.models import SpinHalfParams, spin_half_analytic


def test_relative_error_convention():
    assert relative_error(2.0, 1.5) == 0.25
    assert relative_error(0.0, 1.0) is None
    assert relative_error(None, 1.0) is None


def test_spin_half_exact_sweep_matches_analytic():
    cfg = build_config("spin_half")
    rows = run_experiment(cfg)
    assert len(rows) == cfg.t_count
    for r in rows:
        a = spin_half_analytic(SpinHalfParams(), r.t)
        assert abs(r.C_estimate - a.C) < 1e-12 and abs(r.Cdot_estimate - a.Cdot) < 1e-12
        for e in (r.rel_err_C, r.rel_err_Cdot):
            assert e is None or abs(e) <= 1e-10
    assert rows[0].rel_err_C is None  # oracle is zero at t = 0


def test_modular_error_shrinks_with_steps():
    base = ExperimentConfig(evolver="modular", t_start=1.0, t_end=1.0, t_count=1)
    e3 = run_experiment(base.replace(steps=3))[0].rel_err_Cdot
    e25 = run_experiment(base.replace(steps=25))[0].rel_err_Cdot
    assert e25 != 0 and abs(e25) < abs(e3)


def test_schrodinger_picture_sweep():
    rows = run_experiment(ExperimentConfig(picture="schrodinger", t_count=3))
    assert all(r.rel_err_Cdot is None or abs(r.rel_err_Cdot) < 1e-10 for r in rows)


def test_shot_standard_error_and_determinism():
    cfg = ExperimentConfig(shots=20000, seed=5, t_start=1.0, t_end=1.0, t_count=1)
    row = run_experiment(cfg)[0]
    assert row.standard_error > 0
    # E_C is sampled after dividing by the bound 2 Tr(theta_A) Tr(theta_B(t)) = 2, and C = E_C / (2 * 0.5)
    mean = row.C_estimate / 2
    p_hat = (1 + mean) / 2
    assert row.standard_error == pytest.approx(2 * 2 * np.sqrt(p_hat * (1 - p_hat) / 20000), rel=1e-9)
    assert rows_to_csv(run_experiment(cfg), cfg) == rows_to_csv(run_experiment(cfg), cfg)


def test_parallel_matches_serial():
    cfg = ExperimentConfig(shots=1000, seed=9, t_count=4, evolver="modular", steps=30)
    assert run_experiment(cfg, jobs=2) == run_experiment(cfg, jobs=1)


def test_quantity_selection():
    row = run_experiment(ExperimentConfig(quantities="C", t_start=1, t_end=1, t_count=1))[0]
    assert row.Cdot_estimate is None and row.C_estimate is not None


def test_convergence_study_slope_and_single_row():
    table = convergence_study(ExperimentConfig(), [10, 20, 40, 80, 160], 1.0)
    errs = [abs(r[2]) for r in table.rows]
    assert errs == sorted(errs, reverse=True)
    assert table.slope_Cdot == pytest.approx(-1, abs=0.3)
    single = convergence_study(ExperimentConfig(), [10], 1.0)
    assert len(single.rows) == 1 and single.slope_Cdot is None
    with pytest.raises(ConfigError):
        convergence_study(ExperimentConfig(), [20, 10], 1.0)


def test_cl_desk_convergence_monotone():
    table = convergence_study(build_config("cl_desk"), [500, 1000, 2000], 3.0)
    errs = [abs(r[2]) for r in table.rows]
    assert errs[0] > errs[1] > errs[2]


def test_config_validation_names_field():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(t_count=0)
    assert info.value.path == "t_count"
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(t_start=2, t_end=1)
    assert info.value.path == "t_start"
    with pytest.raises(ConfigError):
        build_config(cli_values={"bogus": "1"})
    with pytest.raises(ConfigError):
        build_config(cli_values={"steps": "many"})


def test_config_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nsteps = 40\nt_count=5\nmu=0.2\n")
    file_values = read_config_file(str(path))
    cfg = build_config("cl_desk", file_values, {"steps": "7"})
    assert cfg.model == "caldeira_leggett"  # preset
    assert cfg.t_count == 5 and cfg.mu == 0.2  # file over preset
    assert cfg.steps == 7  # command line over file


def test_csv_layout():
    cfg = ExperimentConfig(t_count=3)
    text = rows_to_csv(run_experiment(cfg), cfg)
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    assert any("seed=None" in l for l in meta)
    assert body[0].split(",") == COLUMNS
    assert len(body) == 1 + cfg.t_count
    assert body[2].split(",")[1] == f"{run_experiment(cfg)[1].C_estimate:.12g}"


def test_json_output():
    cfg = ExperimentConfig(t_count=2)
    data = json.loads(rows_to_json(run_experiment(cfg), cfg))
    assert len(data["rows"]) == 2 and data["config"]["model"] == "spin_half"


def test_cli_sweep_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--t-count", "3", "--out", str(out)]) == 0
    assert out.read_text().count("\n") > 3
    assert main(["sweep", "--set", "t_count=0"]) == 1
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["sweep", "--evolver", "rk4", "--set", "rk4_dt=5", "--set", "gamma=50",
                 "--t-start", "2000", "--t-end", "2000", "--t-count", "1"]) == 2


def test_cli_converge_and_validate(capsys):
    assert main(["converge", "--n-list", "10,20,40"]) == 0
    out = capsys.readouterr().out
    assert "slope_Cdot=" in out and out.strip().splitlines()[-1].startswith("40,")
    assert main(["validate"]) == 0
    assert "FAIL" not in capsys.readouterr().out
