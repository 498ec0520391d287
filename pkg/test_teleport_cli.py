"""
Teleport CLI 테스트
실행 설정 파싱, 명령 라우터 (table1 / sweep / run / calibrate), CSV 리포트, 종료 코드
"""
import io

import numpy as np
import pandas as pd
import pytest

from gaussian_core import TeleportError
from handlers import (
    RUN_COLUMNS, STATUS_INFEASIBLE, STATUS_OK, ReportTable, cmd_calibrate, cmd_run, cmd_sweep,
    cmd_table1, dispatch,
)
from microwave_circuit import AmplifierChain
from reference_table import REPORT_COLUMNS
from run_config import ConfigError, RunConfig, parse_config, parse_grid
from teleport_cli import main

LOSSLESS = """
# 손실 없는 회로, 단위 이득
epsilon = 1
eta = 1
kappa = 1
nu = 1
gJ = 1
gH = 1
deterministic = true
"""


def _read(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), comment="#")


def _footer(text: str) -> dict:
    lines = [line[2:] for line in text.splitlines() if line.startswith("# ")]
    return dict(line.split("=", 1) for line in lines)


# ===== 실행 설정 =====

def test_parse_grid():
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("0.1, 0.2,0.3") == [0.1, 0.2, 0.3]
    assert parse_grid(2) == [2.0]
    with pytest.raises(ValueError):
        parse_grid("0:1")
    with pytest.raises(ValueError):
        parse_grid("0:1:0")


def test_empty_config_uses_fridge_defaults():
    config = parse_config("")
    assert config.epsilon == 0.95 and config.eta == 0.90
    assert config.kappa == 0.65 and config.nu == 0.75
    assert config.r == pytest.approx(1.32)
    assert config.chain == AmplifierChain.HEMT
    assert config.sweep_r == pytest.approx(np.linspace(0, 3, 31))


def test_parse_config_comments_and_overrides():
    config = parse_config("r = 0.5  # 약한 스퀴징\nchain = JPA_CHAIN\n", overrides={"r": "0.7"})
    assert config.r == pytest.approx(0.7)
    assert config.chain == AmplifierChain.JPA_CHAIN
    assert config.gains().post_gain == pytest.approx(config.gJ ** 2)


@pytest.mark.parametrize("text", [
    "eta = 1.5",
    "epsilon = 0",
    "shots = 0",
    "bogus_key = 1",
    "tau_rule = double",
    "sweep_eta = 0.5,1.2",
    "seed = -1",
    "no equals sign",
])
def test_parse_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_error_is_teleport_error():
    assert issubclass(ConfigError, TeleportError)


def test_gain_squeezing_consistency():
    assert parse_config("gJ = 100\nrJ = 2.30").rJ == pytest.approx(2.30)
    with pytest.raises(ConfigError):
        parse_config("gJ = 100\nrJ = 2.0")


def test_config_hash_ignores_output_path():
    base = parse_config("r = 1.0")
    moved = parse_config("r = 1.0", overrides={"output_path": "elsewhere.csv"})
    assert base.config_hash() == moved.config_hash()
    assert base.config_hash() != parse_config("r = 1.1").config_hash()
    assert len(base.config_hash()) == 16


def test_config_is_frozen():
    config = RunConfig()
    with pytest.raises(Exception):
        config.r = 2.0


# ===== ReportTable =====

def test_report_table_width_check():
    with pytest.raises(TeleportError):
        ReportTable(header=["a", "b"], rows=[[1.0]])
    table = ReportTable(header=["a", "b"])
    with pytest.raises(TeleportError):
        table.append([1.0, 2.0, 3.0])


def test_report_table_csv_format(tmp_path):
    table = ReportTable(header=["a", "b"], rows=[[1 / 3, 2.0]], provenance={"seed": "5"})
    path = tmp_path / "out.csv"
    text = table.write(str(path))
    assert path.read_text(encoding="utf-8") == text
    lines = text.splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "0.333333333333,2"
    assert lines[-1] == "# seed=5"


# ===== 명령 =====

def test_table1_residuals():
    table = cmd_table1(RunConfig())
    assert table.header == REPORT_COLUMNS
    frame = table.to_frame()
    main_rows = frame[frame["tau_rule"] != "adc"]
    bounds = {"tau": 0.005, "beta_db": 0.025, "lambda": 0.01,
              "coef_I": 0.005, "coef_x2": 0.005, "coef_p2": 0.005}
    for configuration in ("fridge", "free_space"):
        rule = "half" if configuration == "fridge" else "full"
        rows = main_rows[(main_rows["configuration"] == configuration) & (main_rows["tau_rule"] == rule)]
        assert set(rows["quantity"]) == set(bounds)
        for _, row in rows.iterrows():
            assert abs(row["residual"]) <= bounds[row["quantity"]], row.to_dict()


def test_table1_fridge_lambda():
    frame = cmd_table1(RunConfig()).to_frame()
    row = frame[(frame["configuration"] == "fridge") & (frame["quantity"] == "lambda")].iloc[0]
    assert row["computed"] == pytest.approx(1.747, abs=1e-3)
    assert row["printed"] == 1.74


def test_table1_reports_half_rule_for_free_space():
    frame = cmd_table1(RunConfig()).to_frame()
    row = frame[(frame["configuration"] == "free_space") & (frame["tau_rule"] == "half")].iloc[0]
    assert row["computed"] == pytest.approx(0.0475, abs=1e-9)


def test_table1_adc_lambda_has_no_printed_value():
    frame = cmd_table1(RunConfig()).to_frame()
    adc_rows = frame[frame["quantity"] == "lambda_adc"]
    assert len(adc_rows) == 2
    assert adc_rows["printed"].isna().all()
    assert (adc_rows["computed"] > 2).all()


def test_sweep_reaches_unit_fidelity():
    config = parse_config("sweep_eta = 1\nsweep_r = 0:5:11")
    table = cmd_sweep(config)
    assert table.status == STATUS_OK
    assert table.to_frame()["fidelity"].iloc[-1] >= 0.999


def test_sweep_all_classical_is_infeasible_status():
    config = parse_config("sweep_eta = 0.5\nsweep_N = 5\nsweep_r = 0:3:31")
    table = cmd_sweep(config)
    assert table.status == STATUS_INFEASIBLE
    assert len(table.rows) == 31


def test_run_lossless_deterministic():
    config = parse_config(LOSSLESS + "x_in = 0.8\np_in = -1.1\ny = 0.3\nshots = 5")
    table = cmd_run(config)
    assert table.header == RUN_COLUMNS
    assert table.status == STATUS_OK
    row = table.to_frame().iloc[0]
    assert row["residual_max_abs"] < 1e-12
    assert row["target_x"] == pytest.approx(np.exp(-0.3) * 0.8, abs=1e-12)
    assert row["ideal_mean_x"] == pytest.approx(0.8, abs=1e-12)
    # 평균값 모드에는 표본 공분산이 없다
    assert np.isnan(row["ideal_fidelity_estimate"])


def test_run_reports_ideal_output_state():
    """r=1, n=0, y=0: V_out = (1 + 2e^{-2})𝕀, 순도 1/(1 + 2e^{-2})"""
    config = parse_config("x_in = 0.4\np_in = 0.3\nr = 1\nshots = 4000")
    row = cmd_run(config).to_frame().iloc[0]
    noise = 1 + 2 * np.exp(-2)
    assert row["ideal_out_mean_x1"] == pytest.approx(0.4)
    assert row["ideal_out_mean_p1"] == pytest.approx(0.3)
    assert row["ideal_out_cov_0_0"] == pytest.approx(noise, abs=1e-12)
    assert row["ideal_out_cov_0_1"] == pytest.approx(0.0, abs=1e-12)
    assert row["ideal_out_cov_1_1"] == pytest.approx(noise, abs=1e-12)
    assert row["ideal_out_purity"] == pytest.approx(1 / noise, abs=1e-12)
    assert row["ideal_fidelity_estimate"] == pytest.approx(row["ideal_fidelity"], abs=0.05)


def test_run_fridge_defaults_are_feasible():
    table = cmd_run(parse_config("shots = 200\nx_in = 0.5"))
    assert table.status == STATUS_OK
    assert bool(table.to_frame()["feasible"].iloc[0])


def test_run_adc_lambda_is_infeasible():
    table = cmd_run(parse_config("lambda_mode = adc\nshots = 10\ndeterministic = true"))
    assert table.status == STATUS_INFEASIBLE
    assert table.to_frame()["lambda"].iloc[0] == pytest.approx(33.9, abs=0.1)


def test_run_same_seed_same_bytes():
    config = parse_config("shots = 500\nx_in = 0.2\nseed = 42")
    first = cmd_run(config).to_csv()
    second = cmd_run(config).to_csv()
    assert first == second
    footer = _footer(first)
    assert footer["seed"] == "42"
    assert footer["config_hash"] == config.config_hash()


def test_run_different_seed_changes_output():
    first = cmd_run(parse_config("shots = 500\nseed = 1")).to_csv()
    second = cmd_run(parse_config("shots = 500\nseed = 2")).to_csv()
    assert first != second


def test_calibrate_row():
    table = cmd_calibrate(parse_config("shots = 2000\nseed = 9"))
    assert table.status == STATUS_OK
    row = table.to_frame().iloc[0]
    for key in ("coef_I", "coef_x2", "coef_p2"):
        assert row[f"wiring_check_{key}"] == pytest.approx(row[f"analytic_{key}"], rel=1e-6)


def test_calibrate_hemt_noise_reaches_report():
    quiet = cmd_calibrate(parse_config("shots = 3000\nseed = 4")).to_frame().iloc[0]
    noisy = cmd_calibrate(parse_config("shots = 3000\nseed = 4\nhemt_added_photons = 10")).to_frame().iloc[0]
    assert noisy["zeta_x_var"] > quiet["zeta_x_var"] + 10


def test_dispatch_unknown_command():
    with pytest.raises(TeleportError):
        dispatch("teleport", RunConfig())


# ===== 진입점 =====

def test_main_table1_writes_csv(tmp_path):
    out = tmp_path / "table1.csv"
    assert main(["table1", "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert list(_read(text).columns) == REPORT_COLUMNS
    assert "config_hash" in _footer(text)


def test_main_stdout(capsys):
    assert main(["sweep", "--set", "sweep_r=0:1:3", "--set", "sweep_eta=1"]) == 0
    frame = _read(capsys.readouterr().out)
    assert len(frame) == 3


def test_main_config_file_and_seed(tmp_path):
    config_path = tmp_path / "run.conf"
    config_path.write_text(LOSSLESS + "shots = 3\n", encoding="utf-8")
    out = tmp_path / "run.csv"
    assert main(["run", "--config", str(config_path), "--seed", "77", "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert _footer(text)["seed"] == "77"
    assert _read(text)["residual_max_abs"].iloc[0] < 1e-12


def test_main_infeasible_exit_code(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["run", "--set", "lambda_mode=adc", "--set", "shots=5", "--out", str(out)]) == 2
    assert out.exists()


@pytest.mark.parametrize("argv", [
    ["run", "--set", "bogus=1"],
    ["run", "--set", "missing-equals"],
    ["run", "--seed", "-1"],
    ["sweep", "--config", "/nonexistent/teleport.conf"],
])
def test_main_error_exit_code(argv):
    assert main(argv) == 1
