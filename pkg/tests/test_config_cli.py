"""Config grammar, validation, serialization round trip, and the CLI surface."""

import json
import os

import numpy as np
import pytest

from nonholo.cli import main, read_table
from nonholo.config import (
    ExperimentConfig,
    ParseError,
    ValidationError,
    parse_config,
    serialize,
)

MINIMAL = """
[system]
kind = suslov_det
"""

SIM_TYPE1 = """
[system]
kind = suslov_type1
inertia = [1, 2, 3]
potential = linear
chi = [1, 1, 0]

[noise]
kind = ou
theta = 1.0
sigma0 = 0.5

[initial]
omega = [0.8, 0.6, 0.0]
gamma = [0.2, -0.4, 0.8]

[integration]
dt = 1e-3
t_final = 0.5
seed = 42
stride = 10
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.system["kind"] == "suslov_det"
    assert cfg.system["axis"] == [0.0, 0.0, 1.0]
    assert cfg.system["potential"] == "zero"
    assert cfg.integration["dt"] == 1e-3


def test_non_spd_inertia_rejected():
    with pytest.raises(ValidationError, match="inertia"):
        parse_config(MINIMAL + "\ninertia = [1, -2, 3]\n")


def test_round_trip():
    cfg = parse_config(SIM_TYPE1)
    assert parse_config(serialize(cfg)) == cfg


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as err:
        parse_config("[system]\nkind = suslov_det\nbogus_key = 3\n")
    assert err.value.line == 3
    with pytest.raises(ParseError, match="unknown section"):
        parse_config("[martians]\n")
    with pytest.raises(ParseError, match="unterminated"):
        parse_config("[system]\nkind = suslov_det\ninertia = [1, 2\n")
    with pytest.raises(ParseError, match="outside any"):
        parse_config("kind = suslov_det\n")


def test_unknown_system_kind_rejected():
    with pytest.raises(ValidationError, match="system.kind"):
        parse_config("[system]\nkind = pendulum\n")


def _write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_simulate_writes_schema_stable_csv(tmp_path):
    cfg = _write(tmp_path, SIM_TYPE1)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    with open(os.path.join(out, "trajectory.csv")) as fh:
        header = fh.readline().strip()
    assert header == "t,om1,om2,om3,ga1,ga2,ga3,n,energy,gamma_norm,constraint,lagrange,kharlamova"
    report = json.load(open(os.path.join(out, "report.json")))
    assert report["schema_version"] == 1
    assert report["subcommand"] == "simulate"


def test_simulate_noise_off_invariants_constant(tmp_path):
    text = SIM_TYPE1.replace("kind = ou", "kind = constant")
    cfg = _write(tmp_path, text)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    cols, rows = read_table(os.path.join(out, "trajectory.csv"))
    for name in ("energy", "kharlamova", "constraint"):
        col = rows[:, cols.index(name)]
        assert np.max(np.abs(col - col[0])) <= 1e-6


def test_invariants_subcommand_row_per_time(tmp_path):
    cfg = _write(tmp_path, SIM_TYPE1)
    out = str(tmp_path / "out")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    assert main(["invariants", "--config", cfg, "--out", out]) == 0
    cols, rows = read_table(os.path.join(out, "invariants.csv"))
    tcols, trows = read_table(os.path.join(out, "trajectory.csv"))
    assert cols[0] == "t"
    assert rows.shape[0] == trows.shape[0]


def test_json_format_matches_csv_numbers(tmp_path):
    csv_cfg = _write(tmp_path, SIM_TYPE1, "a.ini")
    json_cfg = _write(tmp_path, SIM_TYPE1 + "\n[output]\nformat = json\n", "b.ini")
    out_a, out_b = str(tmp_path / "oa"), str(tmp_path / "ob")
    assert main(["simulate", "--config", csv_cfg, "--out", out_a]) == 0
    assert main(["simulate", "--config", json_cfg, "--out", out_b]) == 0
    cols_a, rows_a = read_table(os.path.join(out_a, "trajectory.csv"))
    cols_b, rows_b = read_table(os.path.join(out_b, "trajectory.json"))
    assert cols_a == cols_b
    assert np.array_equal(rows_a, rows_b)  # %.17g round-trips exactly


def test_exit_code_for_usage_errors(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 1
    bad = _write(tmp_path, "[system]\nkind = nope\n")
    assert main(["simulate", "--config", bad, "--out", str(tmp_path / "o")]) == 1


def test_exit_code_and_report_for_numerical_failure(tmp_path):
    text = """
[system]
kind = suslov_type2

[initial]
omega = [1.0, 0.0, 0.0]
gamma = [0.0, 1.0, 0.0]
nvec = [0.0, 0.0, 1e-12]

[integration]
dt = 1e-3
t_final = 0.1
"""
    cfg = _write(tmp_path, text)
    out = str(tmp_path / "o")
    assert main(["simulate", "--config", cfg, "--out", out]) == 2
    report = json.load(open(os.path.join(out, "report.json")))
    assert report["error"]["type"] == "NoiseSingular"


def test_ensemble_reproducible_across_threads(tmp_path):
    text = SIM_TYPE1 + "\n[ensemble]\nn_paths = 12\nsample_every = 50\n"
    cfg = _write(tmp_path, text)
    out1, out2 = str(tmp_path / "t1"), str(tmp_path / "t4")
    assert main(["ensemble", "--config", cfg, "--out", out1, "--threads", "1"]) == 0
    assert main(["ensemble", "--config", cfg, "--out", out2, "--threads", "4"]) == 0
    with open(os.path.join(out1, "stats.csv"), "rb") as fh:
        bytes1 = fh.read()
    with open(os.path.join(out2, "stats.csv"), "rb") as fh:
        bytes2 = fh.read()
    assert bytes1 == bytes2


def test_seed_override_changes_output(tmp_path):
    cfg = _write(tmp_path, SIM_TYPE1)
    out1, out2 = str(tmp_path / "s1"), str(tmp_path / "s2")
    assert main(["simulate", "--config", cfg, "--out", out1, "--seed", "1"]) == 0
    assert main(["simulate", "--config", cfg, "--out", out2, "--seed", "2"]) == 0
    _, rows1 = read_table(os.path.join(out1, "trajectory.csv"))
    _, rows2 = read_table(os.path.join(out2, "trajectory.csv"))
    assert not np.array_equal(rows1, rows2)


def test_chart_and_rolling_kinds_simulate(tmp_path):
    chart_cfg = _write(tmp_path, """
[system]
kind = chart_type1

[noise]
kind = ou
sigma0 = 0.4

[integration]
dt = 1e-3
t_final = 0.2
""", "chart.ini")
    out = str(tmp_path / "chart_out")
    assert main(["simulate", "--config", chart_cfg, "--out", out]) == 0
    cols, rows = read_table(os.path.join(out, "trajectory.csv"))
    assert cols[:7] == ["t", "r1", "r2", "s1", "u1", "u2", "n1"]

    rolling_cfg = _write(tmp_path, """
[system]
kind = rolling_type1
inertia = [1, 2, 3]
mass = 2.0
alpha = skew
radius = 0.5

[noise]
kind = ou

[initial]
omega = [0.5, -0.3, 0.4]
gamma = [0.2, -0.4, 0.8]

[integration]
dt = 1e-3
t_final = 0.2
""", "rolling.ini")
    out2 = str(tmp_path / "rolling_out")
    assert main(["simulate", "--config", rolling_cfg, "--out", out2]) == 0
    cols, rows = read_table(os.path.join(out2, "trajectory.csv"))
    assert "y1" in cols and "n1" in cols and "energy" in cols
