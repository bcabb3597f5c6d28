"""End-to-end tests of the command line front end and its config dialect."""

import json

import numpy as np
import pytest

from hpheat.cli import (
    ConfigError,
    OutputTable,
    main,
    parse_config,
    run,
    serialize_config,
    write_table,
)

MINIMAL_FOURIER = """
mode = transient
model = fourier
conductivity_w_per_m_k = 3.0
density_kg_per_m3 = 2600
specific_heat_j_per_kg_k = 800
"""

FAST_TRANSIENT = MINIMAL_FOURIER + """
n_steps = 5
elements = 4
degree = 2
"""


# ------------------------------------------------------------- parsing


def test_minimal_config_defaults():
    config = parse_config(MINIMAL_FOURIER)
    assert config.mode == "transient"
    assert config.model == "fourier"
    assert config.relaxation_time == 0.0
    assert config.kappa2 == 0.0
    assert config.length == 0.005
    assert config.initial_temperature == 293.0
    assert config.dt == 1e-3
    assert config.n_steps == 10000
    assert config.theta == 0.5
    assert config.pulse_amplitude == 10000.0
    assert config.pulse_t_p == 0.008
    assert config.oracle_cells == 2000
    assert config.sweep_taus is None and config.sweep_values is None


def test_round_trip_through_serialization():
    text = MINIMAL_FOURIER + "theta = 1.0\nn_steps = 17\n"
    config = parse_config(text)
    assert parse_config(serialize_config(config)) == config

    sweep_text = """
mode = p_sweep
model = gk
conductivity_w_per_m_k = 3000
density_kg_per_m3 = 2600
specific_heat_j_per_kg_k = 800
kappa2_m2 = 8e-6
sweep_taus_s = 0.05 0.3
sweep_values = 2 3 4
"""
    sweep_config = parse_config(sweep_text)
    assert sweep_config.sweep_taus == (0.05, 0.3)
    assert sweep_config.sweep_values == (2, 3, 4)
    assert parse_config(serialize_config(sweep_config)) == sweep_config


def test_comments_and_blank_lines_ignored():
    text = MINIMAL_FOURIER + "\n# a comment\n   \nn_steps = 3 # trailing note\n"
    assert parse_config(text).n_steps == 3


def test_sweep_defaults_filled_per_model():
    base = """
mode = h_sweep
model = {model}
conductivity_w_per_m_k = 3000
density_kg_per_m3 = 2600
specific_heat_j_per_kg_k = 800
{extra}
"""
    mcv = parse_config(base.format(model="mcv", extra=""))
    assert mcv.sweep_taus == (0.05, 0.15, 0.3)
    assert mcv.sweep_values == (20, 24, 28, 32, 36, 40, 44)
    wave = parse_config(base.format(model="gk", extra="kappa2_m2 = 8e-6"))
    assert wave.sweep_values == (52, 58, 64, 70, 76, 82, 88)
    diffuse = parse_config(base.format(model="gk", extra="kappa2_m2 = 0.8"))
    assert diffuse.sweep_values == (8, 10, 12, 14, 16, 18, 20)


@pytest.mark.parametrize(
    "mutation,needle",
    [
        ("mode = orbit", "mode"),
        ("model = cattaneo", "model"),
        ("theta = 0.2", "theta"),
        ("theta = 1.2", "theta"),
        ("degree = 12", "degree"),
        ("dt_s = 0", "dt_s"),
        ("length_m = -1", "length_m"),
        ("oracle_cells = 2", "oracle_cells"),
        ("relaxation_time_s = 0.3", "relaxation_time_s = 0"),
    ],
)
def test_invalid_values_rejected(mutation, needle):
    lines = [l for l in MINIMAL_FOURIER.splitlines() if l.strip()]
    key = mutation.split("=")[0].strip()
    lines = [l for l in lines if not l.startswith(key)]
    text = "\n".join(lines) + "\n" + mutation + "\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert needle in str(err.value)


def test_negative_relaxation_time_hits_material_validation():
    text = MINIMAL_FOURIER.replace("model = fourier", "model = mcv")
    with pytest.raises(ConfigError, match="invalid material parameters"):
        parse_config(text + "relaxation_time_s = -0.1\n")


def test_unknown_and_duplicate_keys_report_line_numbers():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL_FOURIER + "viscosity = 3\n")
    assert "unknown key 'viscosity'" in str(err.value)
    assert "line 7" in str(err.value)

    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL_FOURIER + "mode = transient\n")
    assert "already set on line 2" in str(err.value)


def test_missing_required_keys():
    with pytest.raises(ConfigError) as err:
        parse_config("mode = transient\nmodel = fourier\n"
                      "density_kg_per_m3 = 2600\nspecific_heat_j_per_kg_k = 800\n")
    # The error teaches the benchmark value instead of defaulting to it.
    assert "conductivity_w_per_m_k" in str(err.value)
    assert "3.0" in str(err.value)

    with pytest.raises(ConfigError, match="relaxation_time_s"):
        parse_config(MINIMAL_FOURIER.replace("model = fourier", "model = mcv"))
    with pytest.raises(ConfigError, match="kappa2_m2"):
        parse_config(MINIMAL_FOURIER.replace("model = fourier", "model = gk")
                     + "relaxation_time_s = 0.3\n")
    with pytest.raises(ConfigError, match="kappa2_m2 = 0"):
        parse_config(MINIMAL_FOURIER.replace("model = fourier", "model = mcv")
                     + "relaxation_time_s = 0.3\nkappa2_m2 = 8e-6\n")


def test_sweep_key_scoping():
    with pytest.raises(ConfigError, match="sweep_taus_s"):
        parse_config(
            MINIMAL_FOURIER.replace("mode = transient", "mode = h_sweep")
            + "relaxation_time_s = 0.3\n"
        )
    with pytest.raises(ConfigError, match="only valid in the sweep modes"):
        parse_config(MINIMAL_FOURIER + "sweep_values = 4 6\n")


def test_malformed_lines():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("just some words\n")
    with pytest.raises(ConfigError, match="no value"):
        parse_config("mode =\n")
    with pytest.raises(ConfigError, match="expected a number"):
        parse_config(MINIMAL_FOURIER.replace("= 3.0", "= fast"))
    with pytest.raises(ConfigError, match="expected an integer"):
        parse_config(MINIMAL_FOURIER + "n_steps = 2.5\n")


# ------------------------------------------------------------- tables


def test_table_rendering_round_trips_reals(tmp_path):
    table = OutputTable(
        columns=("t_s", "value"),
        rows=((0.1, 1.0 / 3.0), (0.2, np.pi)),
    )
    path = tmp_path / "t.dat"
    write_table(table, path, "dat")
    lines = path.read_text().splitlines()
    assert lines[0] == "t_s value"
    parsed = [float(cell) for cell in lines[2].split()]
    assert parsed[1] == np.pi  # 17 significant digits reproduce the double

    csv_path = tmp_path / "t.csv"
    write_table(table, csv_path, "csv")
    assert "," in csv_path.read_text().splitlines()[0]


# ------------------------------------------------------------- modes


def test_transient_mode_writes_deterministic_tables(tmp_path):
    config = parse_config(FAST_TRANSIENT)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    run(config, out_dir=str(out_a), fmt="dat")
    run(config, out_dir=str(out_b), fmt="dat")

    names = sorted(p.name for p in out_a.iterdir())
    assert names == [
        "transient_T_front_fourier.dat",
        "transient_T_rear_fourier.dat",
        "transient_q_mid_fourier.dat",
    ]
    for name in names:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    front = (out_a / "transient_T_front_fourier.dat").read_text().splitlines()
    assert front[0] == "t_s temperature_k dimensionless"
    assert len(front) == 1 + 6  # header + initial instant + 5 steps
    flux = (out_a / "transient_q_mid_fourier.dat").read_text().splitlines()
    assert flux[0] == "t_s heat_flux_w_per_m2"


def test_oracle_check_mode(tmp_path, capsys):
    config = parse_config(FAST_TRANSIENT + "oracle_cells = 50\n")
    config = parse_config(serialize_config(config).replace(
        "mode = transient", "mode = oracle_check"
    ))
    run(config, out_dir=str(tmp_path), fmt="dat")
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "oracle_check_summary_fourier.dat" in names
    assert "oracle_check_T_front_fourier.dat" in names
    summary = (tmp_path / "oracle_check_summary_fourier.dat").read_text().splitlines()
    assert summary[0] == "probe relative_max_discrepancy"
    assert len(summary) == 4
    out = capsys.readouterr().out
    assert "T_front" in out and "discrepancy" in out


def test_sweep_mode_writes_error_tables(tmp_path):
    text = """
mode = h_sweep
model = mcv
conductivity_w_per_m_k = 3000
density_kg_per_m3 = 2600
specific_heat_j_per_kg_k = 800
n_steps = 5
sweep_taus_s = 0.3
sweep_values = 4 6
degree = 2
reference_elements = 8
reference_degree = 3
"""
    config = parse_config(text)
    run(config, out_dir=str(tmp_path), fmt="dat")
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [
        "h_sweep_T_front_mcv.dat",
        "h_sweep_T_rear_mcv.dat",
        "h_sweep_q_mid_mcv.dat",
    ]
    lines = (tmp_path / "h_sweep_T_front_mcv.dat").read_text().splitlines()
    assert lines[0] == "dof err_tau_0.3"
    assert len(lines) == 3
    dofs = [float(line.split()[0]) for line in lines[1:]]
    assert dofs == [2 * 4 * 3 + 1, 2 * 6 * 3 + 1]
    # Five steps cannot show convergence ordering; just demand real errors.
    errors = [float(line.split()[1]) for line in lines[1:]]
    assert all(np.isfinite(e) and e > 0.0 for e in errors)


def test_run_rejects_unknown_format(tmp_path):
    config = parse_config(FAST_TRANSIENT)
    with pytest.raises(ConfigError):
        run(config, out_dir=str(tmp_path), fmt="xml")


# ------------------------------------------------------------- main


def test_main_success_and_error_paths(tmp_path, capsys):
    good = tmp_path / "good.conf"
    good.write_text(FAST_TRANSIENT)
    out = tmp_path / "out"
    assert main(["run", str(good), "--out", str(out)]) == 0
    assert (out / "transient_T_rear_fourier.dat").exists()
    capsys.readouterr()

    bad = tmp_path / "bad.conf"
    bad.write_text("mode = transient\n")
    assert main(["run", str(bad)]) == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "config"
    assert "model" in record["message"]

    assert main(["run", str(tmp_path / "missing.conf")]) == 4
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "io"


def test_main_csv_format(tmp_path):
    good = tmp_path / "good.conf"
    good.write_text(FAST_TRANSIENT)
    out = tmp_path / "out"
    assert main(["run", str(good), "--out", str(out), "--format", "csv"]) == 0
    text = (out / "transient_T_front_fourier.csv").read_text()
    assert text.splitlines()[0] == "t_s,temperature_k,dimensionless"
