import re

import pytest
import yaml

from laacoex import __version__
from laacoex.cli import RATE_FLAGS, main
from laacoex.experiments import PRESET_NAMES

SPEC_FLAGS = ("--scheme", "--preset", "--config", "--out", "--format", "--seed", "--sessions", "--tolerance",
              "--lambda-l", "--lambda-w", "--mu-lu", "--mu-w", "--mu-s", "--mu-on", "--mu-off", "--q",
              "--q-theta", "--d")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_table1_preset(capsys):
    code, out, _ = run_cli(capsys, "solve", "--scheme", "ufa", "--preset", "table1", "--lambda-l", "25")
    assert code == 0
    assert re.search(r"P_b,l = 0\.\d{6}", out) and re.search(r"P_b,w = 0\.\d{6}", out)
    assert "# run metadata" in out and "lambda_l: 25.0" in out


def test_solve_from_flags_only(capsys):
    code, out, _ = run_cli(capsys, "solve", "--scheme", "UTAB", "--q", "3", "--q-theta", "1", "--lambda-l", "0.5*mu_w",
                           "--lambda-w", "5", "--mu-lu", "10", "--mu-w", "10", "--mu-s", "10", "--mu-on", "1",
                           "--mu-off", "1", "--format", "csv")
    assert code == 0
    assert out.startswith("scenario,scheme,axis,axis_value,p_bl_analytic")


def test_simulate_prints_counters(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--preset", "table1", "--scheme", "uta", "--sessions", "5000")
    assert code == 0
    assert "P_b,l (sim)" in out and "Wi-Fi arrivals" in out
    assert "rng: numpy.PCG64" in out


def test_sweep_fig12_writes_ten_rows(tmp_path, capsys):
    out = tmp_path / "results.csv"
    code, _, err = run_cli(capsys, "sweep", "--preset", "fig12", "--out", str(out))
    assert code == 0
    assert len(out.read_text().splitlines()) == 11
    assert "q_theta = Q" in err
    meta = yaml.safe_load((tmp_path / "results.csv.meta.yaml").read_text())
    assert meta["run"]["command"] == "sweep" and meta["run"]["version"] == __version__


def test_presets_listing(capsys):
    code, out, _ = run_cli(capsys, "presets")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == list(PRESET_NAMES)


@pytest.mark.parametrize("sub", ["solve", "simulate", "sweep", "validate", "presets"])
def test_help_lists_every_flag_and_preset(capsys, sub):
    with pytest.raises(SystemExit) as info:
        main([sub, "--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for flag in SPEC_FLAGS:
        assert flag in text
    for name in PRESET_NAMES:
        assert name in text


def test_no_undocumented_flags(capsys):
    with pytest.raises(SystemExit):
        main(["solve", "--help"])
    text = capsys.readouterr().out
    flags = set(re.findall(r"(--[a-z][a-z-]*)", text))
    assert flags <= set(SPEC_FLAGS) | {"--help"}
    assert set(RATE_FLAGS.values()) <= flags


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["solve", "--q", "two"],
    ["solve", "--format", "xml"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
    assert "usage:" in capsys.readouterr().err


@pytest.mark.parametrize("argv, needle", [
    (["solve", "--scheme", "ufa"], "--lambda-l"),
    (["solve", "--preset", "fig99"], "preset"),
    (["solve", "--preset", "table1", "--scheme", "ufab"], "q_theta"),
    (["solve", "--preset", "table1", "--mu-w", "-3"], "mu_w"),
    (["sweep"], "--preset"),
    (["validate", "--scheme", "ufa"], "validate takes only"),
    (["simulate", "--preset", "table1", "--sessions", "0"], "sessions"),
])
def test_config_errors_exit_2(capsys, argv, needle):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert needle in err


def test_bad_config_file_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("scheme: UFA\nrates: {lambda_l: 1\n")
    code, _, err = run_cli(capsys, "solve", "--config", str(p))
    assert code == 2 and "bad.yaml:" in err


def test_validate_exits_1_on_failing_cells(capsys):
    code, out, _ = run_cli(capsys, "validate", "--sessions", "0")
    assert code == 1
    assert "analytic:" in out and "error_pct: 19/19" in out


def test_validate_with_loose_tolerance_passes(capsys):
    code, out, _ = run_cli(capsys, "validate", "--sessions", "0", "--tolerance", "0.05")
    assert code == 0
    assert "analytic: 20/20" in out


def test_sweep_point_failures_exit_1(tmp_path, capsys):
    p = tmp_path / "sweep.yaml"
    p.write_text(
        "kind: sweep\nscheme: UTA\nrates: {lambda_l: 25, lambda_w: 5, mu_lu: 25, mu_w: 40, mu_s: 1, mu_on: 0.1, "
        "mu_off: 0.1}\nsolver: {max_iterations: 5}\nsweep: {axis: Q, values: [1, 2]}\n")
    code, _, err = run_cli(capsys, "sweep", "--config", str(p))
    assert code == 1
    assert "NonConvergenceError" in err


@pytest.mark.parametrize("argv", [
    ["solve", "--preset", "table1", "--scheme", "uta", "--lambda-l", "62.5"],
    ["simulate", "--preset", "fig4", "--sessions", "3000", "--seed", "9"],
    ["sweep", "--preset", "fig6", "--format", "pretty"],
    ["sweep", "--preset", "table1", "--sessions", "2000"],
])
def test_rerun_from_metadata_is_byte_identical(tmp_path, capsys, argv):
    first = tmp_path / "first.out"
    assert main(argv + ["--out", str(first)]) == 0
    meta = yaml.safe_load((tmp_path / "first.out.meta.yaml").read_text())
    second = tmp_path / "second.out"
    assert main(meta["run"]["argv"] + ["--out", str(second)]) == 0
    capsys.readouterr()
    assert second.read_bytes() == first.read_bytes()
    assert (tmp_path / "second.out.meta.yaml").read_text().replace("second.out", "first.out") == \
        (tmp_path / "first.out.meta.yaml").read_text()
