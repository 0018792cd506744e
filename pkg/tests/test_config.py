import textwrap

import pytest
import yaml

from laacoex import ConfigError, Scheme
from laacoex.config import dump_yaml, load_config, parse_config, scenario_to_dict, sweep_to_dict
from laacoex.des import DistributionSpec
from laacoex.experiments import PRESETS, Scenario, SweepSpec, preset, table1_scenario

MINIMAL = """\
scheme: UFA
rates:
  lambda_l: 25
  lambda_w: 5
  mu_lu: 25
  mu_w: 40
  mu_s: 1
  mu_on: 0.1
  mu_off: 0.1
"""


def write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def test_minimal_scenario_gets_defaults(tmp_path):
    s = load_config(write(tmp_path, MINIMAL))
    assert isinstance(s, Scenario)
    assert s.solver.alpha == 1e-6
    assert (s.sim.sessions, s.sim.batches, s.sim.seed) == (1_000_000, 10, 1)
    assert (s.scheme.D, s.scheme.Q) == (1, 2)
    assert s.engines == ("analytic",)


def test_exponent_without_dot_is_a_number(tmp_path):
    s = load_config(write(tmp_path, MINIMAL + "solver: {alpha: 1e-9}\n"))
    assert s.solver.alpha == 1e-9


def test_relative_rates_are_kept_as_expressions(tmp_path):
    text = MINIMAL.replace("lambda_l: 25", 'lambda_l: "0.5*mu_w"')
    s = load_config(write(tmp_path, text))
    assert s.rate_spec["lambda_l"] == "0.5*mu_w"
    assert s.rates.lambda_l == 20.0


@pytest.mark.parametrize("extra, field", [
    ("colour: blue\n", "colour"),
    ("solver: {alpah: 1.0e-6}\n", "solver.alpah"),
    ("simulation: {sesions: 10}\n", "simulation.sesions"),
    ("simulation: {overrides: {backoff: {kind: deterministic, value: 1}}}\n", "backoff"),
])
def test_unknown_keys_are_rejected(tmp_path, extra, field):
    with pytest.raises(ConfigError, match=field):
        load_config(write(tmp_path, MINIMAL + extra))


def test_parse_error_reports_line(tmp_path):
    text = MINIMAL.replace("  mu_w: 40", "  mu_w: [40")
    with pytest.raises(ConfigError) as info:
        load_config(write(tmp_path, text))
    assert "run.yaml:" in str(info.value)
    line = int(str(info.value).split("run.yaml:")[1].split(":")[0])
    assert 5 <= line <= 10


def test_threshold_error_names_q_theta(tmp_path):
    text = MINIMAL.replace("scheme: UFA", "scheme: UFAB\nQ: 2\nq_theta: 2")
    with pytest.raises(ConfigError, match="q_theta"):
        load_config(write(tmp_path, text))


def test_negative_rate_is_rejected(tmp_path):
    with pytest.raises(ConfigError, match="lambda_w"):
        load_config(write(tmp_path, MINIMAL.replace("lambda_w: 5", "lambda_w: -5")))


@pytest.mark.parametrize("text, field", [
    (MINIMAL.replace("  mu_s: 1\n", ""), "mu_s"),
    ("rates: {}\n", "scheme"),
    (MINIMAL.replace("scheme: UFA", "scheme: CSMA"), "scheme"),
    (MINIMAL + "Q: two\n", "Q"),
    (MINIMAL + "simulation: {sessions: 0}\n", "sessions"),
    (MINIMAL + "kind: batch\n", "kind"),
])
def test_semantic_errors_name_the_field(tmp_path, text, field):
    with pytest.raises(ConfigError, match=field):
        load_config(write(tmp_path, text))


def test_missing_and_empty_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.yaml")
    with pytest.raises(ConfigError, match="empty"):
        load_config(write(tmp_path, ""))


def test_sweep_file(tmp_path):
    text = MINIMAL.replace("scheme: UFA", "kind: sweep\nscheme: UTA\nq_theta: 1\nQ: 3") + textwrap.dedent("""\
        sweep:
          axis: lambda_l
          values: [25, "2*mu_lu"]
          schemes: [UTA, UTAB]
          series:
            - {label: slow-wifi, rates: {mu_w: 20}}
        """)
    spec = load_config(write(tmp_path, text))
    assert isinstance(spec, SweepSpec)
    assert spec.size == 4
    assert spec.point(Scheme.UTAB, 0, 1).rates.lambda_l == 50.0
    assert spec.point(Scheme.UTAB, 0, 0).scheme.q_theta == 1


def test_overrides_are_parsed(tmp_path):
    text = MINIMAL + textwrap.dedent("""\
        simulation:
          overrides:
            on: {kind: deterministic, value: 10}
            laa_service: {kind: custom, preset: ftp, params: {mean: 0.04, size: lognormal, sigma: 0.5}}
        """)
    s = load_config(write(tmp_path, text))
    assert s.sim.overrides["on"] == DistributionSpec.deterministic(10)
    assert s.sim.overrides["laa_service"].mean == 0.04


def test_scenario_round_trip():
    s = table1_scenario("UTA", 62.5)
    again = parse_config(yaml.safe_load(dump_yaml(scenario_to_dict(s))))
    assert again == s


@pytest.mark.parametrize("name", sorted(PRESETS) + ["table1"])
def test_sweep_round_trip(name):
    spec = preset(name)
    again = parse_config(yaml.safe_load(dump_yaml(sweep_to_dict(spec))))
    assert again.keys() == spec.keys()
    assert all(again.point(*k).rates == spec.point(*k).rates for k in spec.keys())
    assert all(again.point(*k).scheme == spec.point(*k).scheme for k in spec.keys())


def test_run_section_is_accepted():
    doc = scenario_to_dict(table1_scenario("UFA", 25))
    doc["run"] = {"command": "solve", "version": "0.1.0"}
    assert isinstance(parse_config(doc), Scenario)


def test_phase_overrides_round_trip():
    s = table1_scenario("UTA", 25)
    s = Scenario(s.name, s.scheme, s.rate_spec, s.solver,
                 type(s.sim)(sessions=10, overrides={"on": DistributionSpec.deterministic(10),
                                                     "off": DistributionSpec.exponential(0.2)}))
    again = parse_config(yaml.safe_load(dump_yaml(scenario_to_dict(s))))
    assert again == s
