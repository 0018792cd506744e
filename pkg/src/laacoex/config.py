"""YAML run files: strict schema, line-numbered parse errors, field-named semantic errors.

A scenario file::

    kind: scenario            # or "sweep"
    name: ufa-25
    scheme: UFA
    Q: 2
    D: 1
    q_theta: null             # required for UFAB / UTAB
    rates:
      lambda_l: 25            # numbers or "k*rate" expressions, e.g. "0.5*mu_w"
      lambda_w: 5
      mu_lu: 25
      mu_w: 40
      mu_s: 1
      mu_on: 0.1
      mu_off: 0.1
    engines: [analytic]       # any of analytic, simulation
    solver: {alpha: 1.0e-6, max_iterations: 1000000}
    simulation:
      sessions: 1000000
      seed: 1
      batches: 10
      overrides:              # optional per-duration distributions
        on: {kind: deterministic, value: 10}

A sweep file adds::

    sweep:
      axis: Q                 # Q, q_theta, a rate name, or on_off
      values: [1, 2, 3]
      schemes: [UTA, UTAB]    # defaults to the top-level scheme
      series:                 # optional curves, each a set of rate overrides
        - {label: low, rates: {lambda_l: "1*mu_w"}}
      allow_full_threshold: false

Files written by the command-line tool next to their results carry an extra
``run`` section (command, version, ...); it is accepted and ignored here.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Mapping

import yaml

from .des import QUANTITIES, DistributionSpec
from .errors import ConfigError
from .experiments import AXES, RATE_NAMES, Scenario, SimSettings, SweepSpec
from .model import Scheme, SchemeConfig
from .solver import SolverSettings

__all__ = ["load_config", "parse_config", "scenario_to_dict", "sweep_to_dict", "dump_yaml"]

_TOP = {"kind", "name", "scheme", "D", "Q", "q_theta", "allow_full_threshold", "rates", "engines", "solver",
        "simulation", "sweep", "run"}
_SOLVER = {"alpha", "max_iterations"}
_SIM = {"sessions", "seed", "batches", "overrides"}
_SWEEP = {"axis", "values", "schemes", "series", "allow_full_threshold"}
_OVERRIDE = {"kind", "rate", "value", "preset", "params"}
_BOOL_KEYS = {True: "on", False: "off"}


def _check_keys(where: str, data, allowed: set[str]):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    for key in data:
        if key not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigError(f"{prefix}{key}: unknown key (allowed: {', '.join(sorted(allowed))})")


def _number(where: str, value, integer: bool = False):
    # YAML 1.1 reads "1e-6" (no dot) as a string; accept it as a number here
    if isinstance(value, bool) or value is None:
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if integer:
        if isinstance(value, float):
            if not value.is_integer():
                raise ConfigError(f"{where}: expected an integer, got {value!r}")
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _rates(where: str, data) -> dict:
    _check_keys(where, data, set(RATE_NAMES))
    out = {}
    for k, v in data.items():
        out[k] = v if isinstance(v, str) and not _is_float(v) else _number(f"{where}.{k}", v)
    return out


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def _override(where: str, data) -> DistributionSpec:
    _check_keys(where, data, _OVERRIDE)
    kind = data.get("kind", "exponential")
    rate = data.get("rate")
    value = data.get("value")
    return DistributionSpec(
        kind=kind,
        rate=None if rate is None else _number(f"{where}.rate", rate),
        value=None if value is None else _number(f"{where}.value", value),
        preset=data.get("preset"),
        params={k: (v if isinstance(v, str) else _number(f"{where}.params.{k}", v))
                for k, v in (data.get("params") or {}).items()},
    )


def _scheme_config(data, scheme=None, allow_full=False) -> SchemeConfig:
    scheme = Scheme.parse(scheme if scheme is not None else data.get("scheme", ""))
    q_theta = data.get("q_theta")
    return SchemeConfig(
        scheme,
        D=_number("D", data.get("D", 1), integer=True),
        Q=_number("Q", data.get("Q", 2), integer=True),
        q_theta=None if q_theta is None else _number("q_theta", q_theta, integer=True),
        allow_full_threshold=bool(data.get("allow_full_threshold", allow_full)),
    )


def _scenario(data: Mapping, scheme=None, allow_full=False) -> Scenario:
    if "scheme" not in data and scheme is None:
        raise ConfigError("scheme: required")
    if "rates" not in data:
        raise ConfigError("rates: required")
    solver = data.get("solver") or {}
    _check_keys("solver", solver, _SOLVER)
    sim = data.get("simulation") or {}
    _check_keys("simulation", sim, _SIM)
    # YAML 1.1 reads bare on/off keys as booleans
    overrides = {_BOOL_KEYS.get(k, k) if isinstance(k, bool) else k: v
                 for k, v in (sim.get("overrides") or {}).items()}
    _check_keys("simulation.overrides", overrides, set(QUANTITIES))
    engines = data.get("engines", ["analytic"])
    if isinstance(engines, str):
        engines = [engines]
    if not isinstance(engines, list):
        raise ConfigError(f"engines: expected a list, got {engines!r}")
    return Scenario(
        name=str(data.get("name", "scenario")),
        scheme=_scheme_config(data, scheme, allow_full),
        rate_spec=_rates("rates", data["rates"]),
        solver=SolverSettings(
            alpha=_number("solver.alpha", solver.get("alpha", 1e-6)),
            max_iterations=_number("solver.max_iterations", solver.get("max_iterations", 1_000_000), integer=True),
        ),
        sim=SimSettings(
            sessions=_number("simulation.sessions", sim.get("sessions", 1_000_000), integer=True),
            seed=_number("simulation.seed", sim.get("seed", 1), integer=True),
            batches=_number("simulation.batches", sim.get("batches", 10), integer=True),
            overrides={k: _override(f"simulation.overrides.{k}", v) for k, v in overrides.items()},
        ),
        engines=tuple(str(e) for e in engines),
    )


def _axis_value(axis: str, v, where: str):
    if axis in ("Q", "q_theta"):
        return _number(where, v, integer=True)
    if axis == "on_off":
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            raise ConfigError(f"{where}: on_off values are [mu_on, mu_off] pairs, got {v!r}")
        return tuple(x if isinstance(x, str) and not _is_float(x) else _number(where, x) for x in v)
    return v if isinstance(v, str) and not _is_float(v) else _number(where, v)


def _sweep(data: Mapping) -> SweepSpec:
    sw = data.get("sweep")
    _check_keys("sweep", sw, _SWEEP)
    axis = sw.get("axis")
    if axis not in AXES:
        raise ConfigError(f"sweep.axis: expected one of {', '.join(AXES)}, got {axis!r}")
    values = sw.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values: expected a non-empty list")
    schemes = sw.get("schemes") or [data.get("scheme")]
    if not isinstance(schemes, list):
        raise ConfigError("sweep.schemes: expected a list")
    allow_full = bool(sw.get("allow_full_threshold", False))
    # the base carries q_theta for buffered points, so prefer a buffered scheme when a threshold is given
    parsed = [Scheme.parse(s) for s in schemes]
    base_scheme = parsed[0]
    if data.get("q_theta") is not None:
        base_scheme = next((s for s in parsed if s.buffered), base_scheme)
    base = _scenario(data, scheme=base_scheme, allow_full=allow_full)
    series = []
    for i, item in enumerate(sw.get("series") or []):
        _check_keys(f"sweep.series[{i}]", item, {"label", "rates"})
        series.append((str(item.get("label", i)), _rates(f"sweep.series[{i}].rates", item.get("rates") or {})))
    return SweepSpec(
        name=base.name,
        base=base,
        axis=axis,
        values=tuple(_axis_value(axis, v, f"sweep.values[{i}]") for i, v in enumerate(values)),
        schemes=tuple(parsed),
        series=tuple(series) or (("", {}),),
        allow_full_threshold=allow_full,
    )


def parse_config(data: Any) -> Scenario | SweepSpec:
    """Validate an already-parsed document."""
    _check_keys("", data, _TOP)
    kind = data.get("kind", "sweep" if "sweep" in data else "scenario")
    if kind == "scenario":
        if "sweep" in data:
            raise ConfigError("sweep: not allowed in a scenario file (set kind: sweep)")
        return _scenario(data)
    if kind == "sweep":
        if "sweep" not in data:
            raise ConfigError("sweep: required for kind: sweep")
        return _sweep(data)
    raise ConfigError(f"kind: expected 'scenario' or 'sweep', got {kind!r}")


def load_config(path) -> Scenario | SweepSpec:
    """Read and validate a run file; parse errors carry ``path:line:column``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror or exc})") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            lines = text.splitlines()
            context = lines[mark.line] if mark.line < len(lines) else ""
            raise ConfigError(f"{path}:{mark.line + 1}:{mark.column + 1}: {problem}\n    {context}") from None
        raise ConfigError(f"{path}: {problem}") from None
    if data is None:
        raise ConfigError(f"{path}: empty config file")
    return parse_config(data)


# -- serialisation (used for result metadata) -------------------------------------

def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _override_dict(spec: DistributionSpec) -> dict:
    out = {"kind": spec.kind}
    if spec.rate is not None:
        out["rate"] = spec.rate
    if spec.value is not None:
        out["value"] = spec.value
    if spec.preset is not None:
        out["preset"] = spec.preset
    if spec.params:
        out["params"] = dict(spec.params)
    return out


def scenario_to_dict(s: Scenario) -> dict:
    """A document that :func:`parse_config` turns back into an equal scenario."""
    out = {
        "kind": "scenario",
        "name": s.name,
        "scheme": s.scheme.scheme.value,
        "D": s.scheme.D,
        "Q": s.scheme.Q,
        "q_theta": s.scheme.q_theta,
        "allow_full_threshold": s.scheme.allow_full_threshold,
        "rates": {k: s.rate_spec[k] for k in RATE_NAMES},
        "engines": list(s.engines),
        "solver": {"alpha": s.solver.alpha, "max_iterations": s.solver.max_iterations},
        "simulation": {"sessions": s.sim.sessions, "seed": s.sim.seed, "batches": s.sim.batches},
    }
    if s.sim.overrides:
        out["simulation"]["overrides"] = {k: _override_dict(v) for k, v in s.sim.overrides.items()}
    return out


def sweep_to_dict(spec: SweepSpec) -> dict:
    out = scenario_to_dict(spec.base)
    out["kind"] = "sweep"
    out["name"] = spec.name
    # the base's own threshold may be a placeholder; each point derives its own
    out["allow_full_threshold"] = spec.allow_full_threshold
    out["sweep"] = {
        "axis": spec.axis,
        "values": _plain(spec.values),
        "schemes": [s.value for s in spec.schemes],
        "allow_full_threshold": spec.allow_full_threshold,
    }
    if spec.series != (("", {}),):
        out["sweep"]["series"] = [{"label": l, "rates": dict(r)} for l, r in spec.series]
    return out


def dump_yaml(doc: Mapping) -> str:
    return yaml.safe_dump(_plain(dict(doc)), sort_keys=False, default_flow_style=False)
