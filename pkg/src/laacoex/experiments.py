"""Scenarios, parameter sweeps, figure presets and reference validation.

Rates are written as plain numbers or as multiples of another rate
(``"0.5*mu_w"``, ``"mu_lu"``); :func:`resolve_rates` turns such a mapping into
absolute :class:`~laacoex.model.RateParams` before anything runs.
"""
from __future__ import annotations

import csv
import io
import math
import re
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .des import DistributionSpec, SimConfig, SimStats, run as run_simulation
from .errors import ConfigError, LaaCoexError, ScenarioError
from .model import RateParams, Scheme, SchemeConfig
from .reference import load_table1
from .solver import SolverSettings, dropping_probabilities, solve_iterative
from .stats import relative_error_pct

__all__ = [
    "RATE_NAMES",
    "AXES",
    "CSV_HEADER",
    "resolve_rates",
    "SimSettings",
    "Scenario",
    "SweepSpec",
    "ResultRow",
    "SweepResult",
    "CellCheck",
    "ValidationReport",
    "run_scenario",
    "sweep",
    "validate_reference",
    "table1_scenario",
    "PRESETS",
    "PRESET_NAMES",
    "preset",
    "rows_to_csv",
]

RATE_NAMES = ("lambda_l", "lambda_w", "mu_lu", "mu_w", "mu_s", "mu_on", "mu_off")
AXES = ("Q", "q_theta") + RATE_NAMES + ("on_off",)
ENGINES = ("analytic", "simulation")
CSV_HEADER = (
    "scenario", "scheme", "axis", "axis_value", "p_bl_analytic", "p_bw_analytic",
    "p_bl_sim", "p_bw_sim", "ci_bl", "ci_bw", "err_bl_pct", "err_bw_pct", "seed",
)

_EXPR = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*\s*)?([a-z_]+)\s*$")


def _parse_rate(name: str, value):
    """``(coefficient, reference)``; reference is None for absolute numbers."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number or 'k*rate' expression, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value), None
    if isinstance(value, str):
        try:
            return float(value), None
        except ValueError:
            pass
        m = _EXPR.match(value)
        if m and m.group(2) in RATE_NAMES:
            try:
                k = float(m.group(1)) if m.group(1) else 1.0
            except ValueError:
                k = None
            if k is not None and math.isfinite(k):
                return k, m.group(2)
    raise ConfigError(f"{name}: expected a number or 'k*rate' expression, got {value!r}")


def resolve_rates(spec: Mapping[str, object]) -> RateParams:
    """Resolve absolute values and ``k*other_rate`` expressions into :class:`RateParams`."""
    unknown = set(spec) - set(RATE_NAMES)
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown rate (expected one of {', '.join(RATE_NAMES)})")
    missing = [n for n in RATE_NAMES if n not in spec]
    if missing:
        raise ConfigError(f"{missing[0]}: rate not specified")
    parsed = {n: _parse_rate(n, spec[n]) for n in RATE_NAMES}
    values: dict[str, float] = {}

    def value_of(name, trail=()):
        if name in values:
            return values[name]
        if name in trail:
            raise ConfigError(f"{name}: circular rate expression via {' -> '.join(trail + (name,))}")
        k, ref = parsed[name]
        v = k if ref is None else k * value_of(ref, trail + (name,))
        values[name] = v
        return v

    return RateParams(**{n: value_of(n) for n in RATE_NAMES})


@dataclass(frozen=True)
class SimSettings:
    sessions: int = 1_000_000
    seed: int = 1
    batches: int = 10
    overrides: Mapping[str, DistributionSpec] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.sessions, int) or self.sessions < 1:
            raise ConfigError(f"sessions: must be an integer >= 1, got {self.sessions!r}")
        if not isinstance(self.batches, int) or self.batches < 2:
            raise ConfigError(f"batches: must be an integer >= 2, got {self.batches!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be an integer in [0, 2**64), got {self.seed!r}")


@dataclass(frozen=True)
class Scenario:
    """One fully specified run: scheme, rates (possibly relative), solver and simulator settings."""

    name: str
    scheme: SchemeConfig
    rate_spec: Mapping[str, object]
    solver: SolverSettings = SolverSettings()
    sim: SimSettings = SimSettings()
    engines: tuple[str, ...] = ("analytic",)
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        engines = tuple(e for e in ENGINES if e in self.engines)
        bad = set(self.engines) - set(ENGINES)
        if bad or not engines:
            raise ConfigError(f"engines: expected a non-empty subset of {ENGINES}, got {self.engines!r}")
        object.__setattr__(self, "engines", engines)
        object.__setattr__(self, "rate_spec", dict(self.rate_spec))
        self.rates  # validate eagerly

    @property
    def rates(self) -> RateParams:
        return resolve_rates(self.rate_spec)

    def sim_config(self, trace: bool = False) -> SimConfig:
        return SimConfig(self.scheme, self.rates, sessions=self.sim.sessions, seed=self.sim.seed,
                         batches=self.sim.batches, overrides=dict(self.sim.overrides), trace=trace)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    scheme: str
    axis: str = ""
    axis_value: object = ""
    p_bl_analytic: float | None = None
    p_bw_analytic: float | None = None
    p_bl_sim: float | None = None
    p_bw_sim: float | None = None
    ci_bl: float | None = None
    ci_bw: float | None = None
    err_bl_pct: float | None = None
    err_bw_pct: float | None = None
    seed: int | None = None
    iterations: int | None = None
    meta: Mapping[str, object] = field(default_factory=dict)
    sim_stats: SimStats | None = field(default=None, repr=False, compare=False)

    def as_record(self) -> dict:
        return {k: getattr(self, k) for k in CSV_HEADER}


def run_scenario(s: Scenario, axis: str = "", axis_value: object = "") -> ResultRow:
    """Run the scenario's engines and collect one row; errors are re-raised as :class:`ScenarioError`."""
    try:
        a_bl = a_bw = iters = None
        if "analytic" in s.engines:
            dist, iters = solve_iterative(s.scheme, s.rates, s.solver)
            probs = dropping_probabilities(dist, s.scheme)
            a_bl, a_bw = probs.p_bl, probs.p_bw
        stats = None
        if "simulation" in s.engines:
            stats = run_simulation(s.sim_config())
    except LaaCoexError as exc:
        raise ScenarioError(s.name, exc) from exc
    row = dict(scenario=s.name, scheme=s.scheme.scheme.value, axis=axis, axis_value=axis_value,
               p_bl_analytic=a_bl, p_bw_analytic=a_bw, iterations=iters, meta=dict(s.meta))
    if stats is not None:
        row.update(p_bl_sim=stats.p_bl_hat, p_bw_sim=stats.p_bw_hat, ci_bl=stats.ci95_bl, ci_bw=stats.ci95_bw,
                   seed=s.sim.seed, sim_stats=stats)
        if a_bl is not None:
            row.update(err_bl_pct=relative_error_pct(stats.p_bl_hat, a_bl),
                       err_bw_pct=relative_error_pct(stats.p_bw_hat, a_bw))
    return ResultRow(**row)


# -- sweeps --------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep: ``schemes x series x values`` around a base scenario.

    ``series`` holds ``(label, rate overrides)`` pairs for the figure curves;
    a sweep without series has a single unlabeled curve.  ``allow_full_threshold``
    lets buffered points use ``q_theta == Q`` (figure presets only).
    """

    name: str
    base: Scenario
    axis: str
    values: tuple
    schemes: tuple[Scheme, ...]
    series: tuple[tuple[str, Mapping[str, object]], ...] = (("", {}),)
    allow_full_threshold: bool = False
    description: str = ""

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis: expected one of {', '.join(AXES)}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("values: sweep needs at least one axis value")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "schemes", tuple(Scheme.parse(s) for s in self.schemes))
        if not self.schemes:
            raise ConfigError("schemes: sweep needs at least one scheme")
        object.__setattr__(self, "series", tuple((str(l), dict(o)) for l, o in self.series) or (("", {}),))
        for label, overrides in self.series:
            bad = set(overrides) - set(RATE_NAMES)
            if bad:
                raise ConfigError(f"series.{label}: unknown rate {sorted(bad)[0]!r}")
        # validate every point up front so a bad axis value is a config error, not a run failure
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for key in self.keys():
                self.point(*key)

    def keys(self):
        """Point keys in output order: scheme, then series, then axis value."""
        return [(sch, si, vi) for sch in self.schemes for si in range(len(self.series))
                for vi in range(len(self.values))]

    def point(self, scheme: Scheme, series_index: int, value_index: int) -> Scenario:
        label, overrides = self.series[series_index]
        value = self.values[value_index]
        base = self.base
        rates = dict(base.rate_spec)
        rates.update(overrides)
        Q = base.scheme.Q
        qt = base.scheme.q_theta if base.scheme.q_theta is not None else 1
        if self.axis == "Q":
            Q = int(value)
            qt = min(qt, Q)
        elif self.axis == "q_theta":
            qt = int(value)
        elif self.axis == "on_off":
            try:
                rates["mu_on"], rates["mu_off"] = value
            except (TypeError, ValueError):
                raise ConfigError(f"values: on_off axis needs (mu_on, mu_off) pairs, got {value!r}") from None
        else:
            rates[self.axis] = value
        scheme_cfg = SchemeConfig(scheme, D=base.scheme.D, Q=Q,
                                  q_theta=qt if scheme.buffered else None,
                                  allow_full_threshold=self.allow_full_threshold)
        name = f"{self.name}[{label}]" if label else self.name
        meta = dict(base.meta)
        if scheme.buffered:
            meta["q_theta"] = qt
        return replace(base, name=name, scheme=scheme_cfg, rate_spec=rates, meta=meta)

    @property
    def size(self) -> int:
        return len(self.schemes) * len(self.series) * len(self.values)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[ResultRow, ...]
    failures: tuple[tuple[str, str, object, str], ...]  # (scenario, scheme, axis value, message)

    @property
    def ok(self) -> bool:
        return not self.failures


def _format_axis_value(v):
    if isinstance(v, (tuple, list)):
        return "/".join(str(_format_axis_value(p)) for p in v)
    return v


def _run_point(spec: SweepSpec, key):
    scheme, si, vi = key
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scenario = spec.point(scheme, si, vi)
    value = _format_axis_value(spec.values[vi])
    try:
        return key, run_scenario(scenario, spec.axis, value), None
    except ScenarioError as exc:
        return key, None, (scenario.name, scheme.value, value, str(exc))


def sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every point; failures are collected rather than aborting the sweep.

    With ``workers > 1`` points run in separate processes; rows are always
    returned in key order regardless of completion order.
    """
    keys = spec.keys()
    for key in keys:
        if spec.allow_full_threshold and key[0].buffered:
            spec.point(*key)  # SchemeConfig warns for each relaxed threshold
    if workers > 1 and len(keys) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, [spec] * len(keys), keys))
    else:
        results = [_run_point(spec, k) for k in keys]
    order = {k: i for i, k in enumerate(keys)}
    results.sort(key=lambda r: order[r[0]])
    rows = tuple(r for _, r, _ in results if r is not None)
    failures = tuple(f for _, _, f in results if f is not None)
    return SweepResult(rows, failures)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
    return buf.getvalue()


# -- presets ---------------------------------------------------------------------

TABLE1_RATES = {"lambda_w": 5.0, "mu_lu": 25.0, "mu_w": 40.0, "mu_s": 1.0, "mu_on": 0.1, "mu_off": 0.1}
TABLE1_LAMBDAS = (25.0, 37.0, 50.0, 62.5, 120.0)
FIGURE_MU_W = 10.0


def table1_scenario(scheme: str, lambda_l: float, engines=("analytic",), sim: SimSettings | None = None,
                    solver: SolverSettings | None = None) -> Scenario:
    rates = dict(TABLE1_RATES, lambda_l=float(lambda_l))
    return Scenario(name="table1", scheme=SchemeConfig(Scheme.parse(scheme), D=1, Q=2), rate_spec=rates,
                    solver=solver or SolverSettings(), sim=sim or SimSettings(), engines=tuple(engines))


def _figure_base(name, rates, scheme=Scheme.UTA, Q=1, q_theta=None):
    rate_spec = {"mu_w": FIGURE_MU_W}
    rate_spec.update(rates)
    return Scenario(name=name, scheme=SchemeConfig(scheme, D=1, Q=Q, q_theta=q_theta), rate_spec=rate_spec)


# LAA arrival figure: lambda_w=0.5mu_w, mu_lu=mu_w, mu_on=mu_off=1, mu_s=10mu_on
_LAA_ARRIVAL_RATES = {"lambda_w": "0.5*mu_w", "mu_lu": "mu_w", "mu_on": 1.0, "mu_off": 1.0, "mu_s": "10*mu_on"}
# LAA service / Wi-Fi service figures: lambda_l=0.5mu_lu on top of the above
_LAA_SERVICE_RATES = dict(_LAA_ARRIVAL_RATES, lambda_l="0.5*mu_lu")
# queue-size and buffer-threshold comparisons
_COMPARE_RATES = {"lambda_l": "0.5*mu_w", "lambda_w": "0.5*mu_w", "mu_lu": "mu_w", "mu_on": "0.1*mu_w",
                  "mu_off": "0.1*mu_w", "mu_s": "mu_w"}


def _build_presets() -> dict[str, SweepSpec]:
    p: dict[str, SweepSpec] = {}
    q5 = tuple(range(1, 6))
    q8 = tuple(range(1, 9))
    laa_arrival = SweepSpec(
        name="fig4",
        base=_figure_base("fig4", dict(_LAA_ARRIVAL_RATES, lambda_l="mu_w")),
        axis="Q", values=q5, schemes=(Scheme.UTA,),
        series=(("lambda_l=1*mu_w", {"lambda_l": "1*mu_w"}), ("lambda_l=5*mu_w", {"lambda_l": "5*mu_w"}),
                ("lambda_l=10*mu_w", {"lambda_l": "10*mu_w"})),
        description="UTA, LAA arrival rate lambda_l in {1,5,10}*mu_w vs Q=1..5 "
                    "(lambda_w=0.5mu_w, mu_lu=mu_w, mu_on=mu_off=1, mu_s=10mu_on)",
    )
    p["fig4"] = laa_arrival
    p["fig5"] = replace(laa_arrival, name="fig5", base=replace(laa_arrival.base, name="fig5"),
                        description="same sweep as fig4 (LAA arrival rate)")
    p["fig6"] = SweepSpec(
        name="fig6",
        base=_figure_base("fig6", _LAA_SERVICE_RATES),
        axis="Q", values=q5, schemes=(Scheme.UTA,),
        series=tuple((f"mu_lu={k}*mu_w", {"mu_lu": f"{k}*mu_w"}) for k in ("0.5", "1", "2")),
        description="UTA, LAA service rate mu_lu in {0.5,1,2}*mu_w vs Q=1..5 (lambda_l=0.5mu_lu)",
    )
    p["fig7"] = SweepSpec(
        name="fig7",
        base=_figure_base("fig7", dict(_LAA_ARRIVAL_RATES, lambda_l="mu_w")),
        axis="Q", values=q5, schemes=(Scheme.UTA,),
        series=tuple((f"lambda_w={k}*mu_w", {"lambda_w": f"{k}*mu_w"}) for k in ("1", "5", "10")),
        description="UTA, Wi-Fi arrival rate lambda_w in {1,5,10}*mu_w vs Q=1..5 (lambda_l=mu_w)",
    )
    # Wi-Fi service sweep: LAA-side rates pinned at the mu_w=10 reference, only mu_w moves
    wifi_service_rates = {"lambda_l": 5.0, "lambda_w": 5.0, "mu_lu": 10.0, "mu_on": 1.0, "mu_off": 1.0,
                          "mu_s": "10*mu_on"}
    p["fig8"] = SweepSpec(
        name="fig8",
        base=_figure_base("fig8", wifi_service_rates),
        axis="Q", values=q8, schemes=(Scheme.UTA,),
        series=tuple((f"mu_w={k}", {"mu_w": float(k)}) for k in (5, 10, 20)),
        description="UTA, Wi-Fi service rate mu_w in {5,10,20} vs Q=1..8 (other rates fixed at mu_w=10 values)",
    )
    p["fig9"] = SweepSpec(
        name="fig9",
        base=_figure_base("fig9", {"lambda_l": "0.5*mu_w", "lambda_w": "0.5*mu_w", "mu_lu": "mu_w",
                                   "mu_on": "0.1*mu_s", "mu_off": "0.1*mu_s", "mu_s": 1.0}),
        axis="Q", values=q8, schemes=(Scheme.UTA,),
        series=tuple((f"mu_s={k}", {"mu_s": float(k)}) for k in ("0.1", "0.5", "1")),
        description="UTA, sensing rate mu_s in {0.1,0.5,1} vs Q=1..8 (mu_on=mu_off=0.1mu_s)",
    )
    p["fig10"] = SweepSpec(
        name="fig10",
        base=_figure_base("fig10", {"lambda_l": "0.5*mu_w", "lambda_w": "0.5*mu_w", "mu_lu": "mu_w",
                                    "mu_s": "mu_w", "mu_on": "0.1*mu_w", "mu_off": "0.1*mu_w"}),
        axis="Q", values=q5, schemes=(Scheme.UTA,),
        series=tuple((f"mu_on={a}*mu_w,mu_off={b}*mu_w", {"mu_on": f"{a}*mu_w", "mu_off": f"{b}*mu_w"})
                     for a, b in (("0.05", "0.2"), ("0.1", "0.1"), ("0.2", "0.05"))),
        description="UTA, ON/OFF rates (mu_on, mu_off) in {(0.05,0.2),(0.1,0.1),(0.2,0.05)}*mu_w vs Q=1..5",
    )
    p["fig11"] = SweepSpec(
        name="fig11",
        # buffered points take q_theta=min(2, Q)
        base=_figure_base("fig11", _COMPARE_RATES, scheme=Scheme.UTAB, Q=3, q_theta=2),
        axis="Q", values=tuple(range(1, 10)), schemes=tuple(Scheme),
        allow_full_threshold=True,
        description="all schemes vs Q=1..9; buffered schemes use q_theta=min(2, Q)",
    )
    p["fig12"] = SweepSpec(
        name="fig12",
        base=Scenario(name="fig12", scheme=SchemeConfig(Scheme.UTAB, D=1, Q=5, q_theta=1),
                      rate_spec=dict(_COMPARE_RATES, mu_w=FIGURE_MU_W)),
        axis="q_theta", values=tuple(range(1, 6)), schemes=(Scheme.UFAB, Scheme.UTAB),
        allow_full_threshold=True,
        description="UFAB and UTAB vs q_theta=1..5 at Q=5 (q_theta=5 relaxes the 1..Q-1 bound)",
    )
    return p


PRESETS: dict[str, SweepSpec] = _build_presets()
PRESET_NAMES = ("table1",) + tuple(PRESETS)


def preset(name: str, sessions: int | None = None, seed: int | None = None) -> SweepSpec:
    """A named sweep.  ``table1`` runs both engines; figure presets run the simulator only if ``sessions`` is given."""
    key = name.lower()
    if key == "table1":
        sim = SimSettings(sessions=sessions or 1_000_000, seed=1 if seed is None else seed)
        base = table1_scenario("UFA", TABLE1_LAMBDAS[0], engines=ENGINES, sim=sim)
        return SweepSpec(name="table1", base=base, axis="lambda_l", values=TABLE1_LAMBDAS,
                         schemes=(Scheme.UFA, Scheme.UTA),
                         description="UFA and UTA validation grid, lambda_l in {25,37,50,62.5,120}, "
                                     "lambda_w=5, mu_w=40, mu_lu=25, mu_s=1, mu_on=mu_off=0.1, Q=2")
    if key not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r} (known: {', '.join(PRESET_NAMES)})")
    spec = PRESETS[key]
    if sessions is not None or seed is not None:
        sim = SimSettings(sessions=sessions or spec.base.sim.sessions,
                          seed=spec.base.sim.seed if seed is None else seed)
        engines = ENGINES if sessions else spec.base.engines
        spec = replace(spec, base=replace(spec.base, sim=sim, engines=engines))
    return spec


# -- reference validation --------------------------------------------------------

@dataclass(frozen=True)
class CellCheck:
    kind: str            # "analytic", "simulation" or "error_pct"
    scheme: str
    metric: str
    lambda_l: float
    expected: float
    actual: float | None
    tolerance: float
    passed: bool | None  # None: not checked (flagged anomalous or skipped)
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CellCheck, ...]
    sessions: int
    seed: int
    engine_errors: tuple = ()  # (scheme, metric, lambda_l, sim-vs-analytic error %) from our own engines
    rows: tuple = field(default=(), repr=False, compare=False)  # the underlying ResultRows

    def of_kind(self, kind: str) -> tuple[CellCheck, ...]:
        return tuple(c for c in self.checks if c.kind == kind)

    @property
    def failures(self) -> tuple[CellCheck, ...]:
        return tuple(c for c in self.checks if c.passed is False)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> dict[str, tuple[int, int]]:
        out = {}
        for kind in ("analytic", "simulation", "error_pct"):
            judged = [c for c in self.of_kind(kind) if c.passed is not None]
            out[kind] = (sum(c.passed for c in judged), len(judged))
        return out

    def format(self) -> str:
        lines = [f"{'kind':<11} {'scheme':<5} {'metric':<5} {'lambda_l':>8} {'expected':>10} {'actual':>10} "
                 f"{'tol':>7}  result"]
        for c in self.checks:
            actual = "" if c.actual is None else f"{c.actual:.6f}"
            verdict = {True: "pass", False: "FAIL", None: "skip"}[c.passed]
            note = f"  ({c.note})" if c.note else ""
            lines.append(f"{c.kind:<11} {c.scheme:<5} {c.metric:<5} {c.lambda_l:>8g} {c.expected:>10.6f} "
                         f"{actual:>10} {c.tolerance:>7g}  {verdict}{note}")
        for kind, (ok, n) in self.summary().items():
            lines.append(f"{kind}: {ok}/{n} cells within tolerance")
        return "\n".join(lines)


def validate_reference(sessions: int = 1_000_000, seed: int = 1, analytic_tol: float = 1e-4,
                       sim_tol: float = 0.015, error_tol: float = 0.5, workers: int = 1,
                       solver: SolverSettings | None = None) -> ValidationReport:
    """Compare both engines against the embedded reference table.

    ``sessions=0`` skips the simulation cells.  Error-percentage cells are
    recomputed from the table's own analytic and simulated values; the
    sim-vs-analytic errors of this package's engines are attached separately.
    """
    table = load_table1()
    engines = ENGINES if sessions else ("analytic",)
    sim = SimSettings(sessions=sessions or 1, seed=seed)
    grid = SweepSpec(name="table1", base=table1_scenario("UFA", table.lambda_l[0], engines=engines, sim=sim,
                                                          solver=solver),
                     axis="lambda_l", values=table.lambda_l, schemes=tuple(Scheme.parse(s) for s in table.schemes))
    result = sweep(grid, workers=workers)
    if result.failures:
        raise LaaCoexError("; ".join(f[3] for f in result.failures))
    rows = {(r.scheme, float(r.axis_value)): r for r in result.rows}

    checks, engine_errors = [], []
    for cell in table.cells:
        row = rows[(cell.scheme, cell.lambda_l)]
        ours = getattr(row, f"{cell.metric}_analytic")
        checks.append(CellCheck("analytic", cell.scheme, cell.metric, cell.lambda_l, cell.analytic, ours,
                                analytic_tol, abs(ours - cell.analytic) <= analytic_tol))
    if sessions:
        for cell in table.cells:
            row = rows[(cell.scheme, cell.lambda_l)]
            ours = getattr(row, f"{cell.metric}_sim")
            checks.append(CellCheck("simulation", cell.scheme, cell.metric, cell.lambda_l, cell.simulation, ours,
                                    sim_tol, abs(ours - cell.simulation) <= sim_tol))
            engine_errors.append((cell.scheme, cell.metric, cell.lambda_l,
                                  relative_error_pct(ours, getattr(row, f"{cell.metric}_analytic"))))
    for cell in table.cells:
        recomputed = relative_error_pct(cell.simulation, cell.analytic)
        if cell.error_anomalous:
            checks.append(CellCheck("error_pct", cell.scheme, cell.metric, cell.lambda_l, cell.error_pct,
                                    recomputed, error_tol, None, "printed value inconsistent with its row"))
        else:
            checks.append(CellCheck("error_pct", cell.scheme, cell.metric, cell.lambda_l, cell.error_pct,
                                    recomputed, error_tol, abs(recomputed - cell.error_pct) <= error_tol))
    return ValidationReport(tuple(checks), sessions, seed, tuple(engine_errors), result.rows)
