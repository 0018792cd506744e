"""Command-line front end: ``laacoex {solve,simulate,sweep,validate,presets}``.

Exit status: 0 on success, 1 when validation cells or sweep points fail,
2 on usage or configuration errors.

Every run that writes ``--out FILE`` also writes ``FILE.meta.yaml``.  That file
is itself a valid ``--config`` for the same subcommand, so re-running
``laacoex <cmd> --config FILE.meta.yaml --out OTHER`` reproduces ``FILE``
byte for byte.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import dump_yaml, load_config, scenario_to_dict, sweep_to_dict
from .des import RNG_ALGORITHM
from .errors import ConfigError, LaaCoexError
from .experiments import (
    ENGINES,
    PRESET_NAMES,
    ResultRow,
    Scenario,
    SimSettings,
    SweepSpec,
    preset,
    rows_to_csv,
    run_scenario,
    sweep,
    table1_scenario,
    validate_reference,
)
from .model import Scheme, SchemeConfig

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

RATE_FLAGS = {
    "lambda_l": "--lambda-l",
    "lambda_w": "--lambda-w",
    "mu_lu": "--mu-lu",
    "mu_w": "--mu-w",
    "mu_s": "--mu-s",
    "mu_on": "--mu-on",
    "mu_off": "--mu-off",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rate_arg(text: str):
    """Plain numbers become floats; anything else is kept as a 'k*rate' expression."""
    try:
        return float(text)
    except ValueError:
        return text


def _preset_epilog() -> str:
    lines = ["presets:"]
    for name in PRESET_NAMES:
        lines.append(f"  {name:<7} {preset(name).description}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run selection")
    g.add_argument("--config", metavar="FILE", help="YAML scenario or sweep file (see README)")
    g.add_argument("--preset", metavar="NAME", help=f"named preset: {', '.join(PRESET_NAMES)}")
    g.add_argument("--scheme", metavar="NAME", help="UFA, UTA, UFAB or UTAB (case-insensitive)")
    g = common.add_argument_group("model overrides (take precedence over file and preset values)")
    for name, flag in RATE_FLAGS.items():
        g.add_argument(flag, dest=name, metavar="RATE", type=_rate_arg, help=f"{name}: number or 'k*rate', e.g. 0.5*mu_w")
    g.add_argument("--q", dest="Q", type=int, metavar="N", help="LAA queue capacity Q")
    g.add_argument("--q-theta", dest="q_theta", type=int, metavar="N", help="buffer threshold (UFAB/UTAB)")
    g.add_argument("--d", dest="D", type=int, metavar="N", help="unlicensed channel count (analytic needs 1)")
    g = common.add_argument_group("run settings")
    g.add_argument("--seed", type=int, metavar="N", help="simulation seed (default 1)")
    g.add_argument("--sessions", type=int, metavar="N",
                   help="simulated arrivals (LAA + Wi-Fi); 0 skips simulation where optional")
    g.add_argument("--tolerance", type=float, metavar="X",
                   help="solver convergence alpha (solve/simulate/sweep, default 1e-6) or "
                        "analytic-cell tolerance (validate, default 1e-4)")
    g = common.add_argument_group("output")
    g.add_argument("--out", metavar="FILE", help="write results here (plus FILE.meta.yaml)")
    g.add_argument("--format", choices=("csv", "pretty"), default=None,
                   help="result format (default: pretty on stdout, csv for --out)")

    parser = _Parser(
        prog="laacoex",
        description="Analytic and simulated LAA/Wi-Fi coexistence dropping probabilities.",
        epilog=_preset_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, help_ in (
        ("solve", "stationary solution and dropping probabilities of one scenario"),
        ("simulate", "discrete-event simulation of one scenario"),
        ("sweep", "run a preset or configured parameter sweep"),
        ("validate", "compare both engines with the embedded reference table"),
        ("presets", "list the named presets"),
    ):
        sub.add_parser(name, parents=[common], help=help_, description=help_, epilog=_preset_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


# -- building the run from file, preset and flags -----------------------------------

def _apply_overrides(s: Scenario, args, engines=None) -> Scenario:
    rates = dict(s.rate_spec)
    for name in RATE_FLAGS:
        value = getattr(args, name)
        if value is not None:
            rates[name] = value
    cfg = s.scheme
    scheme = Scheme.parse(args.scheme) if args.scheme else cfg.scheme
    q_theta = args.q_theta if args.q_theta is not None else cfg.q_theta
    scheme_cfg = SchemeConfig(scheme, D=args.D if args.D is not None else cfg.D,
                              Q=args.Q if args.Q is not None else cfg.Q,
                              q_theta=q_theta, allow_full_threshold=cfg.allow_full_threshold)
    solver = s.solver if args.tolerance is None else replace(s.solver, alpha=args.tolerance)
    sim = SimSettings(sessions=args.sessions if args.sessions else s.sim.sessions,
                      seed=args.seed if args.seed is not None else s.sim.seed,
                      batches=s.sim.batches, overrides=s.sim.overrides)
    return replace(s, scheme=scheme_cfg, rate_spec=rates, solver=solver, sim=sim,
                   engines=engines or s.engines)


def _base_scenario(args) -> Scenario:
    if args.config and args.preset:
        raise ConfigError("--config and --preset are mutually exclusive")
    if args.config:
        loaded = load_config(args.config)
        if isinstance(loaded, SweepSpec):
            raise ConfigError(f"{args.config}: sweep file given to a single-scenario command (use 'sweep')")
        return loaded
    if args.preset:
        spec = preset(args.preset)
        base = spec.base
        if args.preset.lower() == "table1":
            base = table1_scenario("UFA", base.rate_spec["lambda_l"])
        return replace(base, name=args.preset.lower(), engines=("analytic",))
    if not args.scheme:
        raise ConfigError("--scheme: required without --config or --preset")
    missing = [RATE_FLAGS[n] for n in RATE_FLAGS if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"{missing[0]}: required without --config or --preset")
    scheme = Scheme.parse(args.scheme)
    return Scenario(name="cli", scheme=SchemeConfig(scheme, D=args.D or 1, Q=args.Q or 2,
                                                    q_theta=args.q_theta),
                    rate_spec={n: getattr(args, n) for n in RATE_FLAGS})


def _scenario_for(args, engines) -> Scenario:
    return _apply_overrides(_base_scenario(args), args, engines)


def _sweep_for(args) -> SweepSpec:
    if args.config and args.preset:
        raise ConfigError("--config and --preset are mutually exclusive")
    if args.config:
        spec = load_config(args.config)
        if isinstance(spec, Scenario):
            raise ConfigError(f"{args.config}: scenario file given to 'sweep' (set kind: sweep)")
        base = spec.base
    elif args.preset:
        spec = preset(args.preset, sessions=args.sessions or None, seed=args.seed)
        base = spec.base
    else:
        raise ConfigError("sweep needs --preset or --config")
    engines = base.engines
    if args.sessions == 0:
        engines = ("analytic",)
    elif args.sessions:
        engines = ENGINES
    new_base = _apply_overrides(base, args, engines)
    if args.scheme:
        return replace(spec, base=new_base, schemes=(Scheme.parse(args.scheme),))
    return replace(spec, base=new_base)


# -- output ---------------------------------------------------------------------

def _fmt(v, digits=6):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def _pretty_rows(rows) -> str:
    cols = ("scenario", "scheme", "axis_value", "p_bl_analytic", "p_bw_analytic", "p_bl_sim", "p_bw_sim",
            "ci_bl", "ci_bw", "err_bl_pct", "err_bw_pct")
    table = [cols] + [tuple(_fmt(getattr(r, c)) for c in cols) for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table) + "\n"


def _pretty_single(row: ResultRow) -> str:
    lines = [f"scheme: {row.scheme}"]
    if row.p_bl_analytic is not None:
        lines += [f"P_b,l = {row.p_bl_analytic:.6f}", f"P_b,w = {row.p_bw_analytic:.6f}",
                  f"iterations: {row.iterations}"]
    st = row.sim_stats
    if st is not None:
        lines += [f"P_b,l (sim) = {st.p_bl_hat:.6f} +/- {st.ci95_bl:.6f}",
                  f"P_b,w (sim) = {st.p_bw_hat:.6f} +/- {st.ci95_bw:.6f}",
                  f"LAA arrivals: {st.laa_arrivals}, dropped at full queue: {st.laa_drops}, "
                  f"other rejections: {st.laa_drops_total - st.laa_drops}",
                  f"Wi-Fi arrivals: {st.wifi_arrivals}, dropped with channels held by LAA: "
                  f"{st.wifi_drops_laa_occupied}, all drops: {st.wifi_drops_total}",
                  f"simulated time: {st.sim_time:.6f} s, events: {st.events}"]
        if row.err_bl_pct is not None:
            lines.append(f"relative error vs analytic: P_b,l {_fmt(row.err_bl_pct, 3)}%, "
                         f"P_b,w {_fmt(row.err_bw_pct, 3)}%")
    return "\n".join(lines) + "\n"


def _emit(args, command: str, body: str, meta: dict) -> None:
    meta_doc = dict(meta)
    meta_doc["run"] = {
        "command": command,
        "version": __version__,
        "format": args.format or ("csv" if args.out else "pretty"),
        "rng": RNG_ALGORITHM,
        **meta_doc.get("run", {}),
    }
    if args.out and "argv" not in meta_doc["run"]:
        meta_doc["run"]["argv"] = [command, "--config", f"{args.out}.meta.yaml",
                                   "--format", meta_doc["run"]["format"]]
    meta_text = dump_yaml(meta_doc)
    if args.out:
        out = Path(args.out)
        out.write_text(body, encoding="utf-8")
        Path(f"{out}.meta.yaml").write_text(meta_text, encoding="utf-8")
        print(f"wrote {out} and {out}.meta.yaml")
    else:
        sys.stdout.write(body)
        sys.stdout.write("\n# run metadata\n")
        sys.stdout.write("".join(f"# {line}\n" for line in meta_text.splitlines()))


def _cmd_single(args, command: str) -> int:
    engines = ("analytic",) if command == "solve" else ("simulation",)
    scenario = _scenario_for(args, engines)
    if command == "simulate" and args.sessions == 0:
        raise ConfigError("--sessions: must be >= 1 for simulate")
    row = run_scenario(scenario)
    fmt = args.format or ("csv" if args.out else "pretty")
    body = rows_to_csv([row]) if fmt == "csv" else _pretty_single(row)
    meta = scenario_to_dict(scenario)
    if command == "solve":
        meta.pop("simulation")
    _emit(args, command, body, meta)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = _sweep_for(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = sweep(spec)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    fmt = args.format or ("csv" if args.out else "pretty")
    body = rows_to_csv(result.rows) if fmt == "csv" else _pretty_rows(result.rows)
    _emit(args, "sweep", body, sweep_to_dict(spec))
    for name, scheme, value, message in result.failures:
        print(f"error: {name} {scheme} at {value}: {message}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAILED


def _cmd_validate(args) -> int:
    if args.config or args.preset or args.scheme or any(getattr(args, n) is not None for n in RATE_FLAGS) \
            or args.Q is not None or args.q_theta is not None or args.D is not None:
        raise ConfigError("validate takes only --sessions, --seed, --tolerance, --out and --format")
    sessions = 1_000_000 if args.sessions is None else args.sessions
    if sessions < 0:
        raise ConfigError("--sessions: must be >= 0")
    seed = 1 if args.seed is None else args.seed
    tol = 1e-4 if args.tolerance is None else args.tolerance
    report = validate_reference(sessions=sessions, seed=seed, analytic_tol=tol)
    fmt = args.format or ("csv" if args.out else "pretty")
    if fmt == "csv":
        lines = ["kind,scheme,metric,lambda_l,expected,actual,tolerance,result"]
        for c in report.checks:
            verdict = {True: "pass", False: "fail", None: "skip"}[c.passed]
            actual = "" if c.actual is None else repr(c.actual)
            lines.append(f"{c.kind},{c.scheme},{c.metric},{c.lambda_l!r},{c.expected!r},{actual},"
                         f"{c.tolerance!r},{verdict}")
        body = "\n".join(lines) + "\n"
    else:
        body = report.format() + "\n"
    meta = {"run": {"sessions": sessions, "seed": seed, "tolerance": tol,
                    "argv": ["validate", "--sessions", str(sessions), "--seed", str(seed),
                             "--tolerance", repr(tol), "--format", fmt]}}
    _emit(args, "validate", body, meta)
    return EXIT_OK if report.passed else EXIT_FAILED


def _cmd_presets(args) -> int:
    for name in PRESET_NAMES:
        spec = preset(name)
        schemes = ",".join(s.value for s in spec.schemes)
        print(f"{name:<7} {spec.size:>3} rows  axis={spec.axis:<8} schemes={schemes:<16} {spec.description}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("solve", "simulate"):
            return _cmd_single(args, args.command)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_presets(args)
    except ConfigError as exc:
        print(f"laacoex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LaaCoexError as exc:
        print(f"laacoex: run failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
