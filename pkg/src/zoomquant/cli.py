"""Command-line front end.

Subcommands::

    zoomquant min-levels --config exp.ini [--out DIR] [--format csv|json]
    zoomquant certify    --config exp.ini [--out DIR] [--format csv|json]
    zoomquant simulate   --config exp.ini --out DIR
    zoomquant batch      --config a.ini --config b.ini ... --out DIR

Exit codes: 0 success, 2 quantizer overflow, 3 infeasible design,
4 configuration error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import export, svgplot
from .config import format_config, load_config
from .errors import (
    ConditioningError,
    ConfigError,
    DimensionError,
    InfeasibleRateError,
    ObservabilityError,
    PreconditionError,
    RankError,
    SolverError,
)
from .experiment import level_table, prepare
from .schedule import InfeasibleLevels, full_F
from .simulator import SimConfig, intersample_trajectory, simulate

EXIT_OK = 0
EXIT_OVERFLOW = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4

INFEASIBLE = (
    InfeasibleRateError,
    InfeasibleLevels,
    ObservabilityError,
    ConditioningError,
    PreconditionError,
    RankError,
    SolverError,
)

# Published values for the pendulum benchmark at h = 0.03, shown beside ours.
_PENDULUM_SIZES = {
    "configured_observer": 25,
    "deadbeat_observer": 16,
    "pseudo_inverse_observer": 16,
    "state_encoding": 256,
}
REFERENCE_SIZES = {
    ("inverted_pendulum", 0.03): _PENDULUM_SIZES,
    ("inverted_pendulum_2out", 0.03): _PENDULUM_SIZES,
}
REFERENCE_RF = {key: 0.8845 for key in REFERENCE_SIZES}


class _Parser(argparse.ArgumentParser):
    """argparse with the configuration-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", required=True, metavar="PATH")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--seed", type=int, default=None, help="reserved; runs are deterministic")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = _Parser(prog="zoomquant", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("min-levels", parents=[common], help="minimal quantization levels")
    sub.add_parser("certify", parents=[common], help="decay certificates and r(F)")
    sub.add_parser("simulate", parents=[common], help="closed-loop run with artifacts")
    sub.add_parser("batch", parents=[common], help="simulate several configs")
    return parser


def _reference(cfg, table):
    if cfg.plant_name is None:
        return None
    return table.get((cfg.plant_name, round(cfg.h, 12)))


def _emit(report, header, rows, args, stem, stdout):
    """Print ``report`` and optionally save it under ``--out``."""
    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True)
        print(text, file=stdout)
        if args.out:
            with open(os.path.join(args.out, stem + ".json"), "w") as fh:
                fh.write(text + "\n")
        return
    path = os.path.join(args.out, stem + ".csv") if args.out else None
    print(export.write_table_csv(path, header, rows), end="", file=stdout)


def cmd_min_levels(cfg, args, stdout):
    dp, rows = level_table(cfg)
    ref = _reference(cfg, REFERENCE_SIZES) or {}
    out = []
    for method, N, size, exponent in rows:
        out.append([method, N, exponent, size, ref.get(method, "")])
    header = ["method", "N", "exponent", "size", "reference_size"]
    report = {
        "h": cfg.h,
        "n": dp.n,
        "p": dp.p,
        "m": dp.m,
        "rows": [dict(zip(header, r)) for r in out],
    }
    _emit(report, header, out, args, "min_levels", stdout)
    return EXIT_OK


def _certify_report(cfg, exp):
    sched = exp.schedule
    report = {"protocol": cfg.protocol, "levels": list(exp.levels), "rF": sched.rF}
    if cfg.protocol == "full":
        report.update(exp.certificates.as_dict())
        report["F"] = full_F(exp.certificates, *exp.levels).tolist()
    elif cfg.protocol == "output_only_general":
        report.update(
            M0=exp.certificates["M0"].M,
            M=exp.certificates["M"].M,
            rho=exp.certificates["M"].rho,
            F=sched.F.tolist(),
        )
    else:
        report.update(alpha=[float(a) for a in sched.constants["alpha"]], F=sched.F.tolist())
    report["contractive"] = bool(sched.contractive)
    ref = _reference(cfg, REFERENCE_RF)
    if ref is not None and cfg.protocol == "full":
        report["reference_rF"] = ref
    return report


def cmd_certify(cfg, args, stdout):
    exp = prepare(cfg)
    report = _certify_report(cfg, exp)
    rows = []
    for key in sorted(report):
        value = report[key]
        if isinstance(value, (list, tuple)):
            value = " ".join(export.fmt(v) for v in np.ravel(value))
        elif not isinstance(value, str):
            value = export.fmt(value)
        rows.append([key, value])
    _emit(report, ["quantity", "value"], rows, args, "certify", stdout)
    return EXIT_OK if report["contractive"] else EXIT_INFEASIBLE


def _plot_series(cfg, exp, sim, trace):
    data = {
        name: trace.column(attr)
        for name, attr in (("E", "E"), ("E1", "E1"), ("E2", "E2"))
    }
    n, p, m = exp.dp.n, exp.dp.p, exp.dp.m
    for i in range(n):
        data[f"x{i}"] = trace.column("x")[:, i] if len(trace) else np.array([])
        data[f"xhat{i}"] = trace.column("xhat")[:, i] if len(trace) else np.array([])
    for i in range(p):
        data[f"y{i}"] = trace.column("y")[:, i] if len(trace) else np.array([])
    for i in range(m):
        data[f"u{i}"] = trace.column("u_applied")[:, i] if len(trace) else np.array([])
    t_dense, X = intersample_trajectory(sim, trace)
    t = trace.column("t")
    series = {}
    for name in cfg.plot_signals:
        if name not in data:
            raise ConfigError(f"unknown plot signal {name!r}")
        if name.startswith("x") and not name.startswith("xhat") and X.size:
            series[name] = (t_dense, X[:, int(name[1:])])
        else:
            series[name] = (t, data[name])
    return series


def _render(series, title):
    # panels share the densest grid; sampled signals are held between samples
    t_all = max((s[0] for s in series.values()), key=len)
    aligned = {}
    for name, (t, v) in series.items():
        if len(t) == len(t_all) or not len(t):
            aligned[name] = v
        else:
            idx = np.clip(np.searchsorted(t, t_all, side="right") - 1, 0, len(t) - 1)
            aligned[name] = np.asarray(v)[idx]
    return svgplot.line_plot(t_all, aligned, title=title)


def run_simulation(cfg, out_dir):
    """Run one configured simulation and write its artifacts.

    Returns ``(exit_code, experiment, trace)``.
    """
    if cfg.E_st is None or cfg.x0 is None:
        raise ConfigError("simulate needs simulation.E_st and simulation.x0")
    exp = prepare(cfg)
    if len(cfg.x0) != exp.dp.n:
        raise ConfigError(f"x0 needs {exp.dp.n} entries, got {len(cfg.x0)}")
    sim = SimConfig(
        exp.dp,
        exp.gains,
        exp.schedule,
        cfg.x0,
        cfg.E_st,
        k_max=cfg.k_max,
        cp=exp.cp,
        substeps=cfg.substeps,
    )
    trace = simulate(sim)
    os.makedirs(out_dir, exist_ok=True)
    header_lines = format_config(cfg).splitlines()
    with open(os.path.join(out_dir, "run.ini"), "w") as fh:
        fh.write(format_config(cfg))
    export.write_trace_csv(os.path.join(out_dir, cfg.trace_file), trace, exp.dp, header_lines)
    export.write_schedule_csv(os.path.join(out_dir, cfg.schedule_file), exp.schedule)
    export.write_symbols(os.path.join(out_dir, cfg.symbols_file), trace)
    series = _plot_series(cfg, exp, sim, trace)
    title = f"{cfg.protocol}, levels {exp.levels}, r(F) = {exp.schedule.rF:.4f}"
    svgplot.save(os.path.join(out_dir, cfg.plot_file), _render(series, title))
    if trace.overflow:
        print(f"overflow: {trace.diagnostic}", file=sys.stderr)
        return EXIT_OVERFLOW, exp, trace
    return EXIT_OK, exp, trace


def cmd_simulate(cfg, args, stdout):
    if not args.out:
        raise ConfigError("simulate needs --out")
    code, exp, trace = run_simulation(cfg, args.out)
    last = trace[-1]
    print(
        f"steps={len(trace)} overflow={int(trace.overflow)} levels={exp.levels} "
        f"rF={exp.schedule.rF:.6g} final_state_norm={np.max(np.abs(last.x)):.3e}",
        file=stdout,
    )
    return code


def cmd_batch(paths, args, stdout):
    if not args.out:
        raise ConfigError("batch needs --out")
    rows, worst = [], EXIT_OK
    for path in paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        try:
            cfg = load_config(path)
            code, exp, trace = run_simulation(cfg, os.path.join(args.out, stem))
            rows.append([stem, code, len(trace), int(trace.overflow), exp.schedule.rF])
        except (ConfigError, DimensionError) as exc:
            code = EXIT_CONFIG
            rows.append([stem, code, 0, 0, float("nan")])
            print(f"{stem}: {exc}", file=sys.stderr)
        except INFEASIBLE as exc:
            code = EXIT_INFEASIBLE
            rows.append([stem, code, 0, 0, float("nan")])
            print(f"{stem}: {exc}", file=sys.stderr)
        worst = max(worst, code)
    header = ["config", "exit", "steps", "overflow", "rF"]
    os.makedirs(args.out, exist_ok=True)
    report = {"runs": [dict(zip(header, r)) for r in rows]}
    _emit(report, header, rows, args, "batch", stdout)
    return worst


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.out:
            os.makedirs(args.out, exist_ok=True)
        if args.command == "batch":
            return cmd_batch(args.config, args, stdout)
        if len(args.config) != 1:
            raise ConfigError(f"{args.command} takes exactly one --config")
        cfg = load_config(args.config[0])
        handler = {
            "min-levels": cmd_min_levels,
            "certify": cmd_certify,
            "simulate": cmd_simulate,
        }[args.command]
        return handler(cfg, args, stdout)
    except (ConfigError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except INFEASIBLE as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
