"""Command-line surface: argument parsing, run dispatch, artifact emission.

Six subcommands map onto the library layers:

    path         one clock realization (and a trajectory when a model is set)
    ml           evaluate the two-parameter-free Mittag-Leffler function
    moments      Monte Carlo check of the inverse-clock moment formulas
    convergence  coupled strong-error sweep over a step-size grid plus fit
    stability    mean-square decay curves against the contraction threshold
    validate     assumption sweep for a model on a deterministic grid

Every run writes a manifest.json holding the fully-resolved configuration;
rerunning `tcsde <command> --config manifest.json --out <dir>` reproduces
the CSV and JSON artifacts byte for byte.  Errors print one JSON object to
stderr and exit with status 2.
"""

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .clock import simulate_subordinator, BrownianDriver, invert_path
from .config import (COMMANDS, PRESETS, SLOW_PRESETS, RunConfig, emit, parse,
                     resolve)
from .errors import Error, ConfigError, ResourceError
from .experiments import (ClosedForm, FineGrid, MonteCarloConfig, fit_order,
                          moment_validation, stability_curve, strong_error)
from .models import GridSpec, validate_assumptions
from .rng import NOISE_STREAM, CLOCK_STREAM, substream
from .special_fn import mittag_leffler
from .svg import render_stability, render_strong_error
from .theta import SchemeConfig, integrate

_READOUT_POINTS = 1001  # t-grid size for the inverse-clock CSV


@dataclass(frozen=True)
class OutputBundle:
    """Paths of everything a run wrote, plus the in-memory summary."""

    csv_paths: tuple
    json_summary_path: str
    manifest_path: str
    svg_paths: tuple
    summary: dict


def _fmt(x):
    """CSV cell: 17 significant digits for floats, empty for None."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.17g" % float(x)


def _write_csv(path, header, rows):
    with io.open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def _json_safe(obj):
    """Recursively convert numpy scalars/arrays; stringify non-finite floats."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(path, payload):
    with io.open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(_json_safe(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _mc_config(config):
    mc = config.mc
    return MonteCarloConfig(n_paths=mc["n_paths"],
                            master_seed=mc["master_seed"],
                            max_concurrency=mc["max_concurrency"])


def _prepare_out_dir(config):
    out_dir = config.output["dir"]
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise ResourceError(f"output directory {out_dir!r} not writable: {exc}")
    return out_dir


def _emit_manifest(config, out_dir):
    resolved = RunConfig(command=config.command, preset=config.preset,
                         model=config.model, run=config.run, mc=config.mc,
                         output=config.output,
                         provenance={"package_version": __version__})
    path = os.path.join(out_dir, "manifest.json")
    with io.open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(emit(resolved))
    return path


def _run_path(config, out_dir, echo):
    run = config.run
    seed = config.mc["master_seed"]
    clock_rng = substream(seed, 0, CLOCK_STREAM)
    sub = simulate_subordinator(run["alpha"], run["delta"], run["horizon"],
                                clock_rng)
    n = sub.values.shape[0]
    sub_path = os.path.join(out_dir, "subordinator.csv")
    _write_csv(sub_path, ("n", "n_delta", "D_value"),
               [(i, i * run["delta"], sub.values[i]) for i in range(n)])
    ts = np.linspace(0.0, run["horizon"], _READOUT_POINTS)
    et = invert_path(sub, ts)
    inv_path = os.path.join(out_dir, "inverse_clock.csv")
    _write_csv(inv_path, ("t", "E_tilde"), zip(ts, et))
    csvs = [sub_path, inv_path]
    summary = {"alpha": run["alpha"], "delta": run["delta"],
               "horizon": run["horizon"], "n_clock_steps": sub.n_complete,
               "clock_at_horizon": float(et[-1])}
    model = config.build_model()
    if model is not None:
        driver = BrownianDriver.sample(sub.n_complete, run["delta"],
                                       substream(seed, 0, NOISE_STREAM))
        scheme = SchemeConfig(theta=run["theta"], delta=run["delta"],
                              horizon=run["horizon"])
        record = integrate(model, scheme, sub, driver, with_fbem=True)
        rows = []
        for i in range(record.tau.shape[0]):
            # newton_iters[k] counts the solve producing x_{k+1}; the
            # initial point has none
            iters = None
            if record.newton_iters is not None and i > 0:
                iters = record.newton_iters[i - 1]
            rows.append((i, record.tau[i], record.x_st[i],
                         None if record.x_fbem is None else record.x_fbem[i],
                         iters))
        traj_path = os.path.join(out_dir, "trajectory.csv")
        _write_csv(traj_path, ("n", "tau_n", "x_st", "x_fbem", "newton_iters"),
                   rows)
        csvs.append(traj_path)
        summary["model"] = model.name
        summary["theta"] = run["theta"]
        summary["x_final"] = float(record.x_st[-1])
        summary["n_scheme_steps"] = record.n_steps
        summary["delta_warning"] = record.delta_warning
    echo(f"clock: {sub.n_complete} complete steps to horizon "
         f"{run['horizon']:g}")
    return csvs, [], summary


def _run_ml(config, out_dir, echo):
    run = config.run
    value = mittag_leffler(run["alpha"], run["z"])
    echo(f"E_{run['alpha']:g}({run['z']:g}) = {value!r}")
    return [], [], {"alpha": run["alpha"], "z": run["z"], "value": value}


def _run_moments(config, out_dir, echo):
    run = config.run
    report = moment_validation(run["alpha"], run["p_list"], run["t_list"],
                               run["delta"], _mc_config(config))
    path = os.path.join(out_dir, "moments.csv")
    _write_csv(path, ("p", "t", "empirical", "formula", "zscore"),
               [(r.p, r.t, r.empirical, r.formula, r.zscore)
                for r in report.rows])
    for r in report.rows:
        verdict = "ok" if r.passed else "FAIL"
        echo(f"[{verdict}] p={r.p} t={r.t:g} empirical={r.empirical:.6g} "
             f"formula={r.formula:.6g} z={r.zscore:+.2f}")
    summary = {"alpha": report.alpha, "delta": report.delta,
               "n_paths": report.n_paths, "master_seed": report.master_seed,
               "all_passed": report.all_passed,
               "rows": [{"p": r.p, "t": r.t, "empirical": r.empirical,
                         "formula": r.formula, "se": r.se,
                         "zscore": r.zscore,
                         "bias_allowance": r.bias_allowance,
                         "passed": r.passed} for r in report.rows]}
    return [path], [], summary


def _run_convergence(config, out_dir, echo):
    run = config.run
    model = config.build_model()
    reference = None
    if run["delta_ref"] is not None:
        make_ref = ClosedForm if model.exact_solution is not None else FineGrid
        reference = make_ref(run["delta_ref"])
    report = strong_error(model, run["alpha"], run["theta"],
                          run["delta_grid"], run["horizon"],
                          _mc_config(config), reference=reference)
    fit = fit_order(report)
    se_path = os.path.join(out_dir, "strong_error.csv")
    _write_csv(se_path, ("delta", "mse", "se", "n_eff"),
               [(r.delta, r.mse, r.se, r.n_eff) for r in report.rows])
    fit_path = os.path.join(out_dir, "convergence.csv")
    _write_csv(fit_path, ("slope", "intercept", "r2"),
               [(fit.slope, fit.intercept, fit.r2)])
    echo(f"fitted strong order {fit.slope:.4f} (target alpha/2 = "
         f"{run['alpha'] / 2.0:.4f}), r2 = {fit.r2:.4f}")
    svgs = []
    if config.output["svg"]:
        svg_path = os.path.join(out_dir, "strong_error.svg")
        with io.open(svg_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(render_strong_error(report, fit))
        svgs.append(svg_path)
    summary = {"model": report.model_name, "alpha": report.alpha,
               "theta": report.theta, "horizon": report.horizon,
               "reference": report.reference, "delta_ref": report.delta_ref,
               "n_paths": report.n_paths, "master_seed": report.master_seed,
               "n_failed": report.n_failed,
               "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2,
               "rows": [{"delta": r.delta, "mse": r.mse, "se": r.se,
                         "n_eff": r.n_eff} for r in report.rows]}
    return [se_path, fit_path], svgs, summary


def _run_stability(config, out_dir, echo):
    run = config.run
    model = config.build_model()
    mc = _mc_config(config)
    csvs, svgs, verdicts = [], [], []
    for theta in run["theta_list"]:
        for delta in run["delta_list"]:
            n_steps = max(1, int(round(run["internal_horizon"] / delta)))
            curve = stability_curve(model, run["alpha"], theta, delta,
                                    n_steps, mc)
            th = curve.threshold
            tag = f"theta{theta:g}_delta{delta:g}".replace(".", "p")
            path = os.path.join(out_dir, f"stability_{tag}.csv")
            rows = []
            for i in range(curve.times.shape[0]):
                rows.append((curve.times[i], curve.msq[i],
                             None if curve.envelope is None
                             else curve.envelope[i],
                             None if th is None else th.phi,
                             None if th is None else th.gamma))
            _write_csv(path, ("t", "msq", "envelope", "phi", "gamma"), rows)
            csvs.append(path)
            verdict = {"theta": theta, "delta": delta,
                       "stable_empirical": curve.stable_empirical,
                       "diverged_at": curve.diverged_at,
                       "n_failed": curve.n_failed}
            flag = "decays " if curve.stable_empirical else "DIVERGES"
            extra = ""
            if th is not None:
                verdict.update({"phi": th.phi, "delta_max": th.delta_max,
                                "stable_theory": th.stable,
                                "gamma": th.gamma})
                extra = (f"  phi={th.phi:+.4g} "
                         f"{'within' if th.stable else 'OUTSIDE'} threshold")
            echo(f"theta={theta:g} delta={delta:g}: {flag}{extra}")
            verdicts.append(verdict)
            if config.output["svg"]:
                svg_path = os.path.join(out_dir, f"stability_{tag}.svg")
                with io.open(svg_path, "w", encoding="ascii",
                             newline="\n") as fh:
                    fh.write(render_stability(curve))
                svgs.append(svg_path)
    summary = {"model": model.name, "alpha": run["alpha"],
               "internal_horizon": run["internal_horizon"],
               "n_paths": mc.n_paths, "master_seed": mc.master_seed,
               "curves": verdicts}
    return csvs, svgs, summary


def _run_validate(config, out_dir, echo):
    run = config.run
    model = config.build_model()
    grid = GridSpec(t_max=run["t_max"], x_max=run["x_max"],
                    n_t=run["n_t"], n_x=run["n_x"])
    checks = run["checks"]
    report = validate_assumptions(model, grid=grid, checks=checks)
    for c in report.checks:
        verdict = "ok" if c.satisfied else "FAIL"
        where = "" if c.location is None else f"  at {c.location}"
        echo(f"[{verdict}] {c.name}  margin={c.margin:.3g}{where}")
    summary = {"model": model.name, "ok": report.ok,
               "checks": [{"name": c.name, "satisfied": c.satisfied,
                           "margin": c.margin,
                           "location": None if c.location is None
                           else list(c.location)}
                          for c in report.checks]}
    return [], [], summary


_RUNNERS = {"path": _run_path, "ml": _run_ml, "moments": _run_moments,
            "convergence": _run_convergence, "stability": _run_stability,
            "validate": _run_validate}


def run(config, echo=None):
    """Execute a resolved configuration; returns an OutputBundle."""
    if echo is None:
        def echo(line):
            print(line)
    out_dir = _prepare_out_dir(config)
    if config.preset in SLOW_PRESETS:
        print(f"preset {config.preset!r} runs at full experiment scale; "
              "expect minutes to hours depending on the command",
              file=sys.stderr)
    csvs, svgs, summary = _RUNNERS[config.command](config, out_dir, echo)
    payload = {"schema_version": "1", "package_version": __version__,
               "command": config.command, "master_seed": config.mc["master_seed"],
               "summary": summary}
    summary_path = os.path.join(out_dir, "summary.json")
    _write_json(summary_path, payload)
    manifest_path = _emit_manifest(config, out_dir)
    return OutputBundle(csv_paths=tuple(csvs), json_summary_path=summary_path,
                        manifest_path=manifest_path, svg_paths=tuple(svgs),
                        summary=payload)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, "
                                         f"got {text!r}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, "
                                         f"got {text!r}")


def _add_common(p):
    p.add_argument("--config", metavar="FILE",
                   help="JSON run document; flags override its values")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                   help="experiment scale (default: desk)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--svg", action="store_true", default=None,
                   help="also render SVG figures")
    p.add_argument("--paths", type=int, metavar="N",
                   help="Monte Carlo sample size")
    p.add_argument("--seed", type=int, metavar="S", help="master seed")
    p.add_argument("--workers", type=int, metavar="W",
                   help="max worker processes")
    p.add_argument("--model", metavar="NAME",
                   help="builtin model name (catalog: see README)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tcsde",
        description="Stochastic-theta integration driven by inverse "
                    "alpha-stable clocks: paths, moment checks, strong "
                    "convergence, and mean-square stability.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("path", help="simulate one clock (and trajectory)")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--theta", type=float)

    p = sub.add_parser("ml", help="evaluate E_alpha(z)")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--z", type=float)

    p = sub.add_parser("moments", help="check inverse-clock moment formulas")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--p-list", type=_int_list, metavar="P1,P2,...")
    p.add_argument("--t-list", type=_float_list, metavar="T1,T2,...")

    p = sub.add_parser("convergence", help="strong-error sweep and order fit")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--delta-grid", type=_float_list, metavar="D1,D2,...")
    p.add_argument("--horizon", type=float)
    p.add_argument("--delta-ref", type=float)

    p = sub.add_parser("stability", help="mean-square decay curves")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta-list", type=_float_list, metavar="T1,T2,...")
    p.add_argument("--delta-list", type=_float_list, metavar="D1,D2,...")
    p.add_argument("--internal-horizon", type=float)

    p = sub.add_parser("validate", help="sweep model assumption checks")
    _add_common(p)
    p.add_argument("--t-max", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--n-t", type=int)
    p.add_argument("--n-x", type=int)
    p.add_argument("--checks", metavar="C1,C2,...",
                   type=lambda s: [x.strip() for x in s.split(",") if x.strip()])
    return parser


_RUN_FLAGS = {
    "path": ("alpha", "delta", "horizon", "theta"),
    "ml": ("alpha", "z"),
    "moments": ("alpha", "delta", "p_list", "t_list"),
    "convergence": ("alpha", "theta", "delta_grid", "horizon", "delta_ref"),
    "stability": ("alpha", "theta_list", "delta_list", "internal_horizon"),
    "validate": ("t_max", "x_max", "n_t", "n_x", "checks"),
}


def _overrides_from_args(args):
    over = {}
    run = {}
    for key in _RUN_FLAGS[args.command]:
        v = getattr(args, key, None)
        if v is not None:
            run[key] = v
    if run:
        over["run"] = run
    mc = {}
    if args.paths is not None:
        mc["n_paths"] = args.paths
    if args.seed is not None:
        mc["master_seed"] = args.seed
    if args.workers is not None:
        mc["max_concurrency"] = args.workers
    if mc:
        over["mc"] = mc
    output = {}
    if args.out is not None:
        output["dir"] = args.out
    if args.svg is not None:
        output["svg"] = bool(args.svg)
    if output:
        over["output"] = output
    if args.model is not None:
        over["model"] = {"name": args.model}
    return over


def load_effective_config(args):
    """defaults < preset < config file < flags, then full validation."""
    file_data = None
    preset = args.preset
    if args.config is not None:
        try:
            with io.open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}", key="config")
        file_cfg = parse(text)
        if file_cfg.command != args.command:
            raise ConfigError(
                f"config file is for command {file_cfg.command!r}, "
                f"invoked as {args.command!r}", key="command")
        file_data = file_cfg.to_dict()
        if preset is None:
            preset = file_cfg.preset
    if preset is None:
        preset = "desk"
    return resolve(args.command, preset=preset, file_data=file_data,
                   overrides=_overrides_from_args(args))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_effective_config(args)
        run(config)
    except Error as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        key = getattr(exc, "key", None)
        if key is not None:
            payload["key"] = key
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
