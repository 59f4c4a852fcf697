"""Monte Carlo campaigns over the random-clock integrator.

Four campaign families:

* strong_error / fit_order: coupled common-random-number strong error at a
  final external time across a step-size grid, and the log-log regression
  estimating the empirical strong order.
* stability_curve: mean-square trajectories E|X_n|^2 on a fixed number of
  internal steps, with the theoretical contraction threshold and, when the
  contraction factor lies in (0, 1), a Mittag-Leffler decay envelope.
* moment_validation: empirical moments of the step-function inverse clock
  against the closed-form Gamma-ratio formulas.
* ml_envelope_check / exact_moment_bound_check: empirical trajectory
  functionals against Lyapunov-certificate envelopes and closed-form
  moment bounds.

Every path owns deterministic substreams keyed by (master_seed, path_index,
role), and aggregation is index-ordered, so campaign results are
bit-reproducible at any worker count.  Paths whose implicit solve fails are
excluded from aggregation; if more than 1% fail the campaign raises
:class:`TooManyFailedPaths`.
"""

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from .clock import (BrownianDriver, invert_path, sample_coupled,
                    simulate_subordinator, simulate_subordinator_steps)
from .errors import (ConfigError, DomainError, FitError, SolverError,
                     TooManyFailedPaths)
from .models import ModelDescriptor
from .rng import CLOCK_STREAM, NOISE_STREAM, substream
from .special_fn import (_as_alpha, exact_moment_bound, inverse_subordinator_moment,
                         mittag_leffler)
from .theta import SchemeConfig, StabilityThreshold, integrate, stability_threshold

__all__ = [
    "MonteCarloConfig",
    "ClosedForm",
    "FineGrid",
    "LyapunovCertificate",
    "StrongErrorRow",
    "StrongErrorReport",
    "ConvergenceReport",
    "StabilityCurve",
    "MomentRow",
    "MomentReport",
    "EnvelopeReport",
    "BoundRow",
    "BoundReport",
    "strong_error",
    "fit_order",
    "stability_curve",
    "moment_validation",
    "ml_envelope_check",
    "exact_moment_bound_check",
    "resolve_workers",
]

_FAILURE_BUDGET = 0.01


@dataclass(frozen=True)
class MonteCarloConfig:
    """Campaign size, master seed, and concurrency request.

    max_concurrency None means automatic (cpu count); the environment
    variable TCSDE_MAX_WORKERS caps the worker count either way.
    """

    n_paths: int
    master_seed: int = 123456789
    max_concurrency: int = None

    def __post_init__(self):
        if not isinstance(self.n_paths, int) or isinstance(self.n_paths, bool) \
                or self.n_paths < 2:
            raise DomainError(f"n_paths must be an integer >= 2, got {self.n_paths!r}")
        if not isinstance(self.master_seed, int) or isinstance(self.master_seed, bool) \
                or self.master_seed < 0:
            raise DomainError(
                f"master_seed must be a nonnegative integer, got {self.master_seed!r}")
        if self.max_concurrency is not None:
            if not isinstance(self.max_concurrency, int) \
                    or isinstance(self.max_concurrency, bool) or self.max_concurrency < 1:
                raise DomainError(
                    f"max_concurrency must be a positive integer or None, "
                    f"got {self.max_concurrency!r}")


def resolve_workers(mc, n_tasks):
    """Effective worker count for a campaign of n_tasks paths."""
    cap_env = os.environ.get("TCSDE_MAX_WORKERS", "").strip()
    cap = None
    if cap_env:
        try:
            cap = int(cap_env)
        except ValueError:
            raise ConfigError(
                f"TCSDE_MAX_WORKERS must be an integer, got {cap_env!r}",
                key="TCSDE_MAX_WORKERS") from None
        if cap < 1:
            raise ConfigError(
                f"TCSDE_MAX_WORKERS must be >= 1, got {cap}",
                key="TCSDE_MAX_WORKERS")
    w = mc.max_concurrency if mc.max_concurrency is not None else (os.cpu_count() or 1)
    if cap is not None:
        w = min(w, cap)
    return max(1, min(w, n_tasks))


def _map_paths(chunk_fn, args, n_paths, workers):
    """Run chunk_fn(args, start, stop) over [0, n_paths) and reassemble the
    per-path results in index order regardless of completion order."""
    if workers <= 1:
        return chunk_fn(args, 0, n_paths)
    out = [None] * n_paths
    chunk = max(1, -(-n_paths // (workers * 8)))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {}
        for start in range(0, n_paths, chunk):
            stop = min(start + chunk, n_paths)
            futures[pool.submit(chunk_fn, args, start, stop)] = (start, stop)
        for fut in as_completed(futures):
            start, stop = futures[fut]
            out[start:stop] = fut.result()
    return out


def _check_failures(results, n_paths):
    n_failed = sum(1 for r in results if r is None)
    if n_failed > _FAILURE_BUDGET * n_paths:
        raise TooManyFailedPaths(
            f"{n_failed} of {n_paths} paths failed their implicit solves "
            f"(budget {_FAILURE_BUDGET:.0%})")
    return n_failed


# --- strong error ------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    """Reference by the model's exact solution read on a fine clock."""

    delta_ref: float


@dataclass(frozen=True)
class FineGrid:
    """Reference by the same scheme run at a finer internal step."""

    delta_ref: float


@dataclass(frozen=True)
class StrongErrorRow:
    delta: float
    mse: float
    se: float
    n_eff: int


@dataclass(frozen=True)
class StrongErrorReport:
    model_name: str
    alpha: float
    theta: float
    horizon: float
    reference: str
    delta_ref: float
    n_paths: int
    master_seed: int
    n_failed: int
    rows: tuple


@dataclass(frozen=True)
class _StrongArgs:
    model: ModelDescriptor
    alpha: float
    theta: float
    ratios: tuple
    delta_ref: float
    horizon: float
    seed: int
    use_exact: bool
    solver_tol: float
    solver_max_iter: int
    bracket_cap: int


def _strong_one(args, i):
    crng = substream(args.seed, i, CLOCK_STREAM)
    nrng = substream(args.seed, i, NOISE_STREAM)
    cp = sample_coupled(args.alpha, args.delta_ref, args.horizon, args.ratios,
                        crng, nrng)
    fine = cp.fine_path()
    if args.use_exact:
        nf = fine.n_complete
        x_ref = args.model.exact_solution(nf * args.delta_ref,
                                          float(cp.b_values[nf]))
    else:
        driver = BrownianDriver(delta=args.delta_ref,
                                increments=np.diff(cp.b_values))
        cfg = SchemeConfig(theta=args.theta, delta=args.delta_ref,
                           horizon=args.horizon, solver_tol=args.solver_tol,
                           solver_max_iter=args.solver_max_iter,
                           bracket_cap=args.bracket_cap)
        x_ref = integrate(args.model, cfg, fine, driver).x_st[-1]
    errs = []
    for m in args.ratios:
        path, driver = cp.coarsen(m)
        cfg = SchemeConfig(theta=args.theta, delta=m * args.delta_ref,
                           horizon=args.horizon, solver_tol=args.solver_tol,
                           solver_max_iter=args.solver_max_iter,
                           bracket_cap=args.bracket_cap)
        rec = integrate(args.model, cfg, path, driver)
        errs.append((x_ref - rec.x_st[-1]) ** 2)
    return errs


def _strong_chunk(args, start, stop):
    out = []
    for i in range(start, stop):
        try:
            out.append(_strong_one(args, i))
        except SolverError:
            out.append(None)
    return out


def strong_error(model, alpha, theta, delta_grid, horizon, mc, reference=None,
                 solver_tol=1.0e-12, solver_max_iter=100, bracket_cap=60):
    """Coupled final-time strong error over a grid of internal step sizes.

    Every path draws one fine realization at reference.delta_ref; each grid
    row integrates on the exact coarsening of that realization, and the
    squared difference to the reference value at the external horizon is
    averaged over paths.  Grid steps must be integer multiples of
    delta_ref.  reference defaults to ClosedForm when the model has an
    exact solution, else FineGrid, at min(delta_grid)/10.
    """
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    if not isinstance(mc, MonteCarloConfig):
        raise DomainError(f"expected a MonteCarloConfig, got {mc!r}")
    a = _as_alpha(alpha)
    deltas = sorted({float(d) for d in delta_grid}, reverse=True)
    if len(deltas) < 1 or any(not math.isfinite(d) or d <= 0 for d in deltas):
        raise DomainError(f"delta_grid must hold positive finite steps, got {delta_grid!r}")
    if reference is None:
        dr = min(deltas) / 10.0
        reference = ClosedForm(dr) if model.exact_solution is not None else FineGrid(dr)
    if isinstance(reference, ClosedForm) and model.exact_solution is None:
        raise ConfigError(
            f"model {model.name!r} has no exact solution; use a FineGrid "
            f"reference", key="reference")
    if not isinstance(reference, (ClosedForm, FineGrid)):
        raise DomainError(f"reference must be ClosedForm or FineGrid, got {reference!r}")
    delta_ref = float(reference.delta_ref)
    if not math.isfinite(delta_ref) or delta_ref <= 0 or delta_ref >= min(deltas):
        raise ConfigError(
            f"delta_ref {delta_ref} must be positive and strictly finer than "
            f"the smallest grid step {min(deltas)}", key="reference.delta_ref")
    ratios = []
    for d in deltas:
        m = round(d / delta_ref)
        if m < 1 or abs(m * delta_ref - d) > 1e-9 * d:
            raise ConfigError(
                f"grid step {d} is not an integer multiple of delta_ref "
                f"{delta_ref}", key="reference.delta_ref")
        ratios.append(m)

    args = _StrongArgs(model=model, alpha=a, theta=float(theta),
                       ratios=tuple(ratios), delta_ref=delta_ref,
                       horizon=float(horizon), seed=mc.master_seed,
                       use_exact=isinstance(reference, ClosedForm),
                       solver_tol=solver_tol, solver_max_iter=solver_max_iter,
                       bracket_cap=bracket_cap)
    results = _map_paths(_strong_chunk, args, mc.n_paths,
                         resolve_workers(mc, mc.n_paths))
    n_failed = _check_failures(results, mc.n_paths)
    valid = [r for r in results if r is not None]
    errs = np.asarray(valid)  # (n_valid, n_rows)
    rows = []
    for k, d in enumerate(deltas):
        col = errs[:, k]
        mse = float(np.mean(col))
        se = float(np.std(col, ddof=1) / math.sqrt(col.shape[0]))
        rows.append(StrongErrorRow(delta=d, mse=mse, se=se, n_eff=col.shape[0]))
    return StrongErrorReport(
        model_name=model.name, alpha=a, theta=float(theta),
        horizon=float(horizon),
        reference=("closed_form" if args.use_exact else "fine_grid"),
        delta_ref=delta_ref, n_paths=mc.n_paths, master_seed=mc.master_seed,
        n_failed=n_failed, rows=tuple(rows))


@dataclass(frozen=True)
class ConvergenceReport:
    """OLS fit of (1/2) log mse against log delta: slope is the empirical
    strong order."""

    slope: float
    intercept: float
    r2: float
    n_points: int
    deltas: tuple


def fit_order(report):
    """Regress the strong-error rows; needs >= 3 usable (mse > 0) rows."""
    if not isinstance(report, StrongErrorReport):
        raise DomainError(f"expected a StrongErrorReport, got {report!r}")
    usable = [r for r in report.rows if math.isfinite(r.mse) and r.mse > 0.0]
    dropped = len(report.rows) - len(usable)
    if dropped:
        warnings.warn(f"fit_order dropped {dropped} row(s) with nonpositive "
                      f"or non-finite mse", RuntimeWarning, stacklevel=2)
    if len(usable) < 3:
        raise FitError(
            f"need at least 3 usable rows to fit an order, have {len(usable)}")
    x = np.log([r.delta for r in usable])
    y = 0.5 * np.log([r.mse for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ConvergenceReport(slope=float(slope), intercept=float(intercept),
                             r2=r2, n_points=len(usable),
                             deltas=tuple(r.delta for r in usable))


# --- mean-square stability ---------------------------------------------------


@dataclass(frozen=True)
class StabilityCurve:
    """Mean-square trajectory with threshold verdict and optional envelope.

    times holds the internal times n delta; msq the Monte Carlo averages of
    X_n^2 with standard errors msq_se; envelope the Mittag-Leffler decay
    curve msq[0] * E_a(-gamma (n delta)^a) when the contraction factor
    allows one.  diverged_at is the first step index whose average exceeds
    1e3 times the initial value (or turns non-finite), None for a decaying
    curve.
    """

    model_name: str
    alpha: float
    theta: float
    delta: float
    n_steps: int
    n_paths: int
    master_seed: int
    n_failed: int
    times: np.ndarray
    msq: np.ndarray
    msq_se: np.ndarray
    envelope: np.ndarray = None
    threshold: StabilityThreshold = None
    diverged_at: int = None

    @property
    def stable_empirical(self):
        return self.diverged_at is None


@dataclass(frozen=True)
class _StabilityArgs:
    model: ModelDescriptor
    alpha: float
    theta: float
    delta: float
    n_steps: int
    seed: int
    solver_tol: float
    solver_max_iter: int
    bracket_cap: int


def _stability_chunk(args, start, stop):
    out = []
    for i in range(start, stop):
        crng = substream(args.seed, i, CLOCK_STREAM)
        nrng = substream(args.seed, i, NOISE_STREAM)
        clock = simulate_subordinator_steps(args.alpha, args.delta,
                                            args.n_steps, crng)
        driver = BrownianDriver.sample(args.n_steps, args.delta, nrng)
        cfg = SchemeConfig(theta=args.theta, delta=args.delta,
                           horizon=clock.horizon, solver_tol=args.solver_tol,
                           solver_max_iter=args.solver_max_iter,
                           bracket_cap=args.bracket_cap)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                rec = integrate(args.model, cfg, clock, driver)
            out.append(rec.x_st ** 2)
        except SolverError:
            out.append(None)
    return out


def stability_curve(model, alpha, theta, delta, n_steps, mc,
                    solver_tol=1.0e-12, solver_max_iter=100, bracket_cap=60):
    """Monte Carlo mean-square trajectory over n_steps internal steps.

    Step sizes above the admissible bound are allowed on purpose (that is
    what a stability study probes), so the per-path step warning is
    suppressed here and the threshold verdict carries the information
    instead.
    """
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    if not isinstance(mc, MonteCarloConfig):
        raise DomainError(f"expected a MonteCarloConfig, got {mc!r}")
    a = _as_alpha(alpha)
    if not isinstance(n_steps, int) or isinstance(n_steps, bool) or n_steps < 1:
        raise DomainError(f"n_steps must be a positive integer, got {n_steps!r}")
    args = _StabilityArgs(model=model, alpha=a, theta=float(theta),
                          delta=float(delta), n_steps=n_steps,
                          seed=mc.master_seed, solver_tol=solver_tol,
                          solver_max_iter=solver_max_iter,
                          bracket_cap=bracket_cap)
    results = _map_paths(_stability_chunk, args, mc.n_paths,
                         resolve_workers(mc, mc.n_paths))
    n_failed = _check_failures(results, mc.n_paths)
    mat = np.asarray([r for r in results if r is not None])
    with np.errstate(invalid="ignore", over="ignore"):
        msq = np.mean(mat, axis=0)
        msq_se = np.std(mat, axis=0, ddof=1) / math.sqrt(mat.shape[0])
    times = np.arange(n_steps + 1) * args.delta

    diverged_at = None
    base = msq[0]
    for n in range(msq.shape[0]):
        if not math.isfinite(msq[n]) or msq[n] > 1e3 * base:
            diverged_at = n
            break

    threshold = None
    envelope = None
    if model.lam is not None and model.k5 is not None:
        threshold = stability_threshold(model.lam, model.k5, args.theta,
                                        args.delta, a)
        if threshold.gamma is not None:
            envelope = base * np.asarray(
                [mittag_leffler(a, -threshold.gamma * t**a) for t in times])
    return StabilityCurve(
        model_name=model.name, alpha=a, theta=args.theta, delta=args.delta,
        n_steps=n_steps, n_paths=mc.n_paths, master_seed=mc.master_seed,
        n_failed=n_failed, times=times, msq=msq, msq_se=msq_se,
        envelope=envelope, threshold=threshold, diverged_at=diverged_at)


# --- inverse-clock moments ---------------------------------------------------


@dataclass(frozen=True)
class MomentRow:
    p: int
    t: float
    empirical: float
    formula: float
    se: float
    zscore: float
    bias_allowance: float
    passed: bool


@dataclass(frozen=True)
class MomentReport:
    alpha: float
    delta: float
    n_paths: int
    master_seed: int
    rows: tuple

    @property
    def all_passed(self):
        return all(r.passed for r in self.rows)


@dataclass(frozen=True)
class _MomentArgs:
    alpha: float
    delta: float
    t_list: tuple
    seed: int


def _moment_chunk(args, start, stop):
    ts = np.asarray(args.t_list)
    horizon = float(max(args.t_list))
    out = []
    for i in range(start, stop):
        crng = substream(args.seed, i, CLOCK_STREAM)
        path = simulate_subordinator(args.alpha, args.delta, horizon, crng)
        out.append(invert_path(path, ts))
    return out


def moment_validation(alpha, p_list, t_list, delta, mc):
    """Empirical moments of the step-function inverse clock vs closed form.

    The step function sits within one jump below the true inverse, so the
    empirical mean may undershoot the formula by up to the reported
    bias_allowance p * delta * E[E_t^(p-1)]; a row passes when it lies in
    [formula - allowance - 3 se, formula + 3 se].
    """
    if not isinstance(mc, MonteCarloConfig):
        raise DomainError(f"expected a MonteCarloConfig, got {mc!r}")
    a = _as_alpha(alpha)
    ps = list(p_list)
    if not ps or any(not isinstance(p, int) or isinstance(p, bool) or p < 1
                     for p in ps):
        raise DomainError(f"p_list must hold integers >= 1, got {p_list!r}")
    ts = [float(t) for t in t_list]
    if not ts or any(not math.isfinite(t) or t <= 0 for t in ts):
        raise DomainError(f"t_list must hold positive finite times, got {t_list!r}")
    args = _MomentArgs(alpha=a, delta=float(delta), t_list=tuple(ts),
                       seed=mc.master_seed)
    results = _map_paths(_moment_chunk, args, mc.n_paths,
                         resolve_workers(mc, mc.n_paths))
    e_vals = np.asarray(results)  # (n_paths, n_times)
    rows = []
    for p in ps:
        for j, t in enumerate(ts):
            samples = e_vals[:, j] ** p
            emp = float(np.mean(samples))
            se = float(np.std(samples, ddof=1) / math.sqrt(samples.shape[0]))
            formula = inverse_subordinator_moment(a, p, t)
            lower_formula = 1.0 if p == 1 else inverse_subordinator_moment(a, p - 1, t)
            allowance = p * args.delta * lower_formula
            zscore = (emp - formula) / se if se > 0.0 else 0.0
            passed = (formula - allowance - 3.0 * se) <= emp <= (formula + 3.0 * se)
            rows.append(MomentRow(p=p, t=t, empirical=emp, formula=formula,
                                  se=se, zscore=zscore,
                                  bias_allowance=allowance, passed=passed))
    return MomentReport(alpha=a, delta=args.delta, n_paths=mc.n_paths,
                        master_seed=mc.master_seed, rows=tuple(rows))


# --- trajectory functionals --------------------------------------------------


@dataclass(frozen=True)
class LyapunovCertificate:
    """Certificate c1 |x|^p <= V(x) <= c2 |x|^p with LV <= -c3 V."""

    c1: float
    c2: float
    c3: float
    p: float

    def __post_init__(self):
        for nm in ("c1", "c2", "c3", "p"):
            v = getattr(self, nm)
            if not isinstance(v, (int, float)) or isinstance(v, bool) \
                    or not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"{nm} must be positive and finite, got {v!r}")
            object.__setattr__(self, nm, float(v))
        if self.c2 < self.c1:
            raise DomainError(f"c2 must be >= c1, got c1={self.c1}, c2={self.c2}")


@dataclass(frozen=True)
class _ReadoutArgs:
    model: ModelDescriptor
    alpha: float
    theta: float
    delta: float
    t_grid: tuple
    power: float
    seed: int
    solver_tol: float
    solver_max_iter: int
    bracket_cap: int


def _readout_chunk(args, start, stop):
    ts = np.asarray(args.t_grid)
    horizon = float(max(args.t_grid))
    out = []
    for i in range(start, stop):
        crng = substream(args.seed, i, CLOCK_STREAM)
        nrng = substream(args.seed, i, NOISE_STREAM)
        clock = simulate_subordinator(args.alpha, args.delta, horizon, crng)
        driver = BrownianDriver.sample(clock.n_complete, args.delta, nrng)
        cfg = SchemeConfig(theta=args.theta, delta=args.delta, horizon=horizon,
                           solver_tol=args.solver_tol,
                           solver_max_iter=args.solver_max_iter,
                           bracket_cap=args.bracket_cap)
        try:
            rec = integrate(args.model, cfg, clock, driver)
            out.append(np.abs(rec.values_at(ts)) ** args.power)
        except SolverError:
            out.append(None)
    return out


def _readout_campaign(model, alpha, theta, delta, t_grid, power, mc,
                      solver_tol, solver_max_iter, bracket_cap):
    ts = [float(t) for t in t_grid]
    if not ts or any(not math.isfinite(t) or t < 0 for t in ts):
        raise DomainError(f"t_grid must hold finite times >= 0, got {t_grid!r}")
    if max(ts) <= 0:
        raise DomainError("t_grid needs at least one positive time")
    args = _ReadoutArgs(model=model, alpha=alpha, theta=float(theta),
                        delta=float(delta), t_grid=tuple(ts), power=power,
                        seed=mc.master_seed, solver_tol=solver_tol,
                        solver_max_iter=solver_max_iter, bracket_cap=bracket_cap)
    results = _map_paths(_readout_chunk, args, mc.n_paths,
                         resolve_workers(mc, mc.n_paths))
    n_failed = _check_failures(results, mc.n_paths)
    mat = np.asarray([r for r in results if r is not None])
    with np.errstate(invalid="ignore", over="ignore"):
        emp = np.mean(mat, axis=0)
        se = np.std(mat, axis=0, ddof=1) / math.sqrt(mat.shape[0])
    return np.asarray(ts), emp, se, n_failed


@dataclass(frozen=True)
class EnvelopeReport:
    """Empirical E|X_t|^p against the certificate envelope
    (c2/c1) |x0|^p E_a(-c3 t^a)."""

    model_name: str
    alpha: float
    theta: float
    delta: float
    certificate: LyapunovCertificate
    n_paths: int
    master_seed: int
    n_failed: int
    t_grid: np.ndarray
    empirical: np.ndarray
    se: np.ndarray
    envelope: np.ndarray
    ratio_max: float
    t_worst: float
    passed: bool
    failure: str = None


def ml_envelope_check(model, alpha, certificate, t_grid, mc, delta=1.0e-2,
                      theta=1.0, tol=0.15, solver_tol=1.0e-12,
                      solver_max_iter=100, bracket_cap=60):
    """Check E|X_t|^p <= (c2/c1)|x0|^p E_a(-c3 t^a) (1 + tol) on t_grid."""
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    if not isinstance(certificate, LyapunovCertificate):
        raise DomainError(f"expected a LyapunovCertificate, got {certificate!r}")
    if not isinstance(mc, MonteCarloConfig):
        raise DomainError(f"expected a MonteCarloConfig, got {mc!r}")
    a = _as_alpha(alpha)
    ts, emp, se, n_failed = _readout_campaign(
        model, a, theta, delta, t_grid, certificate.p, mc, solver_tol,
        solver_max_iter, bracket_cap)
    c = certificate
    env = (c.c2 / c.c1) * abs(model.x0) ** c.p * np.asarray(
        [mittag_leffler(a, -c.c3 * t**a) for t in ts])
    failure = None
    if not np.all(np.isfinite(emp)):
        bad = int(np.argmax(~np.isfinite(emp)))
        failure = f"empirical moment non-finite at t={ts[bad]}"
        ratio = np.full_like(env, math.inf)
    else:
        ratio = emp / env
    k = int(np.argmax(ratio))
    passed = failure is None and bool(ratio[k] <= 1.0 + tol)
    return EnvelopeReport(
        model_name=model.name, alpha=a, theta=float(theta), delta=float(delta),
        certificate=c, n_paths=mc.n_paths, master_seed=mc.master_seed,
        n_failed=n_failed, t_grid=ts, empirical=emp, se=se, envelope=env,
        ratio_max=float(ratio[k]), t_worst=float(ts[k]), passed=passed,
        failure=failure)


@dataclass(frozen=True)
class BoundRow:
    t: float
    empirical: float
    se: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class BoundReport:
    model_name: str
    alpha: float
    theta: float
    delta: float
    h: float
    n_paths: int
    master_seed: int
    n_failed: int
    rows: tuple

    @property
    def all_passed(self):
        return all(r.passed for r in self.rows)


def exact_moment_bound_check(model, alpha, h, t_grid, mc, delta=1.0e-3,
                             theta=1.0, solver_tol=1.0e-12,
                             solver_max_iter=100, bracket_cap=60):
    """Check empirical E|X_t|^(2h) against the closed-form moment bound
    2^(h-1) E_a(2 h k1 t^a)(1 + |x0|^(2h)) with 3 SE slack."""
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    if model.k1 is None:
        raise ConfigError(
            f"the moment bound needs the model constant k1, which "
            f"{model.name!r} does not declare", key="model.k1")
    if not isinstance(mc, MonteCarloConfig):
        raise DomainError(f"expected a MonteCarloConfig, got {mc!r}")
    a = _as_alpha(alpha)
    hh = float(h)
    if not math.isfinite(hh) or hh < 1.0:
        raise DomainError(f"h must be >= 1, got {h!r}")
    ts, emp, se, n_failed = _readout_campaign(
        model, a, theta, delta, t_grid, 2.0 * hh, mc, solver_tol,
        solver_max_iter, bracket_cap)
    rows = []
    for j, t in enumerate(ts):
        bound = exact_moment_bound(a, hh, model.k1, float(t), model.x0)
        ok = bool(math.isfinite(emp[j]) and emp[j] <= bound + 3.0 * se[j])
        rows.append(BoundRow(t=float(t), empirical=float(emp[j]),
                             se=float(se[j]), bound=bound, passed=ok))
    return BoundReport(model_name=model.name, alpha=a, theta=float(theta),
                       delta=float(delta), h=hh, n_paths=mc.n_paths,
                       master_seed=mc.master_seed, n_failed=n_failed,
                       rows=tuple(rows))
