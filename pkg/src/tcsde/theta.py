"""Stochastic theta integration on the random internal grid tau_n = D_{n delta}.

One step of the scheme for dX = F dE + G dB_E reads

    X_{n+1} = X_n + (1-theta) F(tau_n, X_n) delta + theta F(tau_{n+1}, X_{n+1}) delta
                  + G(tau_n, X_n) dB_n

with dB_n the Brownian increment over [n delta, (n+1) delta] in internal
time.  The implicit part is solved per step by damped Newton started from
the explicit predictor, with a geometric bracket expansion plus bisection as
fallback (x - theta delta F(t, x) is strictly increasing in x for step
sizes below :func:`max_stepsize`).  A forward-backward companion
trajectory, which reuses the theta-scheme values inside its coefficients,
can be recorded alongside at no extra solver cost.

The compiled kernel handles builtin models; everything else takes the
structurally identical Python loop, so both backends agree to rounding.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import backend
from .clock import BrownianDriver, SubordinatorPath
from .errors import ConfigError, DomainError, SolverError
from .models import ModelDescriptor
from .special_fn import _as_alpha

__all__ = [
    "SchemeConfig",
    "TrajectoryRecord",
    "StabilityThreshold",
    "THRESHOLD_NOTE",
    "max_stepsize",
    "implicit_solve",
    "st_step",
    "fbem_step",
    "integrate",
    "stability_threshold",
]

THRESHOLD_NOTE = (
    "stability is declared via |phi| < 1; the contraction argument behind "
    "phi is proven for phi in (0, 1), and for phi <= 0 the mean-square "
    "envelope rate gamma is undefined (reported as null)")


def _check_theta(theta):
    if not isinstance(theta, (int, float)) or isinstance(theta, bool):
        raise DomainError(f"theta must be a real number, got {theta!r}")
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    return theta


def _check_pos(name, v):
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise DomainError(f"{name} must be a real number, got {v!r}")
    v = float(v)
    if not math.isfinite(v) or v <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {v}")
    return v


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme parameters: theta in [0, 1], internal step delta, external
    horizon, and implicit-solver knobs.

    delta may exceed the admissible bound of :func:`max_stepsize`; the
    integrator then warns and proceeds, recording the fact on the
    trajectory.  The convergence theory is stated for small delta.
    """

    theta: float
    delta: float
    horizon: float
    solver_tol: float = 1.0e-12
    solver_max_iter: int = 100
    bracket_cap: int = 60

    def __post_init__(self):
        object.__setattr__(self, "theta", _check_theta(self.theta))
        object.__setattr__(self, "delta", _check_pos("delta", self.delta))
        object.__setattr__(self, "horizon", _check_pos("horizon", self.horizon))
        object.__setattr__(self, "solver_tol", _check_pos("solver_tol", self.solver_tol))
        for nm, lo in (("solver_max_iter", 1), ("bracket_cap", 1)):
            v = getattr(self, nm)
            if not isinstance(v, int) or isinstance(v, bool) or v < lo:
                raise DomainError(f"{nm} must be an integer >= {lo}, got {v!r}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """One integrated path on its random grid.

    tau holds the external grid times tau_0 .. tau_N, x_st the theta-scheme
    values, x_fbem the forward-backward companion when recorded, and
    newton_iters the per-step solver iteration count (values above the
    Newton cap mean the bisection fallback finished the step).  Readout in
    external time is piecewise constant: X(t) = X_{tau_n} for t in
    [tau_n, tau_{n+1}).
    """

    theta: float
    delta: float
    tau: np.ndarray
    x_st: np.ndarray
    x_fbem: np.ndarray = None
    newton_iters: np.ndarray = None
    delta_warning: bool = False

    @property
    def n_steps(self):
        return self.tau.shape[0] - 1

    def value_at(self, t, which="st"):
        return float(self.values_at(np.asarray([t]), which=which)[0])

    def values_at(self, ts, which="st"):
        series = {"st": self.x_st, "fbem": self.x_fbem}.get(which)
        if series is None:
            raise DomainError(
                f"no {which!r} series on this trajectory (recorded: st"
                f"{', fbem' if self.x_fbem is not None else ''})")
        ts = np.asarray(ts, dtype=np.float64)
        if ts.size and np.min(ts) < self.tau[0]:
            raise DomainError(f"readout before tau_0={self.tau[0]}")
        n = np.clip(np.searchsorted(self.tau, ts, side="right") - 1, 0, self.n_steps)
        return series[n]


def max_stepsize(model, theta):
    """Largest internal step with a guaranteed unique implicit solve.

    min(1, 1/(k1 theta), 1/(k4 theta)) using the declared constants; the
    k4 term only binds when k4 > 0, and theta = 0 has no implicit part so
    the bound is 1 by convention.
    """
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    theta = _check_theta(theta)
    if theta == 0.0:
        return 1.0
    if model.k1 is None:
        raise ConfigError(
            f"max_stepsize needs the model constant k1, which {model.name!r} "
            f"does not declare", key="model.k1")
    bound = min(1.0, 1.0 / (model.k1 * theta))
    if model.k4 is not None and model.k4 > 0.0:
        bound = min(bound, 1.0 / (model.k4 * theta))
    return bound


def _fd_dx(F, t, x):
    h = 1e-6 * max(1.0, abs(x))
    return (F(t, x + h) - F(t, x - h)) / (2.0 * h)


def _guarded(fn, *args):
    """Evaluate fn; out-of-range points read as NaN so the solver's
    finiteness checks route around them instead of crashing."""
    try:
        return fn(*args)
    except (OverflowError, ValueError, ZeroDivisionError):
        return math.nan


def _solve_step(F, dFdx, t, q, b, tol, max_iter, bracket_cap):
    """Solve x - q F(t, x) = b; returns (x, iterations used).

    Damped Newton from the predictor x = b; on breakdown, geometric bracket
    expansion and bisection.  Residual target tol * max(1, |b|).  Raises
    SolverError when both strategies fail.
    """
    if q == 0.0:
        return b, 0

    def g(x):
        return x - q * _guarded(F, t, x) - b

    scale = max(1.0, abs(b))
    x = b
    for it in range(max_iter):
        r = g(x)
        if abs(r) <= tol * scale:
            return x, it
        d = 1.0 - q * (_guarded(dFdx, t, x) if dFdx is not None
                       else _guarded(_fd_dx, F, t, x))
        if not math.isfinite(r) or not math.isfinite(d) or abs(d) < 1e-13:
            break
        step = r / d
        xn = x - step
        rn = g(xn)
        h = 0
        while (not math.isfinite(rn) or abs(rn) > abs(r)) and h < 50:
            step *= 0.5
            xn = x - step
            rn = g(xn)
            h += 1
        if h == 50 and (not math.isfinite(rn) or abs(rn) > abs(r)):
            break
        x = xn
    lo = hi = b
    glo = ghi = g(b)
    width = scale
    found = False
    for _ in range(bracket_cap):
        # move an endpoint while its sign is wrong or its value unusable
        if not glo <= 0.0:
            lo = b - width
            glo = g(lo)
        if not ghi >= 0.0:
            hi = b + width
            ghi = g(hi)
        if glo <= 0.0 <= ghi:
            found = True
            break
        width *= 2.0
    if not found:
        raise SolverError(
            f"no sign change within the bracket expansion cap "
            f"({bracket_cap} doublings from width {scale})",
            residual=(glo if abs(glo) < abs(ghi) else ghi), bracket=(lo, hi))
    gm, mid = glo, lo
    for j in range(300):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) <= tol * scale:
            return mid, max_iter + j + 1
        if gm < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * max(1.0, abs(mid)):
            break
    raise SolverError(
        f"bisection stalled at residual {gm:.3e} (target {tol * scale:.3e})",
        residual=gm, bracket=(lo, hi))


def implicit_solve(model, t, theta, delta, b, tol=1.0e-12, max_iter=100,
                   bracket_cap=60):
    """Solve the implicit relation x - theta delta F(t, x) = b."""
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    theta = _check_theta(theta)
    delta = _check_pos("delta", delta)
    x, _ = _solve_step(model.drift, model.drift_dx, float(t),
                       theta * delta, float(b), tol, max_iter, bracket_cap)
    return x


def st_step(model, x_prev, tau_n, tau_next, theta, delta, db,
            tol=1.0e-12, max_iter=100, bracket_cap=60):
    """One theta-scheme step from x_prev over [tau_n, tau_next]."""
    theta = _check_theta(theta)
    delta = _check_pos("delta", delta)
    fn = model.drift(tau_n, x_prev)
    gn = model.diffusion(tau_n, x_prev)
    b = x_prev + (1.0 - theta) * delta * fn + gn * db
    x, _ = _solve_step(model.drift, model.drift_dx, float(tau_next),
                       theta * delta, b, tol, max_iter, bracket_cap)
    return x


def fbem_step(model, x_prev, x_tilde, tau_n, delta, db):
    """One forward-backward companion step.

    The coefficients are evaluated on the theta-scheme value x_tilde at
    tau_n, so the companion needs no implicit solve of its own.
    """
    delta = _check_pos("delta", delta)
    return (x_prev + model.drift(tau_n, x_tilde) * delta
            + model.diffusion(tau_n, x_tilde) * db)


def _integrate_python(model, theta, delta, tau, db, tol, max_iter,
                      bracket_cap, with_fbem):
    F, G, dFdx = model.drift, model.diffusion, model.drift_dx
    n = db.shape[0]
    x_out = np.empty(n + 1)
    x_out[0] = model.x0
    xf_out = None
    if with_fbem:
        xf_out = np.empty(n + 1)
        xf_out[0] = model.x0
    iters_out = np.zeros(n, dtype=np.int32)
    x = model.x0
    xf = model.x0
    q = theta * delta
    for i in range(n):
        tn = tau[i]
        fn = F(tn, x)
        gn = G(tn, x)
        b = x + (1.0 - theta) * delta * fn + gn * db[i]
        try:
            xn, iters = _solve_step(F, dFdx, tau[i + 1], q, b, tol,
                                    max_iter, bracket_cap)
        except SolverError as exc:
            exc.step_index = i + 1
            raise
        if with_fbem:
            xf = xf + fn * delta + gn * db[i]
            xf_out[i + 1] = xf
        x = xn
        x_out[i + 1] = x
        iters_out[i] = iters
    return x_out, xf_out, iters_out


def integrate(model, config, clock_path, driver, with_fbem=False):
    """Integrate one path of the model over one clock realization.

    clock_path supplies the internal grid (its delta must equal the
    scheme's), driver the Brownian increments at the same resolution.  The
    trajectory stops at the last grid point not exceeding config.horizon,
    which must not exceed the clock's own horizon.
    """
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    if not isinstance(config, SchemeConfig):
        raise DomainError(f"expected a SchemeConfig, got {config!r}")
    if not isinstance(clock_path, SubordinatorPath):
        raise DomainError(f"expected a SubordinatorPath, got {clock_path!r}")
    if not isinstance(driver, BrownianDriver):
        raise DomainError(f"expected a BrownianDriver, got {driver!r}")
    if clock_path.delta != config.delta:
        raise ConfigError(
            f"clock delta {clock_path.delta} != scheme delta {config.delta}",
            key="delta")
    if driver.delta != config.delta:
        raise ConfigError(
            f"driver delta {driver.delta} != scheme delta {config.delta}",
            key="delta")
    if config.horizon > clock_path.horizon:
        raise ConfigError(
            f"scheme horizon {config.horizon} exceeds the clock horizon "
            f"{clock_path.horizon}", key="horizon")

    values = clock_path.values
    n = int(np.searchsorted(values, config.horizon, side="right")) - 1
    if driver.increments.shape[0] < n:
        raise ConfigError(
            f"driver supplies {driver.increments.shape[0]} increments, "
            f"path needs {n}", key="driver")
    tau = values[: n + 1]
    db = driver.increments[:n]

    delta_warning = False
    if config.theta > 0.0 and model.k1 is not None:
        if config.delta > max_stepsize(model, config.theta):
            delta_warning = True
            warnings.warn(
                f"delta {config.delta} exceeds the admissible step "
                f"{max_stepsize(model, config.theta):.6g} for "
                f"model {model.name!r} at theta {config.theta}; proceeding",
                RuntimeWarning, stacklevel=2)

    out = backend.integrate_builtin(
        model.kernel_kind, model.kernel_params, model.x0, config.theta,
        config.delta, tau, db, config.solver_tol, config.solver_max_iter,
        config.bracket_cap, with_fbem)
    if isinstance(out, int):
        raise SolverError(
            f"implicit solve failed at step {out} of {n} "
            f"(model {model.name!r}, theta {config.theta}, delta {config.delta})",
            step_index=out)
    if out is None:
        x_st, x_fbem, iters = _integrate_python(
            model, config.theta, config.delta, tau, db, config.solver_tol,
            config.solver_max_iter, config.bracket_cap, with_fbem)
    else:
        x_st, x_fbem, iters = out
    return TrajectoryRecord(theta=config.theta, delta=config.delta, tau=tau,
                            x_st=x_st, x_fbem=x_fbem, newton_iters=iters,
                            delta_warning=delta_warning)


@dataclass(frozen=True)
class StabilityThreshold:
    """Mean-square contraction factor and admissible-step threshold.

    phi is the per-step factor of the linearized mean-square recursion for
    a model with dissipation rate lam and drift quadratic-growth constant
    k5; the scheme is declared mean-square stable when |phi| < 1.  For
    theta < 1/2 steps above delta_max lose the guarantee; for theta >= 1/2
    every step size is admissible.  gamma is the Mittag-Leffler envelope
    rate, defined only for phi in (0, 1).
    """

    theta: float
    delta: float
    lam: float
    k5: float
    alpha: float
    phi: float
    delta_max: float
    stable: bool
    gamma: float = None
    note: str = THRESHOLD_NOTE


def stability_threshold(lam, k5, theta, delta, alpha):
    """Evaluate the mean-square stability factor phi and its threshold."""
    lam = _check_pos("lam", lam)
    k5 = _check_pos("k5", k5)
    theta = _check_theta(theta)
    delta = _check_pos("delta", delta)
    a = _as_alpha(alpha)
    num = 1.0 + (1.0 - theta) ** 2 * delta**2 * k5 - 0.5 * delta * lam \
        - 2.0 * (1.0 - theta) * delta * lam
    den = 1.0 + theta**2 * delta**2 * k5 + 2.0 * theta * delta * lam
    phi = num / den
    if theta >= 0.5:
        delta_max = math.inf
    else:
        delta_max = 5.0 * lam / (2.0 * k5 * (1.0 - 2.0 * theta))
    gamma = None
    if 0.0 < phi < 1.0:
        gamma = (-math.log(phi) / delta) ** a
    return StabilityThreshold(theta=theta, delta=delta, lam=lam, k5=k5,
                              alpha=a, phi=phi, delta_max=delta_max,
                              stable=abs(phi) < 1.0, gamma=gamma)
