"""Scalar model catalog, user-defined expression models, and assumption checks.

A model is a pair of coefficient callables (t, x) -> float for drift F and
diffusion G, an initial value, and a set of declared structural constants:

    h, growth_c   polynomial growth |F|, |G| <= growth_c (1 + |x|^h)
    k1            one-sided moment bound x F + (2h-1)/2 G^2 <= k1 (1 + x^2)
    k2, eta_f     temporal drift regularity |F(s,x)-F(t,x)| <= k2(1+|x|)|s-t|^eta_f
    k3, eta_g     same for the diffusion
    k4            one-sided Lipschitz (x-y)(F(.,x)-F(.,y)) <= k4 (x-y)^2
    lam           dissipation x F + G^2/2 <= -lam x^2
    k5            drift quadratic growth F^2 <= k5 x^2

Constants are declarations, not facts: :func:`validate_assumptions` sweeps a
grid and reports the worst margin for each declared inequality, flagging
violations instead of silently trusting the declaration.  Builtin models
carry a kernel kind so the compiled integration loop can dispatch on them;
user expression models always take the generic Python path.
"""

import ast
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "ModelDescriptor",
    "GridSpec",
    "AssumptionCheck",
    "AssumptionReport",
    "Asymptotics",
    "ExpressionFn",
    "catalog",
    "make_builtin",
    "make_expression_model",
    "validate_assumptions",
    "classify_asymptotics",
    "bs_exact_solution",
]

_TWO_PI = 2.0 * math.pi


def _finite(name, v, allow_none=False):
    if v is None:
        if allow_none:
            return None
        raise DomainError(f"{name} must not be None")
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise DomainError(f"{name} must be a finite real number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class ModelDescriptor:
    """Coefficients, initial value, and declared constants of one model."""

    name: str
    drift: object
    diffusion: object
    x0: float
    h: float = None
    growth_c: float = None
    k1: float = None
    k2: float = None
    k3: float = None
    k4: float = None
    k5: float = None
    lam: float = None
    eta_f: float = 1.0
    eta_g: float = 1.0
    drift_dx: object = None
    exact_solution: object = None
    zero_fixed_point: bool = False
    kernel_kind: int = -1
    kernel_params: tuple = ()

    def __post_init__(self):
        if not callable(self.drift) or not callable(self.diffusion):
            raise DomainError("drift and diffusion must be callables (t, x) -> float")
        if self.drift_dx is not None and not callable(self.drift_dx):
            raise DomainError("drift_dx must be a callable or None")
        if self.exact_solution is not None and not callable(self.exact_solution):
            raise DomainError("exact_solution must be a callable or None")
        object.__setattr__(self, "x0", _finite("x0", self.x0))
        for nm in ("h", "growth_c", "k1", "k2", "k3", "k4", "k5", "lam"):
            v = getattr(self, nm)
            if v is not None:
                object.__setattr__(self, nm, _finite(nm, v))
        if self.h is not None and self.h < 1.0:
            raise DomainError(f"h must be >= 1, got {self.h}")
        for nm in ("growth_c", "k1", "lam"):
            v = getattr(self, nm)
            if v is not None and v <= 0.0:
                raise DomainError(f"{nm} must be positive when declared, got {v}")
        for nm in ("k2", "k3", "k5"):
            v = getattr(self, nm)
            if v is not None and v < 0.0:
                raise DomainError(f"{nm} must be >= 0 when declared, got {v}")
        for nm in ("eta_f", "eta_g"):
            v = _finite(nm, getattr(self, nm))
            if not 0.0 < v <= 1.0:
                raise DomainError(f"{nm} must lie in (0, 1], got {v}")
            object.__setattr__(self, nm, v)

    def constants(self):
        """Declared constants as a name -> value dict (only the declared ones)."""
        out = {}
        for nm in ("h", "growth_c", "k1", "k2", "k3", "k4", "k5", "lam",
                   "eta_f", "eta_g"):
            v = getattr(self, nm)
            if v is not None:
                out[nm] = v
        return out


# --- builtin coefficient families -------------------------------------------
# Frozen dataclasses so bound methods pickle cleanly for process pools.


@dataclass(frozen=True)
class _LinearCoeffs:
    mu: float
    sigma: float

    def drift(self, t, x):
        return self.mu * x

    def diffusion(self, t, x):
        return self.sigma * x

    def drift_dx(self, t, x):
        return self.mu


@dataclass(frozen=True)
class _GeometricExact:
    """Closed-form solution x0 exp((mu - sigma^2/2) E + sigma B_E) of the
    linear model along the inverse clock."""

    x0: float
    mu: float
    sigma: float

    def __call__(self, e, b):
        try:
            return self.x0 * math.exp((self.mu - 0.5 * self.sigma**2) * e
                                      + self.sigma * b)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class _BoundedCoeffs:
    def drift(self, t, x):
        return -x - x**3 / (1.0 + x * x)

    def diffusion(self, t, x):
        return x / math.sqrt(1.0 + x * x)

    def drift_dx(self, t, x):
        q = 1.0 + x * x
        return -1.0 - (3.0 * x * x + x**4) / (q * q)


@dataclass(frozen=True)
class _MeanRevertCoeffs:
    kappa: float
    level: float
    amp: float
    omega: float
    vol: float
    vol_slope: float

    def drift(self, t, x):
        return self.kappa * (self.level + self.amp * math.sin(self.omega * t) - x)

    def diffusion(self, t, x):
        return self.vol * (1.0 + self.vol_slope * t) * x**3

    def drift_dx(self, t, x):
        return -self.kappa


@dataclass(frozen=True)
class _CubicCoeffs:
    a: float
    b: float
    c: float

    def drift(self, t, x):
        return -self.a * x - self.b * x**3

    def diffusion(self, t, x):
        return self.c * x

    def drift_dx(self, t, x):
        return -self.a - 3.0 * self.b * x * x


@dataclass(frozen=True)
class _CubicSqNoiseCoeffs:
    a: float
    b: float
    c: float

    def drift(self, t, x):
        return -self.a * x - self.b * x**3

    def diffusion(self, t, x):
        return self.c * x * x

    def drift_dx(self, t, x):
        return -self.a - 3.0 * self.b * x * x


@dataclass(frozen=True)
class _TimeLinearCubicCoeffs:
    p0: float
    p1: float
    b: float
    c: float

    def drift(self, t, x):
        return (self.p0 + self.p1 * t) * x - self.b * x**3

    def diffusion(self, t, x):
        return self.c * x

    def drift_dx(self, t, x):
        return (self.p0 + self.p1 * t) - 3.0 * self.b * x * x


def bs_exact_solution(x0, mu, sigma, e, b):
    """X_t = x0 exp((mu - sigma^2/2) E_t + sigma B_{E_t}) for the linear model."""
    x0 = _finite("x0", x0)
    mu = _finite("mu", mu)
    sigma = _finite("sigma", sigma)
    e = _finite("e", e)
    b = _finite("b", b)
    if x0 <= 0.0:
        raise DomainError(f"x0 must be positive, got {x0}")
    if sigma < 0.0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if e < 0.0:
        raise DomainError(f"internal time e must be >= 0, got {e}")
    return _GeometricExact(x0, mu, sigma)(e, b)


def _build_black_scholes(mu=0.02, sigma=0.2, x0=1.0):
    mu = _finite("mu", mu)
    sigma = _finite("sigma", sigma)
    x0 = _finite("x0", x0)
    if sigma <= 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if x0 <= 0.0:
        raise DomainError(f"x0 must be positive, got {x0}")
    c = _LinearCoeffs(mu, sigma)
    half = mu + 0.5 * sigma * sigma
    return ModelDescriptor(
        name="black_scholes", drift=c.drift, diffusion=c.diffusion, x0=x0,
        h=1.0, growth_c=max(abs(mu), sigma),
        # clip keeps the declared constant positive for strongly negative drift
        k1=max(half, 1e-9),
        k2=0.0, k3=0.0, k4=mu, k5=mu * mu,
        lam=(-half if half < 0.0 else None),
        drift_dx=c.drift_dx, exact_solution=_GeometricExact(x0, mu, sigma),
        zero_fixed_point=True, kernel_kind=0, kernel_params=(mu, sigma))


def _build_bounded_nonlinear(x0=1.0):
    c = _BoundedCoeffs()
    return ModelDescriptor(
        name="bounded_nonlinear", drift=c.drift, diffusion=c.diffusion,
        x0=_finite("x0", x0),
        h=1.0, growth_c=2.0, k1=1.0, k2=0.0, k3=0.0, k4=-1.0, k5=4.0, lam=0.5,
        drift_dx=c.drift_dx, zero_fixed_point=True, kernel_kind=1)


def _build_mean_reverting(kappa=0.65, level=0.05, amp=0.03, omega=_TWO_PI,
                          vol=0.4, vol_slope=0.05, x0=1.0):
    kappa = _finite("kappa", kappa)
    if kappa <= 0.0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    level = _finite("level", level)
    amp = _finite("amp", amp)
    omega = _finite("omega", omega)
    vol = _finite("vol", vol)
    vol_slope = _finite("vol_slope", vol_slope)
    c = _MeanRevertCoeffs(kappa, level, amp, omega, vol, vol_slope)
    return ModelDescriptor(
        name="mean_reverting", drift=c.drift, diffusion=c.diffusion,
        x0=_finite("x0", x0),
        # h=1 is declared for the drift side; the cubic diffusion violates
        # the growth and moment bounds at large |x|, which
        # validate_assumptions reports rather than hides
        h=1.0, k1=max(0.5 * kappa, 1e-9),
        k2=kappa * abs(amp) * abs(omega), k3=abs(vol * vol_slope), k4=-kappa,
        eta_f=1.0, eta_g=1.0,
        drift_dx=c.drift_dx, kernel_kind=2,
        kernel_params=(kappa, level, amp, omega, vol, vol_slope))


def _build_stability_linear(x0=1.0):
    mu, sigma = -2.0, 1.0
    c = _LinearCoeffs(mu, sigma)
    x0 = _finite("x0", x0)
    if x0 <= 0.0:
        raise DomainError(f"x0 must be positive, got {x0}")
    return ModelDescriptor(
        name="stability_linear", drift=c.drift, diffusion=c.diffusion, x0=x0,
        h=1.0, growth_c=2.0, k1=1.0, k2=0.0, k3=0.0, k4=mu,
        # declared rate for the benchmark configuration; the tightest
        # admissible value is 1.5, so the dissipation check reports slack
        lam=2.5, k5=4.0,
        drift_dx=c.drift_dx, exact_solution=_GeometricExact(x0, mu, sigma),
        zero_fixed_point=True, kernel_kind=0, kernel_params=(mu, sigma))


def _build_stability_cubic(x0=1.0):
    c = _CubicCoeffs(2.0, 1.0, 1.0)
    return ModelDescriptor(
        name="stability_cubic", drift=c.drift, diffusion=c.diffusion,
        x0=_finite("x0", x0),
        h=3.0, growth_c=2.0, k1=0.5, k2=0.0, k3=0.0, k4=-2.0, lam=1.5,
        drift_dx=c.drift_dx, zero_fixed_point=True, kernel_kind=3,
        kernel_params=(2.0, 1.0, 1.0))


def _build_stability_cubic_noise(x0=1.0):
    c = _CubicSqNoiseCoeffs(1.0, 1.0, 1.0)
    return ModelDescriptor(
        name="stability_cubic_noise", drift=c.drift, diffusion=c.diffusion,
        x0=_finite("x0", x0),
        # no admissible k1: x F + (2h-1)/2 G^2 grows like +1.5 x^4 at h=3
        h=3.0, growth_c=2.0, k2=0.0, k3=0.0, k4=-1.0, lam=1.0,
        drift_dx=c.drift_dx, zero_fixed_point=True, kernel_kind=4,
        kernel_params=(1.0, 1.0, 1.0))


def _build_stability_time_varying(x0=1.0):
    c = _TimeLinearCubicCoeffs(-1.0, -2.0, 1.0, 1.0)
    return ModelDescriptor(
        name="stability_time_varying", drift=c.drift, diffusion=c.diffusion,
        x0=_finite("x0", x0),
        h=3.0, k1=1.5, k2=2.0, k3=0.0, k4=-1.0, lam=0.5, eta_f=1.0,
        drift_dx=c.drift_dx, zero_fixed_point=True, kernel_kind=5,
        kernel_params=(-1.0, -2.0, 1.0, 1.0))


_BUILDERS = {
    "black_scholes": (_build_black_scholes, {"mu", "sigma", "x0"}),
    "bounded_nonlinear": (_build_bounded_nonlinear, {"x0"}),
    "mean_reverting": (_build_mean_reverting,
                       {"kappa", "level", "amp", "omega", "vol", "vol_slope", "x0"}),
    "stability_linear": (_build_stability_linear, {"x0"}),
    "stability_cubic": (_build_stability_cubic, {"x0"}),
    "stability_cubic_noise": (_build_stability_cubic_noise, {"x0"}),
    "stability_time_varying": (_build_stability_time_varying, {"x0"}),
}


def catalog():
    """Names of the builtin models, sorted."""
    return tuple(sorted(_BUILDERS))


def make_builtin(name, **params):
    """Instantiate a builtin model, optionally overriding its parameters."""
    if name not in _BUILDERS:
        raise ConfigError(
            f"unknown builtin model {name!r}; available: {', '.join(catalog())}",
            key="model.name")
    builder, allowed = _BUILDERS[name]
    extra = set(params) - allowed
    if extra:
        raise ConfigError(
            f"model {name!r} does not accept parameter(s) {sorted(extra)}; "
            f"allowed: {sorted(allowed)}", key=f"model.{sorted(extra)[0]}")
    return builder(**params)


# --- user expression models -------------------------------------------------

_EXPR_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp,
               "sqrt": math.sqrt, "abs": abs}
_EXPR_CONSTS = {"pi": math.pi, "e": math.e}
_EXPR_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_EXPR_UNARY = (ast.USub, ast.UAdd)


def _check_expr_node(node, source):
    if isinstance(node, ast.Expression):
        _check_expr_node(node.body, source)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _EXPR_BINOPS):
        _check_expr_node(node.left, source)
        _check_expr_node(node.right, source)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, _EXPR_UNARY):
        _check_expr_node(node.operand, source)
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ConfigError(
                f"non-numeric constant {node.value!r} in expression {source!r}")
    elif isinstance(node, ast.Name):
        if node.id not in ("t", "x") and node.id not in _EXPR_CONSTS:
            raise ConfigError(
                f"unknown name {node.id!r} in expression {source!r}; "
                f"allowed names: t, x, pi, e")
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _EXPR_FUNCS:
            raise ConfigError(
                f"disallowed call in expression {source!r}; allowed functions: "
                f"{', '.join(sorted(_EXPR_FUNCS))}")
        if node.keywords or len(node.args) != 1:
            raise ConfigError(
                f"functions in expressions take exactly one positional "
                f"argument ({source!r})")
        _check_expr_node(node.args[0], source)
    else:
        raise ConfigError(
            f"disallowed syntax {type(node).__name__} in expression {source!r}")


class ExpressionFn:
    """Callable (t, x) -> float compiled from a restricted expression.

    Allowed: +, -, *, /, **, numeric literals, names t and x, constants pi
    and e, and single-argument calls to sin, cos, exp, sqrt, abs.  Anything
    else is rejected at construction.  Instances pickle by source string.
    """

    def __init__(self, source):
        if not isinstance(source, str) or not source.strip():
            raise ConfigError(f"expression must be a nonempty string, got {source!r}")
        self.source = source
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {source!r}: {exc}") from None
        _check_expr_node(tree, source)
        self._code = compile(tree, "<model-expression>", "eval")
        self._env = {"__builtins__": {}}
        self._env.update(_EXPR_FUNCS)
        self._env.update(_EXPR_CONSTS)

    def __call__(self, t, x):
        return eval(self._code, self._env, {"t": t, "x": x})

    def __repr__(self):
        return f"ExpressionFn({self.source!r})"

    def __reduce__(self):
        return (ExpressionFn, (self.source,))


def make_expression_model(drift, diffusion, x0, name="expression",
                          drift_dx=None, **constants):
    """Model from expression strings in t and x.

    ``drift_dx`` optionally gives the x-derivative of the drift as another
    expression (the implicit solver falls back to finite differences
    without it).  Declared constants (h, growth_c, k1, ..., lam, eta_f,
    eta_g, zero_fixed_point) pass through as keywords.
    """
    allowed = {"h", "growth_c", "k1", "k2", "k3", "k4", "k5", "lam",
               "eta_f", "eta_g", "zero_fixed_point"}
    extra = set(constants) - allowed
    if extra:
        raise ConfigError(
            f"unknown model constant(s) {sorted(extra)}; allowed: "
            f"{sorted(allowed)}", key=f"model.{sorted(extra)[0]}")
    kw = dict(constants)
    for key in ("eta_f", "eta_g"):
        kw.setdefault(key, 1.0)
    return ModelDescriptor(
        name=str(name), drift=ExpressionFn(drift), diffusion=ExpressionFn(diffusion),
        x0=x0, drift_dx=(ExpressionFn(drift_dx) if drift_dx is not None else None),
        **kw)


# --- assumption validation --------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Validation sweep: t in [0, t_max] linear, x in [-x_max, x_max]
    sign-symmetric log-spaced (plus 0), n_t * n_x >= 1000 points."""

    t_max: float = 1.0
    x_max: float = 1.0e3
    n_t: int = 41
    n_x: int = 41

    def __post_init__(self):
        t_max = _finite("t_max", self.t_max)
        x_max = _finite("x_max", self.x_max)
        if t_max < 0.0:
            raise DomainError(f"t_max must be >= 0, got {t_max}")
        if x_max <= 0.0:
            raise DomainError(f"x_max must be positive, got {x_max}")
        for nm in ("n_t", "n_x"):
            v = getattr(self, nm)
            if not isinstance(v, int) or isinstance(v, bool) or v < 2:
                raise DomainError(f"{nm} must be an integer >= 2, got {v!r}")
        object.__setattr__(self, "t_max", t_max)
        object.__setattr__(self, "x_max", x_max)

    def t_grid(self):
        return np.linspace(0.0, self.t_max, self.n_t)

    def x_grid(self):
        half = max(2, (self.n_x - 1) // 2)
        mags = np.logspace(-3.0, math.log10(self.x_max), half)
        return np.concatenate([-mags[::-1], [0.0], mags])


@dataclass(frozen=True)
class AssumptionCheck:
    """Worst margin of one declared inequality over the sweep.

    margin <= 0 (up to rounding slack) means the declaration held
    everywhere on the grid; location is the (t, x) or (t, x, y) / (s, t, x)
    point attaining the worst margin.
    """

    name: str
    satisfied: bool
    margin: float
    location: tuple
    constants: tuple


@dataclass(frozen=True)
class AssumptionReport:
    model_name: str
    grid: GridSpec
    checks: tuple

    @property
    def ok(self):
        return all(c.satisfied for c in self.checks)

    def failed(self):
        return tuple(c.name for c in self.checks if not c.satisfied)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _worst(points_iter):
    """Max margin and its location over (margin, location, scale) triples."""
    worst_m = -math.inf
    worst_loc = ()
    worst_scale = 1.0
    for m, loc, scale in points_iter:
        if m > worst_m:
            worst_m, worst_loc, worst_scale = m, loc, scale
    return worst_m, worst_loc, worst_scale


def _check_result(name, margin, loc, scale, consts):
    tol = 1e-9 * max(1.0, abs(scale))
    margin = float(margin)
    loc = None if loc is None else tuple(float(v) for v in loc)
    return AssumptionCheck(name=name, satisfied=bool(margin <= tol),
                           margin=margin, location=loc,
                           constants=tuple(sorted(consts.items())))


_CHECK_REQUIREMENTS = {
    "zero_fixed_point": (),
    "growth": ("h", "growth_c"),
    "monotone_moment": ("h", "k1"),
    "temporal_drift": ("k2",),
    "temporal_diffusion": ("k3",),
    "one_sided_lipschitz": ("k4",),
    "dissipation": ("lam",),
    "drift_quadratic": ("k5",),
}


def validate_assumptions(model, grid=None, checks=None):
    """Sweep the grid and report worst margins for declared inequalities.

    With ``checks=None`` every check whose constants are declared runs
    (zero_fixed_point runs iff the model declares the flag).  Explicitly
    requesting a check whose constants are missing raises ConfigError
    naming the constant.
    """
    if not isinstance(model, ModelDescriptor):
        raise DomainError(f"expected a ModelDescriptor, got {model!r}")
    grid = grid if grid is not None else GridSpec()
    if not isinstance(grid, GridSpec):
        raise DomainError(f"expected a GridSpec, got {grid!r}")
    if grid.n_t * grid.n_x < 1000:
        raise DomainError(
            f"validation grid too coarse: n_t * n_x = {grid.n_t * grid.n_x} < 1000")

    available = []
    for name, needs in _CHECK_REQUIREMENTS.items():
        if name == "zero_fixed_point":
            if model.zero_fixed_point:
                available.append(name)
            continue
        if all(getattr(model, c) is not None for c in needs):
            available.append(name)

    if checks is None:
        selected = available
    else:
        selected = list(checks)
        for name in selected:
            if name not in _CHECK_REQUIREMENTS:
                raise ConfigError(
                    f"unknown assumption check {name!r}; known: "
                    f"{', '.join(sorted(_CHECK_REQUIREMENTS))}", key="checks")
            if name == "zero_fixed_point":
                continue
            for c in _CHECK_REQUIREMENTS[name]:
                if getattr(model, c) is None:
                    raise ConfigError(
                        f"check {name!r} needs the model constant {c!r}, "
                        f"which {model.name!r} does not declare", key=f"model.{c}")

    ts = grid.t_grid()
    xs = grid.x_grid()
    # coarse subgrids keep the pairwise checks at a few thousand evaluations
    ts_pairs = ts[:: max(1, (len(ts) - 1) // 10)]
    xs_pairs = xs[:: max(1, (len(xs) - 1) // 20)]
    F, G = model.drift, model.diffusion

    results = []
    for name in selected:
        if name == "zero_fixed_point":
            pts = ((max(abs(F(t, 0.0)), abs(G(t, 0.0))), (t, 0.0), 1.0) for t in ts)
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale, {}))
        elif name == "growth":
            C, h = model.growth_c, model.h
            pts = ((max(abs(F(t, x)), abs(G(t, x))) - C * (1.0 + abs(x) ** h),
                    (t, x), C * (1.0 + abs(x) ** h))
                   for t in ts for x in xs)
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale,
                                         {"growth_c": C, "h": h}))
        elif name == "monotone_moment":
            k1, h = model.k1, model.h
            w = (2.0 * h - 1.0) / 2.0
            pts = ((x * F(t, x) + w * G(t, x) ** 2 - k1 * (1.0 + x * x),
                    (t, x), k1 * (1.0 + x * x))
                   for t in ts for x in xs)
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale,
                                         {"k1": k1, "h": h}))
        elif name == "temporal_drift":
            k2, eta = model.k2, model.eta_f
            pts = ((abs(F(s, x) - F(t, x)) - k2 * (1.0 + abs(x)) * abs(s - t) ** eta,
                    (s, t, x), k2 * (1.0 + abs(x)) * abs(s - t) ** eta)
                   for i, s in enumerate(ts_pairs) for t in ts_pairs[i + 1:]
                   for x in xs)
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale,
                                         {"k2": k2, "eta_f": eta}))
        elif name == "temporal_diffusion":
            k3, eta = model.k3, model.eta_g
            pts = ((abs(G(s, x) - G(t, x)) - k3 * (1.0 + abs(x)) * abs(s - t) ** eta,
                    (s, t, x), k3 * (1.0 + abs(x)) * abs(s - t) ** eta)
                   for i, s in enumerate(ts_pairs) for t in ts_pairs[i + 1:]
                   for x in xs)
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale,
                                         {"k3": k3, "eta_g": eta}))
        elif name == "one_sided_lipschitz":
            k4 = model.k4
            pts = (((x - y) * (F(t, x) - F(t, y)) - k4 * (x - y) ** 2,
                    (t, x, y), max(1.0, abs(k4) * (x - y) ** 2))
                   for t in ts_pairs for i, x in enumerate(xs_pairs)
                   for y in xs_pairs[i + 1:])
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale, {"k4": k4}))
        elif name == "dissipation":
            lam = model.lam
            pts = ((x * F(t, x) + 0.5 * G(t, x) ** 2 + lam * x * x,
                    (t, x), max(1.0, lam * x * x))
                   for t in ts for x in xs)
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale, {"lam": lam}))
        elif name == "drift_quadratic":
            k5 = model.k5
            pts = ((F(t, x) ** 2 - k5 * x * x, (t, x), max(1.0, k5 * x * x))
                   for t in ts for x in xs)
            m, loc, scale = _worst(pts)
            results.append(_check_result(name, m, loc, scale, {"k5": k5}))

    return AssumptionReport(model_name=model.name, grid=grid,
                            checks=tuple(results))


class Asymptotics(enum.Enum):
    """Large-time behavior of the linear model along the inverse clock."""

    DIVERGES = "diverges"
    VANISHES = "vanishes"
    OSCILLATES = "oscillates"


def classify_asymptotics(mu, sigma):
    """Classify x0 exp((mu - sigma^2/2) E_t + sigma B_{E_t}) as t -> inf.

    The sign of mu - sigma^2/2 decides: positive diverges, negative
    vanishes, and within 1e-12 of zero the exponent is recurrent
    (oscillates).
    """
    mu = _finite("mu", mu)
    sigma = _finite("sigma", sigma)
    if sigma < 0.0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    d = mu - 0.5 * sigma * sigma
    if abs(d) <= 1e-12:
        return Asymptotics.OSCILLATES
    return Asymptotics.DIVERGES if d > 0.0 else Asymptotics.VANISHES
