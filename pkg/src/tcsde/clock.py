"""Random clocks: stable subordinator paths and their step-function inverses.

The driving clock is an a-stable subordinator D sampled on the internal
grid {n delta} through the positive-stable transform of uniform/exponential
draws.  Its generalized inverse E_t = inf{u : D_u > t} is approximated by
the step function

    Etilde_t = n delta    for t in [D_{n delta}, D_{(n+1) delta}),

which brackets the true inverse within one internal step:
E_t - delta <= Etilde_t <= E_t pathwise.  Paths are generated until the
first grid value exceeding the requested horizon, so the stopping index N
satisfies D_{N delta} <= horizon < D_{(N+1) delta}.

For strong-error studies :func:`sample_coupled` draws one fine-resolution
realization and exposes coarser resolutions as exact subsamples of the fine
cumulative sums (common random numbers); the sandwich inequalities between
resolutions then hold pathwise, not just in distribution.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import ConfigError, DomainError, ResourceError
from .special_fn import _as_alpha

__all__ = [
    "SubordinatorPath",
    "InverseSubordinatorPath",
    "BrownianDriver",
    "CoupledPaths",
    "sample_stable_increment",
    "stable_increments",
    "simulate_subordinator",
    "simulate_subordinator_steps",
    "invert_path",
    "brownian_increments",
    "sample_coupled",
]

_BLOCK = 4096

# Hard cap on internal grid length; beyond this the run is misconfigured
# (horizon too large for delta) rather than unlucky.
_LENGTH_CAP = 10**9


def _check_delta(delta):
    if not isinstance(delta, (int, float)) or isinstance(delta, bool):
        raise DomainError(f"delta must be a real number, got {delta!r}")
    delta = float(delta)
    if not math.isfinite(delta) or delta <= 0.0:
        raise DomainError(f"delta must be positive and finite, got {delta}")
    return delta


@dataclass(frozen=True)
class SubordinatorPath:
    """Subordinator values D_{n delta} for n = 0 .. N+1.

    values[0] = 0, values are strictly increasing, and the last complete
    index N = len(values) - 2 satisfies values[N] <= horizon < values[N+1].
    """

    alpha: float
    delta: float
    values: np.ndarray
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_alpha(self.alpha))
        object.__setattr__(self, "delta", _check_delta(self.delta))
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.shape[0] < 2:
            raise DomainError("a subordinator path needs at least two grid values")
        if v[0] != 0.0:
            raise DomainError(f"subordinator paths start at 0, got values[0]={v[0]}")
        if not np.all(np.diff(v) > 0.0):
            raise DomainError("subordinator values must be strictly increasing")
        if not (v[-2] <= self.horizon < v[-1]):
            raise DomainError(
                f"horizon {self.horizon} must satisfy values[-2] <= horizon < "
                f"values[-1] (got {v[-2]} .. {v[-1]})")

    @property
    def n_complete(self):
        """Stopping index N: number of complete internal steps before the
        path first exceeds the horizon."""
        return self.values.shape[0] - 2

    def inverse(self):
        return InverseSubordinatorPath(self)


@dataclass(frozen=True)
class InverseSubordinatorPath:
    """Step-function approximation of the inverse clock of one path."""

    source: SubordinatorPath

    @property
    def jump_size(self):
        return self.source.delta

    def __call__(self, t):
        return invert_path(self.source, t)


def invert_path(path, t):
    """Etilde_t = n delta with D_{n delta} <= t < D_{(n+1) delta}.

    Accepts scalars or arrays; t must lie in [0, horizon].
    """
    if isinstance(path, InverseSubordinatorPath):
        path = path.source
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.size and (np.min(t_arr) < 0.0 or np.max(t_arr) > path.horizon):
        raise DomainError(
            f"evaluation times must lie in [0, {path.horizon}], got range "
            f"[{np.min(t_arr)}, {np.max(t_arr)}]")
    n = np.searchsorted(path.values, t_arr, side="right") - 1
    out = n * path.delta
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def sample_stable_increment(alpha, delta, rng):
    """One increment of D over an internal step delta.

    Draws U ~ Uniform(0, pi) then W ~ Exp(1).  At alpha = 1 the clock is
    deterministic and the increment is exactly delta (no draws consumed).
    """
    a = _as_alpha(alpha)
    delta = _check_delta(delta)
    if a == 1.0:
        return delta
    u = rng.uniform(0.0, math.pi)
    w = rng.standard_exponential()
    s = math.sin(a * u) / math.sin(u) ** (1.0 / a)
    s *= (math.sin((1.0 - a) * u) / w) ** ((1.0 - a) / a)
    return delta ** (1.0 / a) * s


def stable_increments(alpha, delta, n, rng):
    """n i.i.d. increments of D; one block of U draws, then one of W."""
    a = _as_alpha(alpha)
    delta = _check_delta(delta)
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    if a == 1.0:
        return np.full(n, delta)
    u = rng.uniform(0.0, math.pi, n)
    w = rng.standard_exponential(n)
    return backend.stable_transform(a, delta ** (1.0 / a), u, w)


def _grow_until(alpha, delta, horizon, rng):
    """Draw increments in fixed blocks until the cumulative sum exceeds
    horizon; returns (cumulative values including 0, first-exceed index j)
    where j is the 0-based increment index whose partial sum first exceeds.

    The block size is fixed so the draw pattern depends only on where the
    path crosses, keeping coupled consumers reproducible.
    """
    chunks = [np.zeros(1)]
    last = 0.0
    n_drawn = 0
    while True:
        z = stable_increments(alpha, delta, _BLOCK, rng)
        c = last + np.cumsum(z)
        chunks.append(c)
        n_drawn += _BLOCK
        last = float(c[-1])
        if last > horizon:
            break
        if n_drawn > _LENGTH_CAP:
            raise ResourceError(
                f"subordinator path exceeded {_LENGTH_CAP} internal steps "
                f"before reaching horizon {horizon}; delta={delta} is too "
                f"small for this horizon")
    values = np.concatenate(chunks)
    j = int(np.searchsorted(values, horizon, side="right")) - 1
    # values[j] <= horizon < values[j+1]; increment index is j (0-based)
    return values, j


def simulate_subordinator(alpha, delta, horizon, rng):
    """Sample D on {n delta} until it first exceeds horizon."""
    a = _as_alpha(alpha)
    delta = _check_delta(delta)
    if not isinstance(horizon, (int, float)) or isinstance(horizon, bool):
        raise DomainError(f"horizon must be a real number, got {horizon!r}")
    horizon = float(horizon)
    if not math.isfinite(horizon) or horizon <= 0.0:
        raise DomainError(f"horizon must be positive and finite, got {horizon}")
    values, j = _grow_until(a, delta, horizon, rng)
    return SubordinatorPath(alpha=a, delta=delta, values=values[: j + 2],
                            horizon=horizon)


def simulate_subordinator_steps(alpha, delta, n_steps, rng):
    """Path with exactly n_steps complete internal steps.

    For runs parameterized by step count rather than external horizon
    (mean-square stability curves).  The recorded horizon is D at the last
    complete step, so the stopping-index invariant holds with N = n_steps.
    """
    a = _as_alpha(alpha)
    delta = _check_delta(delta)
    if not isinstance(n_steps, int) or isinstance(n_steps, bool) or n_steps < 1:
        raise DomainError(f"n_steps must be a positive integer, got {n_steps!r}")
    if n_steps > _LENGTH_CAP:
        raise ResourceError(f"n_steps {n_steps} exceeds the path cap {_LENGTH_CAP}")
    z = stable_increments(a, delta, n_steps + 1, rng)
    values = np.concatenate([np.zeros(1), np.cumsum(z)])
    return SubordinatorPath(alpha=a, delta=delta, values=values,
                            horizon=float(values[-2]))


def brownian_increments(n, delta, rng):
    """n increments of B over internal steps of size delta."""
    delta = _check_delta(delta)
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    return rng.normal(0.0, math.sqrt(delta), n)


@dataclass(frozen=True)
class BrownianDriver:
    """Brownian increments over the internal grid of one resolution."""

    delta: float
    increments: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta", _check_delta(self.delta))
        inc = np.asarray(self.increments, dtype=np.float64)
        object.__setattr__(self, "increments", inc)
        if inc.ndim != 1:
            raise DomainError("Brownian increments must form a 1-d array")

    @classmethod
    def sample(cls, n, delta, rng):
        return cls(delta=delta, increments=brownian_increments(n, delta, rng))

    def cumulative(self):
        """B on the grid, starting from B_0 = 0."""
        return np.concatenate([np.zeros(1), np.cumsum(self.increments)])


@dataclass(frozen=True)
class CoupledPaths:
    """One fine-resolution (clock, noise) realization plus coarse views.

    d_values and b_values hold the fine cumulative clock and Brownian path
    on 0 .. n_fine internal grid points, extended past the horizon crossing
    to a common multiple of every coarsening ratio.  Coarse resolutions are
    produced by subsampling the cumulative arrays, so coarse increments are
    exact partial sums of fine increments.
    """

    alpha: float
    delta_fine: float
    horizon: float
    d_values: np.ndarray
    b_values: np.ndarray
    ratios: tuple = field(default_factory=tuple)

    def fine_path(self):
        j = int(np.searchsorted(self.d_values, self.horizon, side="right")) - 1
        return SubordinatorPath(alpha=self.alpha, delta=self.delta_fine,
                                values=self.d_values[: j + 2],
                                horizon=self.horizon)

    def fine_driver(self):
        return BrownianDriver(delta=self.delta_fine,
                              increments=np.diff(self.b_values))

    def coarsen(self, m):
        """(SubordinatorPath, BrownianDriver) at resolution m * delta_fine."""
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise DomainError(f"coarsening ratio must be a positive integer, got {m!r}")
        if (self.d_values.shape[0] - 1) % m != 0:
            raise DomainError(
                f"ratio {m} does not divide the stored fine grid "
                f"({self.d_values.shape[0] - 1} increments)")
        dc = self.d_values[::m]
        bc = self.b_values[::m]
        j = int(np.searchsorted(dc, self.horizon, side="right")) - 1
        delta_c = m * self.delta_fine
        path = SubordinatorPath(alpha=self.alpha, delta=delta_c,
                                values=dc[: j + 2], horizon=self.horizon)
        driver = BrownianDriver(delta=delta_c, increments=np.diff(bc[: j + 1]))
        return path, driver


def sample_coupled(alpha, delta_fine, horizon, ratios, clock_rng, noise_rng):
    """Draw one fine realization supporting the given coarsening ratios.

    The fine clock is drawn in fixed blocks until it crosses the horizon,
    then extended to a multiple of lcm(ratios) increments so every coarse
    view is a pure prefix subsample.  The Brownian fine increments are
    drawn in a single call once the clock length is known, making the draw
    pattern a deterministic function of the clock path alone.
    """
    a = _as_alpha(alpha)
    delta_fine = _check_delta(delta_fine)
    if not ratios:
        raise DomainError("at least one coarsening ratio is required")
    ratios = tuple(int(m) for m in ratios)
    if any(m < 1 for m in ratios):
        raise DomainError(f"coarsening ratios must be positive integers, got {ratios}")
    if not isinstance(horizon, (int, float)) or isinstance(horizon, bool):
        raise DomainError(f"horizon must be a real number, got {horizon!r}")
    horizon = float(horizon)
    if not math.isfinite(horizon) or horizon <= 0.0:
        raise DomainError(f"horizon must be positive and finite, got {horizon}")

    lcm = 1
    for m in ratios:
        lcm = lcm * m // math.gcd(lcm, m)

    values, j = _grow_until(a, delta_fine, horizon, clock_rng)
    # extend so that every coarse view still contains the crossing
    n_need = ((j + 1 + lcm - 1) // lcm) * lcm
    while values.shape[0] - 1 < n_need:
        extra = stable_increments(a, delta_fine, _BLOCK, clock_rng)
        values = np.concatenate([values, values[-1] + np.cumsum(extra)])
    d_values = values[: n_need + 1]
    db = brownian_increments(n_need, delta_fine, noise_rng)
    b_values = np.concatenate([np.zeros(1), np.cumsum(db)])
    return CoupledPaths(alpha=a, delta_fine=delta_fine, horizon=horizon,
                        d_values=d_values, b_values=b_values, ratios=ratios)
