"""Scalar special functions for inverse-subordinator moment formulas.

This module provides log-gamma, the one-parameter Mittag-Leffler function
E_a(z) = sum_k z^k / Gamma(a k + 1), and the closed-form moments of the
inverse E_t of an a-stable subordinator:

    E[E_t^p]          = Gamma(p+1) / Gamma(a p + 1) * t^(a p)
    E[exp(xi E_t^r)]  = sum_k xi^k/k! * Gamma(r k+1)/Gamma(a r k+1) * t^(a r k)

The exponential moment is finite iff r < 1/(1-a); on the boundary the
classification is not determined at working precision and a query there
raises :class:`BoundaryUndetermined`.  All functions here are pure and
deterministic.
"""

import math
from dataclasses import dataclass

import mpmath

from .errors import BoundaryUndetermined, DomainError, EvaluationError

__all__ = [
    "SERIES_TERM_CAP",
    "StabilityIndex",
    "MomentQuery",
    "Divergent",
    "DIVERGENT",
    "log_gamma",
    "mittag_leffler",
    "inverse_subordinator_moment",
    "exp_moment_series",
    "exact_moment_bound",
]

SERIES_TERM_CAP = 10_000

# Below this point the alternating series is abandoned for the algebraic
# tail expansion.
_ASYMPTOTIC_CUTOFF = -40.0

# Escalate to arbitrary precision once the largest series term exceeds the
# partial sum by this many decimal digits; past it double arithmetic has
# lost too much to cancellation to meet the accuracy contract.
_LOG10_CANCELLATION_LIMIT = 4.0

# math.exp overflows just above this; terms past it cannot be formed in
# doubles at all.
_LOG_DBL_MAX = 709.0
_LN10 = math.log(10.0)

# If the escalated evaluation would need more working digits than this the
# tail expansion is used instead (it is extremely accurate exactly in the
# regimes, small a with z near the cutoff, that drive the digit count up).
_MAX_ESCALATION_DIGITS = 300

_TINY = 1.0e-300


@dataclass(frozen=True)
class StabilityIndex:
    """Index a of the driving stable subordinator, 0 < a <= 1.

    a = 1 is admitted as the deterministic-clock limit (D_t = t, E_t = t)
    so degenerate sanity checks can run through the same code paths.
    """

    alpha: float

    def __post_init__(self):
        a = self.alpha
        if not isinstance(a, (int, float)) or isinstance(a, bool):
            raise DomainError(f"stability index must be a real number, got {a!r}")
        a = float(a)
        if not math.isfinite(a) or not 0.0 < a <= 1.0:
            raise DomainError(f"stability index must lie in (0, 1], got {a}")
        object.__setattr__(self, "alpha", a)

    def __float__(self):
        return self.alpha


def _as_alpha(alpha):
    """Accept a StabilityIndex or a bare number; return the validated float."""
    if isinstance(alpha, StabilityIndex):
        return alpha.alpha
    return StabilityIndex(alpha).alpha


@dataclass(frozen=True)
class MomentQuery:
    """Query for the exponential moment E[exp(xi * E_t^r)].

    p is the integer moment order used by companion polynomial-moment
    checks; r and xi parameterize the exponential functional; t >= 0 is the
    external time.  xi = 0 is allowed (the moment is then exactly 1).
    """

    p: int = 1
    r: float = 1.0
    xi: float = 1.0
    t: float = 1.0

    def __post_init__(self):
        if not isinstance(self.p, int) or isinstance(self.p, bool) or self.p < 1:
            raise DomainError(f"moment order p must be an integer >= 1, got {self.p!r}")
        for name in ("r", "xi", "t"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.r <= 0.0:
            raise DomainError(f"exponent r must be positive, got {self.r}")
        if self.xi < 0.0:
            raise DomainError(f"weight xi must be >= 0, got {self.xi}")
        if self.t < 0.0:
            raise DomainError(f"time t must be >= 0, got {self.t}")


class Divergent:
    """Marker for a provably infinite exponential moment."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Divergent"


DIVERGENT = Divergent()


def log_gamma(x):
    """Natural log of Gamma(x) for x > 0."""
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        raise DomainError(f"log_gamma expects a real number, got {x!r}")
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _series_double(alpha, z):
    """Kahan-compensated power series pass in doubles.

    Returns (total, hump_log10).  Terms are formed in log space so z^k
    cannot overflow on its own; hump_log10 is the largest term magnitude in
    decimal digits.  Since |E_a(z)| <= 1 on the negative axis, the hump
    height bounds how many digits the alternating sum cancelled, which is
    what the caller needs to pick an escalation precision.  A term too
    large for doubles aborts the pass: a positive sum is then honestly
    +inf, while for negative z the log-space scan continues to the hump
    top (log-magnitude is concave in k, so the first decrease is the peak).
    """
    log_az = math.log(abs(z))
    total = 1.0
    comp = 0.0
    max_log = 0.0
    prev_mag = math.inf
    negative = z < 0.0
    for k in range(1, SERIES_TERM_CAP + 1):
        log_mag = k * log_az - math.lgamma(alpha * k + 1.0)
        if log_mag > _LOG_DBL_MAX:
            if not negative:
                return math.inf, 0.0
            prev = log_mag
            max_log = max(max_log, log_mag)
            for j in range(k + 1, SERIES_TERM_CAP + 1):
                lm = j * log_az - math.lgamma(alpha * j + 1.0)
                max_log = max(max_log, lm)
                if lm < prev:
                    break
                prev = lm
            return total, max_log / _LN10
        mag = math.exp(log_mag)
        term = -mag if (negative and k % 2 == 1) else mag
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if log_mag > max_log:
            max_log = log_mag
        if math.isinf(total):
            return total, max_log / _LN10
        if mag <= prev_mag and mag <= 1.0e-17 * max(abs(total), _TINY):
            return total, max_log / _LN10
        prev_mag = mag
    raise EvaluationError(
        f"Mittag-Leffler series did not converge within {SERIES_TERM_CAP} terms "
        f"(alpha={alpha}, z={z})",
        partial_sum=total,
        terms=SERIES_TERM_CAP,
    )


def _series_escalated(alpha, z, digits):
    """Re-sum the series with mpmath once cancellation defeats doubles."""
    with mpmath.workdps(digits):
        total = mpmath.mpf(1)
        aa = mpmath.mpf(alpha)  # argument must not round through a double
        zz = mpmath.mpf(z)
        zk = mpmath.mpf(1)
        log_floor = mpmath.mpf(10) ** (-(digits - 10))
        max_term = mpmath.mpf(1)
        prev_mag = mpmath.inf
        for k in range(1, SERIES_TERM_CAP + 1):
            zk *= zz
            term = zk / mpmath.gamma(aa * k + 1)
            total += term
            mag = abs(term)
            if mag > max_term:
                max_term = mag
            # stop once terms have fallen far below the hump; the sum after
            # cancellation is guaranteed >= max_term * 10^-(digits-30)
            if mag <= prev_mag and mag <= max_term * log_floor:
                break
            prev_mag = mag
        else:
            raise EvaluationError(
                f"escalated Mittag-Leffler series did not converge within "
                f"{SERIES_TERM_CAP} terms (alpha={alpha}, z={z})",
                partial_sum=float(total),
                terms=SERIES_TERM_CAP,
            )
        return float(total)


def _asymptotic_negative(alpha, z):
    """Algebraic tail E_a(z) ~ -sum_{k>=1} z^-k / Gamma(1 - a k) for z << 0.

    Terms are evaluated in log space (Gamma(1 - a k) overflows long before
    the truncation point for small a) and the divergent expansion is cut at
    its smallest term.
    """
    log_az = math.log(-z)
    total = 0.0
    comp = 0.0
    prev_mag = math.inf
    for k in range(1, SERIES_TERM_CAP + 1):
        w = 1.0 - alpha * k
        if w > 0.0:
            log_recip = -math.lgamma(w)
            sign_recip = 1.0
        else:
            if w == round(w):
                continue  # pole of Gamma: the term vanishes exactly
            s = math.sin(math.pi * w)
            log_recip = math.log(abs(s)) + math.lgamma(1.0 - w) - math.log(math.pi)
            sign_recip = 1.0 if s > 0.0 else -1.0
        log_mag = log_recip - k * log_az
        if log_mag > prev_mag:
            break  # smallest term reached; truncate the divergent tail
        prev_mag = log_mag
        mag = math.exp(log_mag)
        sign = -sign_recip if k % 2 == 0 else sign_recip
        term = sign * mag
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if mag <= 1.0e-17 * max(abs(total), _TINY):
            break
    return total


def mittag_leffler(alpha, z):
    """One-parameter Mittag-Leffler function E_a(z).

    Strategy: exact exp at a = 1; Kahan-summed power series for moderate z
    with a two-pass precision escalation when the alternating sum cancels
    too heavily for doubles; smallest-term algebraic tail for z below the
    series cutoff.  Divergence to +inf for large positive z is reported as
    inf, and a series that fails to converge within the term cap raises
    :class:`EvaluationError` carrying the partial sum.
    """
    a = _as_alpha(alpha)
    if not isinstance(z, (int, float)) or isinstance(z, bool):
        raise DomainError(f"mittag_leffler expects real z, got {z!r}")
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"mittag_leffler requires finite z, got {z}")
    if a == 1.0:
        # deterministic-clock limit; the series cannot reach full precision
        # near large negative z, the closed form is exact
        try:
            return math.exp(z)
        except OverflowError:
            return math.inf
    if z == 0.0:
        return 1.0
    if z <= _ASYMPTOTIC_CUTOFF:
        return _asymptotic_negative(a, z)
    total, hump_log10 = _series_double(a, z)
    if z < 0.0 and hump_log10 > _LOG10_CANCELLATION_LIMIT:
        digits = 30 + int(hump_log10)
        if digits > _MAX_ESCALATION_DIGITS:
            return _asymptotic_negative(a, z)
        return _series_escalated(a, z, digits)
    return total


def inverse_subordinator_moment(alpha, p, t):
    """E[E_t^p] = Gamma(p+1)/Gamma(a p + 1) * t^(a p) for integer p >= 1."""
    a = _as_alpha(alpha)
    if not isinstance(p, int) or isinstance(p, bool) or p < 1:
        raise DomainError(f"moment order p must be an integer >= 1, got {p!r}")
    if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t) or t < 0:
        raise DomainError(f"time t must be finite and >= 0, got {t!r}")
    t = float(t)
    if t == 0.0:
        return 0.0
    return math.exp(math.lgamma(p + 1.0) - math.lgamma(a * p + 1.0)) * t ** (a * p)


def exp_moment_series(alpha, query, max_terms=SERIES_TERM_CAP):
    """E[exp(xi * E_t^r)] by direct series summation.

    Returns the float value when the series converges, or the
    :data:`DIVERGENT` marker when r exceeds the finiteness boundary
    1/(1-a).  A query within 1e-9 of the boundary raises
    :class:`BoundaryUndetermined`; exceeding ``max_terms`` raises
    :class:`EvaluationError` with the partial sum attached.
    """
    a = _as_alpha(alpha)
    if not isinstance(query, MomentQuery):
        raise DomainError(f"expected a MomentQuery, got {query!r}")
    if not isinstance(max_terms, int) or isinstance(max_terms, bool) or max_terms < 16:
        raise DomainError(f"max_terms must be an integer >= 16, got {max_terms!r}")
    r, xi, t = query.r, query.xi, query.t
    if a < 1.0:
        boundary = 1.0 / (1.0 - a)
        if abs(r - boundary) <= 1.0e-9:
            raise BoundaryUndetermined(
                f"r={r} lies within 1e-9 of the finiteness boundary {boundary} "
                f"for alpha={a}; classification is undetermined"
            )
        if r > boundary:
            return DIVERGENT
    if xi == 0.0 or t == 0.0:
        return 1.0  # every k >= 1 term vanishes
    log_xi = math.log(xi)
    log_t = math.log(t)
    total = 1.0
    comp = 0.0
    for k in range(1, max_terms + 1):
        log_term = (
            k * log_xi
            - math.lgamma(k + 1.0)
            + math.lgamma(r * k + 1.0)
            - math.lgamma(a * r * k + 1.0)
            + a * r * k * log_t
        )
        term = math.exp(log_term)
        y = term - comp
        tt = total + y
        comp = (tt - total) - y
        total = tt
        if math.isinf(total):
            return math.inf
        if term < 1.0e-14 * total:
            return total
    raise EvaluationError(
        f"exponential moment series did not converge within {max_terms} terms "
        f"(alpha={a}, r={r}, xi={xi}, t={t})",
        partial_sum=total,
        terms=max_terms,
    )


def exact_moment_bound(alpha, h, k1, t, x0):
    """Closed-form 2h-th moment bound 2^(h-1) E_a(2 h K1 t^a) (1 + |x0|^(2h)).

    Valid for drift/diffusion pairs satisfying the one-sided polynomial
    moment condition with constants (h, K1).
    """
    a = _as_alpha(alpha)
    for name, v in (("h", h), ("k1", k1)):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise DomainError(f"{name} must be a finite real number, got {v!r}")
    h = float(h)
    k1 = float(k1)
    if h < 1.0:
        raise DomainError(f"h must be >= 1, got {h}")
    if k1 <= 0.0:
        raise DomainError(f"k1 must be positive, got {k1}")
    if not isinstance(t, (int, float)) or isinstance(t, bool) or not math.isfinite(t) or t < 0:
        raise DomainError(f"time t must be finite and >= 0, got {t!r}")
    t = float(t)
    x0 = float(x0)
    z = 2.0 * h * k1 * t**a
    return 2.0 ** (h - 1.0) * mittag_leffler(a, z) * (1.0 + abs(x0) ** (2.0 * h))
