"""Special-function layer: Mittag-Leffler evaluation and moment formulas."""

import math

import numpy as np
import pytest

from tcsde.errors import (BoundaryUndetermined, DomainError, EvaluationError)
from tcsde.special_fn import (DIVERGENT, MomentQuery, StabilityIndex,
                              exact_moment_bound, exp_moment_series,
                              inverse_subordinator_moment, log_gamma,
                              mittag_leffler)

import oracles


# --- stability index and query types --------------------------------------

def test_stability_index_accepts_unit_interval():
    assert float(StabilityIndex(0.9)) == 0.9
    assert float(StabilityIndex(1.0)) == 1.0
    assert float(StabilityIndex(1e-6)) == 1e-6


@pytest.mark.parametrize("bad", [0.0, -0.5, 1.0000001, 1.5, float("nan"),
                                 float("inf")])
def test_stability_index_rejects_out_of_range(bad):
    with pytest.raises(DomainError):
        StabilityIndex(bad)


def test_moment_query_validation():
    q = MomentQuery(p=2, r=1.5, xi=0.0, t=3.0)
    assert q.p == 2 and q.r == 1.5
    with pytest.raises(DomainError):
        MomentQuery(p=0, r=1.0, xi=1.0, t=1.0)
    with pytest.raises(DomainError):
        MomentQuery(p=1, r=-1.0, xi=1.0, t=1.0)
    with pytest.raises(DomainError):
        MomentQuery(p=1, r=1.0, xi=-0.1, t=1.0)
    with pytest.raises(DomainError):
        MomentQuery(p=1, r=1.0, xi=1.0, t=-1.0)


# --- Mittag-Leffler -------------------------------------------------------

def test_ml_alpha_one_is_exp_on_grid():
    # E_1(z) = exp(z); the alpha=1 branch delegates to math.exp
    zs = np.linspace(-10.0, 10.0, 1000)
    for z in zs:
        assert mittag_leffler(1.0, float(z)) == math.exp(z)


def test_ml_at_zero_is_one():
    for alpha in (0.1, 0.5, 0.9, 1.0):
        assert mittag_leffler(alpha, 0.0) == 1.0


@pytest.mark.parametrize("alpha,z,expected,tol", [
    (0.5, -1.0, oracles.ML_HALF_NEG1, 1e-12),
    (0.5, 1.0, oracles.ML_HALF_POS1, 1e-13),
    (0.9, 2.0, oracles.ML_09_POS2, 1e-13),
    (0.9, -3.0, oracles.ML_09_NEG3, 1e-12),
    (0.55, -5.0, oracles.ML_055_NEG5, 1e-12),
    (0.5, -50.0, oracles.ML_HALF_NEG50, 1e-10),
    (0.75, -39.0, oracles.ML_075_NEG39, 1e-10),
    (0.75, -41.0, oracles.ML_075_NEG41, 1e-10),
    (0.9, -100.0, oracles.ML_09_NEG100, 1e-10),
])
def test_ml_frozen_oracles(alpha, z, expected, tol):
    got = mittag_leffler(alpha, z)
    assert abs(got - expected) <= tol * abs(expected)


def test_ml_continuous_across_asymptotic_cutoff():
    # the series/asymptotic switch at z = -40 must not produce a jump
    left = mittag_leffler(0.75, -40.0 - 1e-9)
    right = mittag_leffler(0.75, -40.0 + 1e-9)
    assert abs(left - right) <= 1e-6 * right


def test_ml_negative_axis_positive_and_decreasing():
    # complete monotonicity on the negative axis for 0 < alpha <= 1
    for alpha in (0.3, 0.6, 0.9):
        zs = np.linspace(0.0, -30.0, 121)
        vals = [mittag_leffler(alpha, float(z)) for z in zs]
        assert all(v > 0.0 for v in vals)
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_ml_large_positive_overflows_to_inf():
    assert mittag_leffler(1.0, 1000.0) == math.inf
    assert mittag_leffler(0.9, 1000.0) == math.inf


def test_ml_rejects_bad_alpha():
    with pytest.raises(DomainError):
        mittag_leffler(0.0, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(1.2, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(0.9, float("nan"))


def test_ml_accepts_stability_index_wrapper():
    a = StabilityIndex(0.9)
    assert mittag_leffler(a, 2.0) == mittag_leffler(0.9, 2.0)


# --- log-gamma ------------------------------------------------------------

def test_log_gamma_spot_value():
    assert abs(log_gamma(2.8) - oracles.LOG_GAMMA_2P8) <= 1e-14


def test_log_gamma_matches_libm_on_grid():
    rng = np.random.default_rng(123456789)
    for x in rng.uniform(1e-3, 50.0, 200):
        assert log_gamma(float(x)) == math.lgamma(x)


def test_log_gamma_rejects_nonpositive():
    for bad in (0.0, -1.0, float("inf")):
        with pytest.raises(DomainError):
            log_gamma(bad)


# --- inverse-clock moments ------------------------------------------------

@pytest.mark.parametrize("alpha,p,t,expected", [
    (0.9, 1, 1.0, oracles.INV_GAMMA_1P9),
    (0.9, 1, 0.5, oracles.MOMENT_1_09_T05),
    (0.9, 2, 1.0, oracles.MOMENT_2_09_T1),
    (0.5, 3, 1.0, oracles.MOMENT_3_05_T1),
    (0.5, 1, 1.0, oracles.INV_GAMMA_1P5),
])
def test_moment_formula_frozen_oracles(alpha, p, t, expected):
    got = inverse_subordinator_moment(alpha, p, t)
    assert abs(got - expected) <= 1e-13 * abs(expected)


def test_moment_formula_alpha_one_collapses_to_powers():
    # E_t = t when alpha = 1, so E[E_t^p] = t^p
    for p in (1, 2, 5):
        for t in (0.25, 1.0, 3.0):
            got = inverse_subordinator_moment(1.0, p, t)
            assert abs(got - t**p) <= 1e-12 * t**p


def test_moment_formula_zero_time():
    assert inverse_subordinator_moment(0.9, 2, 0.0) == 0.0


def test_moment_formula_rejects_bad_order():
    with pytest.raises(DomainError):
        inverse_subordinator_moment(0.9, 0, 1.0)
    with pytest.raises(DomainError):
        inverse_subordinator_moment(0.9, 1.5, 1.0)
    with pytest.raises(DomainError):
        inverse_subordinator_moment(0.9, 1, -1.0)


# --- exponential moments --------------------------------------------------

def test_exp_moment_series_reduces_to_ml():
    q = MomentQuery(p=1, r=1.0, xi=2.0, t=1.0)
    got = exp_moment_series(0.9, q)
    assert abs(got - oracles.EXP_MOMENT_09_XI2) <= 1e-12 * oracles.EXP_MOMENT_09_XI2


def test_exp_moment_series_divergence_flag():
    # finiteness boundary is r = 1/(1-alpha) = 2 at alpha = 0.5
    q = MomentQuery(p=1, r=3.0, xi=1.0, t=1.0)
    assert exp_moment_series(0.5, q) is DIVERGENT


def test_exp_moment_series_boundary_raises():
    q = MomentQuery(p=1, r=2.0, xi=1.0, t=1.0)
    with pytest.raises(BoundaryUndetermined):
        exp_moment_series(0.5, q)
    # just off the 1e-9 band classifies cleanly
    assert exp_moment_series(0.5, MomentQuery(p=1, r=2.0 + 1e-6, xi=1.0,
                                              t=1.0)) is DIVERGENT


def test_exp_moment_series_trivial_cases():
    assert exp_moment_series(0.9, MomentQuery(p=1, r=1.0, xi=0.0, t=1.0)) == 1.0
    assert exp_moment_series(0.9, MomentQuery(p=1, r=1.0, xi=2.0, t=0.0)) == 1.0


def test_exp_moment_series_alpha_one_no_boundary():
    # no finiteness boundary at alpha = 1; r = 2 is fine there
    got = exp_moment_series(1.0, MomentQuery(p=1, r=1.0, xi=0.5, t=1.0))
    assert abs(got - math.exp(0.5)) <= 1e-12 * math.exp(0.5)


def test_exp_moment_series_term_cap_raises():
    q = MomentQuery(p=1, r=1.0, xi=30.0, t=1.0)
    with pytest.raises(EvaluationError) as err:
        exp_moment_series(0.9, q, max_terms=16)
    assert err.value.partial_sum > 0.0
    assert err.value.terms == 16


# --- a-priori moment bound ------------------------------------------------

def test_exact_moment_bound_spot():
    got = exact_moment_bound(0.9, 1.0, 1.0, 1.0, 1.0)
    assert abs(got - oracles.BOUND_SPOT_09) <= 1e-12 * oracles.BOUND_SPOT_09


def test_exact_moment_bound_monotone_in_time():
    ts = [0.0, 0.25, 0.5, 1.0, 2.0]
    vals = [exact_moment_bound(0.9, 1.0, 1.0, t, 1.0) for t in ts]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    # t = 0 collapses to 2^{h-1} (1 + |x0|^{2h})
    assert vals[0] == 2.0


def test_exact_moment_bound_rejects_bad_constants():
    with pytest.raises(DomainError):
        exact_moment_bound(0.9, 0.5, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        exact_moment_bound(0.9, 1.0, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        exact_moment_bound(0.9, 1.0, 1.0, -1.0, 1.0)
