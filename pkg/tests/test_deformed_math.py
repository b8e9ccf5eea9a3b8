import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealpaths.deformed_math import (
    DomainError,
    RepresentationFn,
    adaptive_simpson,
    alpha_pair,
    beta_pair,
    cichocki_pair,
    euclidean_pair,
    kl_pair,
    make_pair,
    q_exp,
    q_log,
)

R = RepresentationFn


def series_q_log(u, q, terms=80):
    # log_q(u) = sum_k (1-q)^k (ln u)^(k+1) / (k+1)!
    lu = math.log(u)
    total, term = 0.0, lu
    for k in range(terms):
        total += term
        term *= (1.0 - q) * lu / (k + 2)
    return total


@pytest.mark.parametrize("q", [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
def test_q_log_of_one_is_zero(q):
    assert q_log(1.0, q) == 0.0


def test_q_log_at_q_one_is_natural_log():
    assert q_log(math.e, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_q_log_two_at_q_two():
    assert q_log(2.0, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert series_q_log(2.0, 2.0) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("q", [2.0 - 1e-3, 2.0 + 1e-3, 1.0 + 1e-5, 1.0 - 1e-6, 1.0 + 2e-8, 0.5])
@pytest.mark.parametrize("u", [0.1, 0.7, 2.0, 9.0])
def test_q_log_matches_series(q, u):
    assert q_log(u, q) == pytest.approx(series_q_log(u, q), rel=1e-10)


@pytest.mark.parametrize("u", [0.1, 0.5, 2.0, 10.0])
@pytest.mark.parametrize("q", [1.0 - 1e-9, 1.0 + 1e-9])
def test_q_log_continuous_at_one(u, q):
    assert abs(q_log(u, q) - math.log(u)) <= 1e-6


@pytest.mark.parametrize("u", [0.0, -1.0, np.array([1.0, 0.0])])
def test_q_log_rejects_nonpositive(u):
    with pytest.raises(DomainError):
        q_log(u, 0.5)


@pytest.mark.parametrize("q", [-2.0, 0.5, 1.0, 2.0])
def test_q_exp_at_zero(q):
    assert q_exp(0.0, q) == 1.0


def test_q_exp_inverts_q_log():
    assert q_exp(q_log(3.0, 0.5), 0.5) == pytest.approx(3.0, rel=1e-15)


def test_q_exp_clips_to_zero():
    # 1 + 0.5 * (-5) < 0
    assert q_exp(-5.0, 0.5) == 0.0
    assert q_exp(-2.0, 0.5) == 0.0  # base exactly zero


def test_q_exp_clipped_branch_for_q_above_one():
    # base 1 + (1-q) t <= 0 happens for large t when q > 1
    assert q_exp(2.0, 2.0) == 0.0
    assert q_exp(0.5, 2.0) == pytest.approx(2.0)


def test_q_exp_overflow_saturates():
    assert q_exp(1e6, 1.0) == math.inf
    assert q_exp(1e300, 0.5) == math.inf


def test_q_exp_vectorized():
    t = np.array([-5.0, 0.0, 1.0])
    np.testing.assert_allclose(q_exp(t, 0.5), [0.0, 1.0, 2.25])


@settings(max_examples=60, deadline=None)
@given(q=st.floats(-0.5, 2.5), u=st.floats(1e-3, 1e3))
def test_q_exp_q_log_round_trip(q, u):
    assert q_exp(q_log(u, q), q) == pytest.approx(u, rel=1e-9)


REPS = [R.identity(), R.log(), R.logq(0.5), R.logq(2.0), R.logq(-1.0), R.log_one_minus_lambda(0.5),
        R.log_one_minus_lambda(1.5), R.logq(0.5).affine(3.0, -1.0)]


@pytest.mark.parametrize("rep", REPS, ids=lambda r: r.label())
def test_representation_inverse_round_trip(rep):
    # exp_q near its pole amplifies rounding by roughly u^(q-1), so keep the range moderate
    u = np.geomspace(1e-3, 1e3, 241)
    np.testing.assert_allclose(rep.inverse(rep.apply(u)), u, rtol=1e-9)


@pytest.mark.parametrize("rep", REPS, ids=lambda r: r.label())
def test_representation_increasing_with_positive_slope(rep):
    u = np.geomspace(1e-3, 1e3, 301)
    assert np.all(np.diff(rep.apply(u)) > 0)
    assert np.all(rep.d1(u) > 0)


@pytest.mark.parametrize("rep", REPS, ids=lambda r: r.label())
@pytest.mark.parametrize("u", [0.3, 1.0, 4.0])
def test_representation_derivatives_match_differences(rep, u):
    h = 1e-5 * u
    fd1 = (rep.apply(u + h) - rep.apply(u - h)) / (2 * h)
    assert rep.d1(u) == pytest.approx(fd1, rel=1e-8)
    h2 = 1e-3 * u
    fd2 = (rep.d1(u + h2) - rep.d1(u - h2)) / (2 * h2)
    assert rep.d2(u) == pytest.approx(fd2, rel=1e-5, abs=1e-12)


def test_log_one_minus_lambda_is_deformed_log():
    u = np.array([0.2, 1.7])
    np.testing.assert_allclose(R.log_one_minus_lambda(0.3).apply(u), (u ** 0.3 - 1) / 0.3, rtol=1e-14)


@pytest.mark.parametrize("q", [0.2, 0.5, 1.0, 2.0])
def test_q_log_concave_for_positive_q(q):
    u = np.linspace(0.1, 10, 200)
    h = 1e-3
    second = (q_log(u + h, q) - 2 * q_log(u, q) + q_log(u - h, q)) / h ** 2
    assert np.all(second <= 1e-10)


CATALOG = [kl_pair(), euclidean_pair(), alpha_pair(0.5), alpha_pair(2.0), beta_pair(0.5), beta_pair(2.0),
           cichocki_pair(0.5, 0.5), cichocki_pair(0.5, 1.5), cichocki_pair(2.0, 0.5), cichocki_pair(2.0, 1.5),
           make_pair(R.log(), R.log()), make_pair(R.logq(0.3), R.log()), make_pair(R.logq(1.5), R.log_one_minus_lambda(0.5))]


@pytest.mark.parametrize("pair", CATALOG, ids=lambda p: p.label())
def test_conjugacy_on_random_points(pair):
    rng = np.random.default_rng(11)
    u = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), 200))
    tau = pair.tau.apply(u)
    err = np.abs(pair.f_prime(pair.rho.apply(u)) - tau)
    assert np.all(err <= 1e-10 * (1 + np.abs(tau)))


@pytest.mark.parametrize("pair", CATALOG, ids=lambda p: p.label())
def test_derivative_of_f_is_tau(pair):
    u = np.array([0.2, 0.9, 1.3, 5.0])
    y = pair.rho.apply(u)
    h = 1e-6 * np.maximum(1.0, np.abs(y))
    fd = (pair.f(y + h) - pair.f(y - h)) / (2 * h)
    np.testing.assert_allclose(fd, pair.tau.apply(u), rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("pair", CATALOG, ids=lambda p: p.label())
def test_conjugate_derivative_is_rho(pair):
    u = np.array([0.2, 0.9, 1.3, 5.0])
    t = pair.tau.apply(u)
    h = 1e-6 * np.maximum(1.0, np.abs(t))
    fd = (pair.f_conj(t + h) - pair.f_conj(t - h)) / (2 * h)
    np.testing.assert_allclose(fd, pair.rho.apply(u), rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("pair", CATALOG, ids=lambda p: p.label())
def test_young_equality(pair):
    u = np.geomspace(1e-2, 1e2, 50)
    r, t = pair.rho.apply(u), pair.tau.apply(u)
    lhs = pair.f(r) + pair.f_conj(t)
    np.testing.assert_allclose(lhs, r * t, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("pair", CATALOG, ids=lambda p: p.label())
def test_f_convex(pair):
    u = np.geomspace(1e-2, 1e2, 200)
    y = pair.rho.apply(u)
    h = 1e-4
    second = (pair.f(y[1:-1] + h) - 2 * pair.f(y[1:-1]) + pair.f(y[1:-1] - h)) / h ** 2
    assert np.all(second >= -1e-10 * np.maximum(1, np.abs(pair.f(y[1:-1]))) / h ** 2 * 1e-6)
    assert np.all(pair.f_second(y) > 0)


def test_kl_pair_generators():
    pair = kl_pair()
    t = np.array([0.3, 1.0, 2.5])
    # conjugate is exactly t log t - t + 1
    np.testing.assert_allclose(pair.f_conj(t), t * np.log(t) - t + 1, rtol=1e-14, atol=1e-16)
    # f differs from exp(r) - r - 1 only by an affine term
    y = np.linspace(-2, 2, 9)
    diff = pair.f(y) - (np.exp(y) - y - 1)
    np.testing.assert_allclose(np.diff(diff, 2), 0.0, atol=1e-13)


@pytest.mark.parametrize("q,lam", [(0.5, 0.5), (0.5, 1.5), (2.0, 0.5), (-0.5, 2.0)])
def test_deformed_pair_generator_closed_form(q, lam):
    pair = cichocki_pair(q, lam)
    y = pair.rho.apply(np.array([0.2, 1.0, 3.0]))
    L = lam + 1 - q
    expected = q_exp(y, q) ** L / (lam * L) - y / lam - 1 / (lam * L)
    np.testing.assert_allclose(pair.f(y), expected, rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("q", [0.5, 1.5, -1.0])
def test_beta_pair_generators(q):
    pair = beta_pair(q)
    y = pair.rho.apply(np.array([0.2, 1.0, 3.0]))
    f_closed = np.maximum(1 + (1 - q) * y, 0) ** ((2 - q) / (1 - q)) / (2 - q) - 1 / (2 - q)
    np.testing.assert_allclose(pair.f(y), f_closed, rtol=1e-13, atol=1e-14)
    t = np.array([0.2, 1.0, 3.0])
    conj = t ** (2 - q) / ((1 - q) * (2 - q)) - t / (1 - q) + 1 / (2 - q)
    np.testing.assert_allclose(pair.f_conj(t), conj, rtol=1e-12, atol=1e-13)


def test_identity_pair_is_half_square():
    pair = euclidean_pair()
    y = np.array([-1.0, 0.0, 3.0])
    np.testing.assert_allclose(pair.f(y), 0.5 * y * y)
    np.testing.assert_allclose(pair.f_prime(y), y)


def test_numerical_generator_for_affine_representation():
    c, a = 2.0, 1.0
    pair = make_pair(R.log().affine(c, a), R.identity())
    assert pair.source == "numerical"
    ref = kl_pair()
    u = np.array([0.5, 2.0])
    y_ref = ref.rho.apply(u)
    y = pair.rho.apply(u)
    # f_new(y) = c f_ref((y - a)/c) up to an affine term, so second differences agree
    h = 1e-2
    d2_new = (pair.f(y + c * h) - 2 * pair.f(y) + pair.f(y - c * h))
    d2_ref = c * (ref.f(y_ref + h) - 2 * ref.f(y_ref) + ref.f(y_ref - h))
    np.testing.assert_allclose(d2_new, d2_ref, rtol=1e-9)
    assert pair.f(pair.rho.apply(1.0)) == 0.0


def test_dual_pair_swaps_roles():
    pair = cichocki_pair(0.5, 1.5)
    dual = pair.dual()
    assert dual.rho == pair.tau and dual.tau == pair.rho
    u = np.array([0.4, 2.2])
    np.testing.assert_allclose(dual.f_prime(dual.rho.apply(u)), dual.tau.apply(u), rtol=1e-12)


def test_affine_representation_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        R.log().affine(0.0, 1.0)


def test_adaptive_simpson_polynomial_and_exp():
    assert adaptive_simpson(lambda s: s ** 3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-13)
    assert adaptive_simpson(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1, abs=1e-12)
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(1 - math.e, abs=1e-12)
