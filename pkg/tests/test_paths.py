import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealpaths.deformed_math import DomainError, RangeError, RepresentationFn, q_exp, q_log
from annealpaths.density import DensityError, GridSupport, gaussian, integral, integrate, normalize, table
from annealpaths.paths import (
    NORMALIZE_OUTPUT,
    BernoulliFamily,
    GaussianFamily,
    check_weights,
    make_path,
    moment_average_path,
    normalized_mixture_constant,
    quasi_arithmetic_mean,
    reparameterize_from_masses,
    reparameterize_normalized_q_mixture,
)

R = RepresentationFn
GRID = GridSupport(-10.0, 10.0, 2001)


def test_q2_mean_of_two_points():
    p0, p1 = table([1.0, 4.0]), table([4.0, 1.0])
    m = quasi_arithmetic_mean([p0, p1], [0.5, 0.5], R.logq(2.0))
    np.testing.assert_allclose(m.values, [1.6, 1.6], rtol=1e-15)


@pytest.mark.parametrize("rep,expected", [
    (R.identity(), [2.5, 2.5]),
    (R.log(), [2.0, 2.0]),
    (R.logq(0.5), [2.25, 2.25]),
    (R.logq(-1.0), [math.sqrt(8.5), math.sqrt(8.5)]),
])
def test_two_point_means(rep, expected):
    m = quasi_arithmetic_mean([table([1.0, 4.0]), table([4.0, 1.0])], [0.5, 0.5], rep)
    np.testing.assert_allclose(m.values, expected, rtol=1e-14)


def test_path_endpoints_are_exact():
    p0, p1 = gaussian(0.0, 1.0, support=GRID), gaussian(4.0, 1.0, support=GRID)
    for rep in [R.log(), R.logq(0.5), R.logq(2.0)]:
        path = make_path(p0, p1, rep)
        np.testing.assert_array_equal(path.values(0.0), p0.values)
        np.testing.assert_array_equal(path.values(1.0), p1.values)


def test_geometric_path_midpoint_is_gaussian():
    p0, p1 = gaussian(0.0, 1.0, support=GRID), gaussian(4.0, 1.0, support=GRID)
    mid = make_path(p0, p1, R.log()).evaluate(0.5)
    expected = gaussian(2.0, 1.0, scale=math.exp(-2.0), support=GRID)
    np.testing.assert_allclose(mid.values, expected.values, rtol=1e-12, atol=1e-300)
    assert int(np.argmax(mid.values)) == 1200


def test_normalize_output_policy():
    p0, p1 = gaussian(0.0, 1.0, 2.0, GRID), gaussian(4.0, 1.0, 3.0, GRID)
    d = make_path(p0, p1, R.logq(0.5), NORMALIZE_OUTPUT).evaluate(0.3)
    assert integral(d) == pytest.approx(1.0, abs=1e-14)


def test_quasi_arithmetic_mean_multiple_inputs():
    xs = [table([1.0, 2.0, 3.0]), table([2.0, 2.0, 2.0]), table([9.0, 1.0, 0.5])]
    w = [0.2, 0.3, 0.5]
    m = quasi_arithmetic_mean(xs, w, R.logq(0.5))
    manual = q_exp(sum(wi * q_log(x.values, 0.5) for wi, x in zip(w, xs)), 0.5)
    np.testing.assert_allclose(m.values, manual, rtol=1e-14)


def test_single_nonzero_weight_returns_input():
    xs = [table([1.0, 0.0]), table([2.0, 3.0])]
    m = quasi_arithmetic_mean(xs, [1.0, 0.0], R.log())
    np.testing.assert_array_equal(m.values, [1.0, 0.0])


@pytest.mark.parametrize("w", [[0.5, 0.6], [-0.1, 1.1], [1.0], [math.nan, 1.0]])
def test_check_weights_rejects(w):
    with pytest.raises(ValueError):
        check_weights(w, 2)


def test_weights_tolerance():
    check_weights([0.5, 0.5 + 5e-13])
    with pytest.raises(ValueError):
        check_weights([0.5, 0.5 + 1e-11])


def test_zero_endpoint_rejected_for_log_representation():
    p0 = table([1.0, 0.0])
    with pytest.raises(DomainError, match="x=1.0"):
        make_path(p0, table([1.0, 1.0]), R.log())
    # zeros are rejected for deformed logs too
    with pytest.raises(DomainError):
        make_path(p0, table([1.0, 1.0]), R.logq(0.5))
    make_path(p0, table([1.0, 1.0]), R.identity())


def test_mismatched_supports_rejected():
    with pytest.raises(DensityError):
        make_path(table([1.0, 1.0]), table([1.0, 1.0, 1.0]), R.log())


def test_representation_ranges():
    # a convex mean of in-range values stays in range, so the boundary is checked directly
    assert not R.logq(0.5).in_range(np.array([-2.0]))[0]
    assert R.logq(0.5).in_range(np.array([-1.999]))[0]
    assert not R.logq(2.0).in_range(np.array([1.0]))[0]
    assert R.log().in_range(np.array([-1e300]))[0]


def test_clipped_mean_is_zero():
    # log_0.5 maps (0, inf) onto (-2, inf); a representation mean at -2 or below clips to zero
    assert q_exp(-2.5, 0.5) == 0.0
    # log_0.5(1e-300) rounds to exactly -2, the open boundary of the range
    xs = [table([1e-300, 1.0]), table([2e-300, 1.0])]
    with pytest.raises(RangeError, match="x=0.0"):
        quasi_arithmetic_mean(xs, [0.5, 0.5], R.logq(0.5))
    m = quasi_arithmetic_mean(xs, [0.5, 0.5], R.logq(0.5), clip=True)
    np.testing.assert_array_equal(m.values, [0.0, 1.0])


def test_beta_out_of_range():
    path = make_path(table([1.0]), table([2.0]), R.log())
    with pytest.raises(ValueError):
        path.values(1.5)


def test_reparameterization_example():
    assert reparameterize_from_masses(1.0, 2.0, 0.5, 2.0) == pytest.approx(2.0 / 3.0, abs=1e-15)


@pytest.mark.parametrize("q", [0.0, 0.5, 2.0, -1.0])
@pytest.mark.parametrize("beta", [0.2, 0.5, 0.9])
def test_normalized_q_mixture_matches_reweighted_unnormalized(q, beta):
    p0 = gaussian(0.0, 1.0, 2.0, GRID)
    p1 = gaussian(1.0, 1.5, 0.5, GRID)
    rep = R.logq(q)
    normalized = quasi_arithmetic_mean([normalize(p0), normalize(p1)], [1 - beta, beta], rep, clip=True)
    bp = reparameterize_normalized_q_mixture(p0, p1, beta, q)
    unnorm = quasi_arithmetic_mean([p0, p1], [1 - bp, bp], rep, clip=True)
    c = normalized_mixture_constant(p0, p1, beta, q)
    # rho^-1 amplifies rounding in the tails: by 1/u^(1-q) for q < 1, which for q < 0
    # leaves only about sqrt(eps) absolute resolution
    atol = (1e-7 if q < 0 else 1e-14) * unnorm.values.max()
    np.testing.assert_allclose(normalized.values * c, unnorm.values, rtol=1e-10, atol=atol)


def test_reparameterization_is_stable_for_huge_mass_ratios():
    bp = reparameterize_from_masses(1e-300, 1e300, 0.5, 2.0)
    assert bp == pytest.approx(1.0)
    assert reparameterize_from_masses(1.0, 5.0, 0.3, 1.0) == 0.3


@settings(max_examples=40, deadline=None)
@given(q=st.floats(-1.0, 3.0), beta=st.floats(0.0, 1.0), z0=st.floats(1e-3, 1e3), z1=st.floats(1e-3, 1e3))
def test_reparameterized_beta_in_unit_interval(q, beta, z0, z1):
    bp = reparameterize_from_masses(z0, z1, beta, q)
    assert 0.0 <= bp <= 1.0


def test_moment_average_gaussian():
    fam = GaussianFamily()
    th = moment_average_path(fam, fam.natural(0.0, 1.0), fam.natural(2.0, 4.0), 0.5)
    mean, var = fam.mean_var(th)
    # oracle: average the raw moments by quadrature on a wide grid
    sup = GridSupport(-30.0, 30.0, 6001)
    d0, d1 = gaussian(0.0, 1.0, support=sup), gaussian(2.0, 2.0, support=sup)
    m = 0.5 * (integrate(d0, sup.nodes() * d0.values) + integrate(d1, sup.nodes() * d1.values))
    s = 0.5 * (integrate(d0, sup.nodes() ** 2 * d0.values) + integrate(d1, sup.nodes() ** 2 * d1.values))
    assert mean == pytest.approx(m, abs=1e-9)
    assert var == pytest.approx(s - m * m, abs=1e-9)
    assert (mean, var) == pytest.approx((1.0, 3.5), abs=1e-12)


def test_moment_average_endpoints():
    fam = GaussianFamily()
    t0, t1 = fam.natural(0.0, 1.0), fam.natural(2.0, 4.0)
    np.testing.assert_array_equal(moment_average_path(fam, t0, t1, 0.0), t0)
    np.testing.assert_array_equal(moment_average_path(fam, t0, t1, 1.0), t1)


def test_moment_average_bernoulli():
    fam = BernoulliFamily()
    th = moment_average_path(fam, [0.0], [math.log(3.0)], 0.5)
    # means 0.5 and 0.75 average to 0.625
    assert th[0] == pytest.approx(math.log(0.625 / 0.375), abs=1e-14)


def test_gaussian_family_rejects_bad_parameters():
    with pytest.raises(DomainError):
        GaussianFamily.natural(0.0, 0.0)
    with pytest.raises(DomainError):
        GaussianFamily().eta_inv([1.0, 0.5])
