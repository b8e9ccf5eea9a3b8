import math

import numpy as np
import pytest
from scipy import stats

from annealpaths.deformed_math import RepresentationFn
from annealpaths.density import GridSupport, gaussian, integral, table
from annealpaths.paths import make_path
from annealpaths.sampler import (
    AisConfig,
    DegenerateWeightsError,
    ExactResample,
    RandomWalkMH,
    Schedule,
    block_rng,
    effective_sample_size,
    log_sum_exp_mean,
    mh_kernel_step,
    run_ais,
    sample_density,
)

R = RepresentationFn
TOY = make_path(table([1.0, 1.0]), table([2.0, 6.0]), R.log())
GRID = GridSupport(-10.0, 10.0, 2001)


def test_log_sum_exp_mean_examples():
    assert log_sum_exp_mean([0.0, 0.0, 0.0, 0.0]) == 0.0
    assert log_sum_exp_mean([0.0, math.log(3.0)]) == pytest.approx(math.log(2.0), abs=1e-15)
    assert log_sum_exp_mean([1000.0, 1000.0 + math.log(3.0)]) == pytest.approx(1000.0 + math.log(2.0), abs=1e-12)
    with pytest.raises(ValueError):
        log_sum_exp_mean([])


def test_effective_sample_size_bounds():
    assert effective_sample_size(np.zeros(10)) == pytest.approx(10.0)
    assert effective_sample_size([0.0, -np.inf, -np.inf]) == pytest.approx(1.0)


@pytest.mark.parametrize("betas", [(0.0,), (0.0, 0.5), (0.1, 1.0), (0.0, 0.6, 0.4, 1.0), (0.0, 0.5, 0.5, 1.0)])
def test_schedule_validation(betas):
    with pytest.raises(ValueError):
        Schedule(betas)


def test_linear_schedule():
    s = Schedule.linear(4)
    assert s.betas == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert s.T == 4
    with pytest.raises(ValueError):
        Schedule.linear(0)


@pytest.mark.parametrize("kw", [{"chains": 0}, {"seed": -1}, {"seed": 2 ** 64}, {"block_size": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        AisConfig(TOY, Schedule.linear(2), **kw)


@pytest.mark.parametrize("kw", [{"step": 0.0}, {"sweeps": 0}, {"sweeps": 1.5}])
def test_kernel_validation(kw):
    with pytest.raises(ValueError):
        RandomWalkMH(**kw)


def test_two_state_toy_estimate():
    res = run_ais(AisConfig(TOY, Schedule.linear(10), ExactResample(), chains=100_000, seed=7))
    assert abs(res.ratio_estimate - 4.0) <= 3 * res.stderr
    assert 0 < res.ess <= res.chains
    assert res.log_ratio_estimate == pytest.approx(math.log(res.ratio_estimate))


def test_identical_endpoints_give_exactly_one():
    p = gaussian(support=GRID)
    res = run_ais(AisConfig(make_path(p, p, R.logq(0.5)), Schedule.linear(5), RandomWalkMH(0.5), chains=200))
    assert np.all(res.log_weights == 0.0)
    assert res.ratio_estimate == 1.0


def test_single_step_is_importance_sampling():
    res = run_ais(AisConfig(TOY, Schedule.linear(1), chains=1000, seed=3, record_trace=True))
    # each weight is p1(x0)/p0(x0), one of 2 or 6
    np.testing.assert_allclose(np.sort(np.unique(np.exp(res.log_weights))), [2.0, 6.0])
    assert res.ratio_estimate == pytest.approx(float(np.mean(np.exp(res.log_weights))), rel=1e-14)


def test_trace_ends_at_log_weights():
    res = run_ais(AisConfig(TOY, Schedule.linear(4), chains=50, record_trace=True))
    assert res.trace.shape == (50, 4)
    np.testing.assert_array_equal(res.trace[:, -1], res.log_weights)


@pytest.mark.parametrize("kernel", [ExactResample(), RandomWalkMH(0.7, 2)])
def test_seed_determinism_across_workers(kernel):
    path = make_path(gaussian(support=GRID), gaussian(2.0, 1.5, 3.0, GRID), R.logq(0.5))
    cfg = AisConfig(path, Schedule.linear(6), kernel, chains=3000, seed=12345, block_size=256)
    a, b = run_ais(cfg, workers=1), run_ais(cfg, workers=4)
    np.testing.assert_array_equal(a.log_weights, b.log_weights)
    np.testing.assert_array_equal(a.acceptance_rates, b.acceptance_rates)
    assert a.to_dict() == b.to_dict()
    c = run_ais(AisConfig(path, Schedule.linear(6), kernel, chains=3000, seed=12346, block_size=256))
    assert not np.array_equal(a.log_weights, c.log_weights)


def test_path_invariance_of_estimand():
    p0 = gaussian(0.0, 1.0, support=GRID)
    p1 = gaussian(1.0, 1.5, 3.0, GRID)
    truth = integral(p1) / integral(p0)
    results = []
    for rep in (R.log(), R.logq(0.5)):
        cfg = AisConfig(make_path(p0, p1, rep), Schedule.linear(20), ExactResample(), chains=20_000, seed=5)
        results.append(run_ais(cfg))
    g, q = results
    assert abs(g.ratio_estimate - q.ratio_estimate) <= 3 * math.hypot(g.stderr, q.stderr)
    for r in results:
        assert abs(r.ratio_estimate - truth) <= 3 * r.stderr


def test_metropolis_kernel_estimate():
    p0 = gaussian(0.0, 1.0, support=GRID)
    p1 = gaussian(1.0, 1.5, 3.0, GRID)
    truth = integral(p1) / integral(p0)
    res = run_ais(AisConfig(make_path(p0, p1, R.log()), Schedule.linear(30), RandomWalkMH(1.0, 2), 20_000, seed=9))
    assert abs(res.ratio_estimate - truth) <= 4 * res.stderr
    assert res.acceptance_rates[0] == 1.0
    assert np.all((res.acceptance_rates[1:] > 0.2) & (res.acceptance_rates[1:] < 1.0))


def test_tiny_step_always_accepted():
    p0, p1 = gaussian(support=GRID), gaussian(1.0, support=GRID)
    res = run_ais(AisConfig(make_path(p0, p1, R.log()), Schedule.linear(3), RandomWalkMH(1e-5), chains=500))
    np.testing.assert_array_equal(res.acceptance_rates, 1.0)


def test_uphill_proposals_always_accepted():
    target = table([1.0, 10.0, 1.0])
    x = np.zeros(10_000, dtype=np.int64)
    # from state 0 both cyclic neighbours have density >= 1
    new, accepted = mh_kernel_step(target, x, 1.0, block_rng(0, 0))
    assert np.all(accepted)
    assert set(np.unique(new)) == {1, 2}


def test_mh_stationary_distribution_chi_square():
    target = table([1.0, 2.0, 3.0])
    rng = block_rng(2024, 0)
    x = np.zeros(1_000_000, dtype=np.int64)
    for _ in range(40):
        x, _ = mh_kernel_step(target, x, 1.0, rng)
    counts = np.bincount(x, minlength=3)
    p = stats.chisquare(counts, f_exp=np.array([1.0, 2.0, 3.0]) / 6.0 * x.size).pvalue
    assert p > 0.01


def test_mh_preserves_target_on_grid():
    target = gaussian(0.5, 1.2, support=GRID)
    x = sample_density(target, 100_000, block_rng(11, 0))
    y, _ = mh_kernel_step(target, x, 0.8, block_rng(11, 1))
    ref = sample_density(target, 100_000, block_rng(11, 2))
    nodes = GRID.nodes()
    assert stats.ks_2samp(nodes[y], nodes[ref]).pvalue > 0.01


def test_mh_rejects_zero_density_state():
    with pytest.raises(ValueError):
        mh_kernel_step(table([0.0, 1.0]), np.array([0]), 1.0, block_rng(0, 0))


def test_degenerate_weights():
    path = make_path(table([1.0, 0.0]), table([0.0, 1.0]), R.identity())
    with pytest.raises(DegenerateWeightsError):
        run_ais(AisConfig(path, Schedule.linear(1), chains=10))


def test_sample_density_frequencies():
    d = table([1.0, 0.0, 3.0])
    x = sample_density(d, 200_000, block_rng(1, 0))
    assert not np.any(x == 1)
    assert np.mean(x == 2) == pytest.approx(0.75, abs=0.005)


def test_result_dict_fields():
    res = run_ais(AisConfig(TOY, Schedule.linear(3), chains=10, seed=4))
    assert set(res.to_dict()) == {"ratio_estimate", "log_ratio_estimate", "ess", "K", "T", "acceptance_rates", "seed"}
