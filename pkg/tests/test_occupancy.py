import numpy as np
import pytest

from bedcast.los import deterministic_survival, geometric_survival
from bedcast.occupancy import forecast_occupancy
from bedcast.residual import ResidualSurvival, stationary_residual


def resid_from(tail):
    return ResidualSurvival(tail=np.asarray(tail, dtype=float))


def test_emptying_census_no_arrivals():
    # deterministic residual of two more mornings: P(S_r >= t) = 1 for t <= 2
    resid = resid_from([1.0, 1.0, 1.0, 0.0])
    surv = deterministic_survival(2)
    fc = forecast_occupancy(10, resid, np.zeros(4), surv)
    np.testing.assert_allclose(fc.mean, [10, 10, 0, 0], atol=1e-12)
    np.testing.assert_allclose(fc.variance, 0.0, atol=1e-12)
    assert np.all(np.diff(fc.mean) <= 1e-12)


def test_poisson_stream_deterministic_two_day_stay():
    # hand evaluation of both sums: mean (5, 10, 10), variance (5, 10, 10)
    surv = deterministic_survival(2)
    resid = stationary_residual(surv)
    fc = forecast_occupancy(
        0, resid, np.full(3, 5.0), surv, admissions_variance=np.full(3, 5.0)
    )
    np.testing.assert_allclose(fc.mean, [5.0, 10.0, 10.0], atol=1e-12)
    np.testing.assert_allclose(fc.variance, [5.0, 10.0, 10.0], atol=1e-12)


def test_binomial_census_variance():
    resid = resid_from([1.0, 0.5, 0.25])
    surv = deterministic_survival(1)
    fc = forecast_occupancy(100, resid, np.zeros(2), surv)
    np.testing.assert_allclose(fc.variance, [100 * 0.25, 100 * 0.25 * 0.75], atol=1e-12)
    assert fc.variance[0] == pytest.approx(25.0, abs=1e-12)  # maximal at r = 0.5


def test_poisson_closure_is_exact():
    surv = geometric_survival(mean=4.0, t_max=60)
    resid = stationary_residual(surv)
    means = np.array([3.0, 7.5, 2.25, 11.0, 4.0, 9.9, 8.1])
    fc = forecast_occupancy(0, resid, means, surv)  # variance defaults to the mean
    assert np.array_equal(fc.mean, fc.variance)


def test_superposition_of_arrival_streams():
    surv = geometric_survival(mean=3.0, t_max=50)
    resid = stationary_residual(surv)
    rng = np.random.default_rng(8)
    a = rng.uniform(0, 20, size=6)
    b = rng.uniform(0, 20, size=6)
    fa = forecast_occupancy(0, resid, a, surv)
    fb = forecast_occupancy(0, resid, b, surv)
    fab = forecast_occupancy(0, resid, a + b, surv)
    np.testing.assert_allclose(fab.mean, fa.mean + fb.mean, rtol=1e-12)


def test_interval_bounds():
    surv = geometric_survival(mean=2.0, t_max=40)
    resid = stationary_residual(surv)
    fc = forecast_occupancy(4, resid, np.full(5, 2.0), surv, z=2.0)
    sd = np.sqrt(fc.variance)
    np.testing.assert_allclose(fc.upper, fc.mean + 2 * sd, atol=1e-12)
    np.testing.assert_allclose(fc.lower, np.maximum(fc.mean - 2 * sd, 0.0), atol=1e-12)
    assert np.all(fc.lower >= 0)
    assert np.all(fc.lower <= fc.mean) and np.all(fc.mean <= fc.upper)


def test_lower_bound_clamped_at_zero():
    surv = geometric_survival(mean=1.0, t_max=30)
    resid = stationary_residual(surv)
    fc = forecast_occupancy(0, resid, np.full(3, 0.1), surv, z=10.0)
    assert np.all(fc.lower == 0.0)


def test_mean_positive_for_positive_inputs():
    surv = geometric_survival(mean=5.0, t_max=70)
    resid = stationary_residual(surv)
    fc = forecast_occupancy(12, resid, np.linspace(1, 4, 10), surv)
    assert np.all(fc.mean > 0)
    assert np.all(fc.variance >= 0)


def test_mismatched_lengths_rejected():
    surv = deterministic_survival(2)
    resid = stationary_residual(surv)
    with pytest.raises(ValueError):
        forecast_occupancy(0, resid, np.ones(3), surv, admissions_variance=np.ones(2))


def test_empty_horizon_rejected():
    surv = deterministic_survival(2)
    resid = stationary_residual(surv)
    with pytest.raises(ValueError):
        forecast_occupancy(0, resid, np.array([]), surv)


def test_moments_match_monte_carlo_simulation():
    # light version of the oracle cross-check (the acceptance suite runs a
    # larger sweep): analytic mean and variance vs 10k simulated paths
    from bedcast.los import discretize, fit_gamma
    from bedcast.residual import residual_survival
    from bedcast.simulate import monte_carlo_forecast

    surv = discretize(fit_gamma(6.0, 18.0))
    past = np.linspace(30, 14, 40)  # growing history, most recent first
    resid = residual_survival(past, surv)
    future = np.full(6, 22.0)
    census = 150
    fc = forecast_occupancy(census, resid, future, surv)
    mc = monte_carlo_forecast(
        past, census, surv, future, replications=10000, seed=99
    )
    for t in range(6):
        assert abs(fc.mean[t] - mc.mean[t]) <= 3 * mc.mean_se[t]
        assert abs(fc.variance[t] - mc.variance[t]) <= 3 * mc.variance_se[t]
