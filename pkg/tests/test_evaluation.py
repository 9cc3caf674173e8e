import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from bedcast.evaluation import (
    ARRIVALS,
    OCC_FORECAST,
    OCC_REALIZED,
    accuracy,
    lambda_sweep,
    poisson_error_floor,
    rolling_backtest,
)
from bedcast.los import deterministic_survival, geometric_survival
from bedcast.simulate import Scenario, generate_admissions, simulate_census

START = dt.date(2020, 11, 2)


def test_accuracy_simple_example():
    rep = accuracy([10, 10], [9, 11])
    assert rep.wape == pytest.approx(0.1, abs=1e-12)
    assert rep.mae == pytest.approx(1.0, abs=1e-12)
    assert rep.rmse == pytest.approx(1.0, abs=1e-12)
    assert rep.n == 2


def test_accuracy_perfect_prediction():
    rep = accuracy([3, 7, 11], [3, 7, 11])
    assert rep.wape == 0.0 and rep.mae == 0.0 and rep.rmse == 0.0


def test_accuracy_with_zero_actuals_mixed():
    rep = accuracy([0, 4], [2, 0])
    assert rep.mae == pytest.approx(3.0, abs=1e-12)
    assert rep.wape == pytest.approx(1.5, abs=1e-12)
    assert rep.rmse == pytest.approx(math.sqrt(10.0), abs=1e-12)


def test_wape_absent_when_actuals_sum_zero():
    rep = accuracy([0, 0], [1, 2])
    assert rep.wape is None


def test_rmse_variant_with_n_outside_root():
    rep = accuracy([10, 10], [9, 11], rmse_outside_root=True)
    assert rep.rmse == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=500), min_size=1, max_size=30),
    st.integers(min_value=0, max_value=2**32),
)
def test_wape_mae_identity(actuals, seed):
    rng = np.random.default_rng(seed)
    y = np.array(actuals, dtype=float)
    yhat = y + rng.normal(size=len(y))
    rep = accuracy(y, yhat)
    if y.sum() > 0:
        assert rep.wape * y.sum() == pytest.approx(rep.mae * rep.n, rel=1e-9)


def brute_force_poisson_mae(mu):
    k_hi = int(mu + 60 * math.sqrt(mu) + 60)
    k = np.arange(0, k_hi)
    return float(np.abs(k - mu) @ poisson.pmf(k, mu))


@pytest.mark.parametrize("mu", [1.0, 5.0, 50.0])
def test_poisson_floor_matches_brute_force(mu):
    floor = poisson_error_floor(mu)
    assert floor.mae == pytest.approx(brute_force_poisson_mae(mu), abs=1e-9)


def test_poisson_floor_published_magnitudes():
    for mu, mae, wape_pct in [(50, 5.6, 11.3), (500, 17.8, 3.6), (2000, 35.7, 1.8)]:
        floor = poisson_error_floor(mu)
        assert floor.mae == pytest.approx(mae, abs=0.05)
        assert floor.wape * 100 == pytest.approx(wape_pct, abs=0.05)
        assert floor.rmse == pytest.approx(math.sqrt(mu), rel=1e-12)


def test_poisson_floor_no_overflow_large_mu():
    floor = poisson_error_floor(5000.0)
    assert math.isfinite(floor.mae)
    assert floor.mae == pytest.approx(brute_force_poisson_mae(5000.0), rel=1e-9)


def perfect_foresight_data(days=60, seed=3):
    scenario = Scenario(
        base_intensity=30.0,
        phases=((days, 1.01),),
        weekday_multipliers=(1.0,) * 7,
        los=deterministic_survival(1),
        seed=seed,
    )
    admissions = generate_admissions(scenario)
    path = simulate_census(admissions, scenario.survival(), seed=seed + 1)
    return admissions, path.census, scenario.survival()


def test_backtest_perfect_foresight_realized_occupancy():
    admissions, census, surv = perfect_foresight_data()
    result = rolling_backtest(admissions, census, surv, smoothing=10.0, horizons=(3, 7))
    for h in (3, 7):
        rep = result.reports[(OCC_REALIZED, h)]
        assert rep.mae == 0.0
        assert rep.wape == 0.0


def test_backtest_produces_six_rows():
    admissions, census, surv = perfect_foresight_data(days=45)
    result = rolling_backtest(admissions, census, surv, horizons=(3, 7))
    rows = result.rows()
    assert len(rows) == 6
    kinds = {(series, h) for series, h, _ in rows}
    assert kinds == {(s, h) for s in (ARRIVALS, OCC_FORECAST, OCC_REALIZED) for h in (3, 7)}


def test_backtest_skips_and_reports_short_history():
    admissions, census, surv = perfect_foresight_data(days=40)
    result = rolling_backtest(admissions, census, surv, horizons=(3,))
    skipped_origins = {origin for origin, _ in result.skipped}
    assert skipped_origins == set(range(1, 21))
    assert min(r.origin_index for r in result.records) == 21


def test_backtest_origins_strictly_increasing():
    admissions, census, surv = perfect_foresight_data(days=50)
    result = rolling_backtest(admissions, census, surv, horizons=(3,))
    dates = result.origin_dates()
    assert all(a < b for a, b in zip(dates, dates[1:]))


def test_backtest_deterministic():
    admissions, census, surv = perfect_foresight_data(days=45)
    r1 = rolling_backtest(admissions, census, surv, horizons=(3, 7))
    r2 = rolling_backtest(admissions, census, surv, horizons=(3, 7))
    assert r1.reports == r2.reports


def test_backtest_rejects_misaligned_census():
    admissions, census, surv = perfect_foresight_data(days=40)
    with pytest.raises(ValueError):
        rolling_backtest(admissions, census[:-3], surv)


def normalized_week(raw):
    mult = np.asarray(raw, dtype=float)
    return tuple(mult / math.exp(np.log(mult).mean()))


def noisy_scenario_data(days=90, seed=17):
    scenario = Scenario(
        base_intensity=80.0,
        phases=((days // 2, 1.02), (days - days // 2, 0.985)),
        weekday_multipliers=normalized_week([1.18, 1.12, 1.0, 0.95, 0.9, 0.85, 1.04]),
        los=geometric_survival(mean=5.0),
        seed=seed,
    )
    admissions = generate_admissions(scenario)
    census = simulate_census(admissions, scenario.survival(), seed=seed + 1).census
    return admissions, census, scenario.survival()


def test_lambda_sweep_realized_occupancy_unaffected():
    admissions, census, surv = noisy_scenario_data()
    sweep = lambda_sweep(admissions, census, surv, smoothings=(0.01, 1.0, 10.0), horizon=3, stride=2)
    realized = [sweep[lam][OCC_REALIZED] for lam in (0.01, 1.0, 10.0)]
    assert realized[0] == realized[1] == realized[2]


def test_lambda_sweep_smoothing_beats_interpolation_out_of_sample():
    admissions, census, surv = noisy_scenario_data()
    sweep = lambda_sweep(admissions, census, surv, smoothings=(0.01, 10.0), horizon=3)
    assert sweep[10.0][ARRIVALS].wape < sweep[0.01][ARRIVALS].wape


def test_backtest_max_history_caps_fit_window():
    admissions, census, surv = noisy_scenario_data(days=60)
    capped = rolling_backtest(admissions, census, surv, horizons=(3,), max_history=28)
    full = rolling_backtest(admissions, census, surv, horizons=(3,))
    assert capped.reports != full.reports  # different fit windows, same scoring frame
    assert {r.origin_index for r in capped.records} == {r.origin_index for r in full.records}


def test_lambda_sweep_single_value_structure():
    admissions, census, surv = perfect_foresight_data(days=40)
    sweep = lambda_sweep(admissions, census, surv, smoothings=(10.0,), horizon=3)
    assert set(sweep.keys()) == {10.0}
    assert set(sweep[10.0].keys()) == {ARRIVALS, OCC_FORECAST, OCC_REALIZED}
