"""Forecast accuracy metrics and the rolling-horizon backtest harness.

The backtest refits the trend at every origin day on past data only, then
scores fixed-lead-time predictions of arrivals and of occupancy.  Occupancy
is scored twice: fed by forecasted arrivals (the full pipeline) and fed by
the realized arrival stream, which isolates the error contributed by the
length-of-stay model alone.

``poisson_error_floor`` gives the accuracy of the best possible predictor
of a Poisson random variable, a useful yardstick: census-like quantities
carry that much irreducible noise even under a perfect model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .occupancy import forecast_occupancy
from .residual import residual_survival
from .trend import MIN_FIT_DAYS, AdmissionSeries, TrendModel
from .validation import check_1d, check_nonnegative, check_positive_scalar

ARRIVALS = "arrivals"
OCC_FORECAST = "occupancy_forecasted_arrivals"
OCC_REALIZED = "occupancy_realized_arrivals"
SERIES_ORDER = (ARRIVALS, OCC_REALIZED, OCC_FORECAST)


class AccuracyReport(NamedTuple):
    """WAPE / MAE / RMSE over n scored days; ``wape`` is None when the
    actuals sum to zero."""

    wape: float | None
    mae: float
    rmse: float
    n: int


def accuracy(actual, predicted, rmse_outside_root: bool = False) -> AccuracyReport:
    """Standard accuracy measures of a prediction series.

    ``rmse_outside_root=True`` divides the root of the summed squares by n
    instead of taking the root of the mean square (a nonstandard variant
    kept available for comparison).
    """
    y = check_nonnegative("actual", actual)
    yhat = check_1d("predicted", predicted)
    if len(y) != len(yhat) or len(y) == 0:
        raise ValueError("actual and predicted must have equal, positive length")
    abs_err = np.abs(y - yhat)
    n = len(y)
    mae = float(abs_err.mean())
    total = float(y.sum())
    wape = float(abs_err.sum() / total) if total > 0 else None
    if rmse_outside_root:
        rmse = float(math.sqrt(((y - yhat) ** 2).sum()) / n)
    else:
        rmse = float(math.sqrt(((y - yhat) ** 2).mean()))
    return AccuracyReport(wape=wape, mae=mae, rmse=rmse, n=n)


class PoissonErrorFloor(NamedTuple):
    mae: float
    wape: float
    rmse: float


def poisson_error_floor(mu) -> PoissonErrorFloor:
    """Error of predicting a Poisson(mu) variable by its own mean.

    Closed forms: ``MAE = 2 mu^(floor(mu)+1) e^-mu / floor(mu)!``,
    ``WAPE = MAE / mu`` and ``RMSE = sqrt(mu)``; the MAE is evaluated in
    log space so large rates cannot overflow.
    """
    mu = check_positive_scalar("mu", mu)
    k = math.floor(mu)
    log_mae = math.log(2.0) + (k + 1) * math.log(mu) - mu - math.lgamma(k + 1)
    mae = math.exp(log_mae)
    return PoissonErrorFloor(mae=mae, wape=mae / mu, rmse=math.sqrt(mu))


@dataclass(frozen=True)
class BacktestRecord:
    """One scored prediction: origin day, target day, and the three values."""

    origin_index: int  # 1-based day of the forecast origin
    horizon: int
    actual_arrivals: float
    predicted_arrivals: float
    actual_occupancy: float
    occupancy_forecasted_arrivals: float
    occupancy_realized_arrivals: float


@dataclass(frozen=True)
class BacktestResult:
    admissions: AdmissionSeries
    horizons: tuple
    records: tuple
    skipped: tuple  # (origin_index, reason) pairs
    reports: dict = field(default_factory=dict)  # (series, horizon) -> AccuracyReport

    def origin_dates(self):
        return sorted({self.admissions.date_of(r.origin_index) for r in self.records})

    def rows(self):
        """(series x horizon) table in a stable order; six rows for two
        horizons.  Horizons that no origin could score are omitted."""
        out = []
        for series in SERIES_ORDER:
            for h in self.horizons:
                if (series, h) in self.reports:
                    out.append((series, h, self.reports[(series, h)]))
        return out


def _score(records, horizons):
    reports = {}
    for h in horizons:
        hits = [r for r in records if r.horizon == h]
        actual_a = np.array([r.actual_arrivals for r in hits])
        actual_n = np.array([r.actual_occupancy for r in hits])
        reports[(ARRIVALS, h)] = accuracy(actual_a, [r.predicted_arrivals for r in hits])
        reports[(OCC_FORECAST, h)] = accuracy(
            actual_n, [r.occupancy_forecasted_arrivals for r in hits]
        )
        reports[(OCC_REALIZED, h)] = accuracy(
            actual_n, [r.occupancy_realized_arrivals for r in hits]
        )
    return reports


def rolling_backtest(
    admissions: AdmissionSeries,
    census,
    survival,
    smoothing: float = 10.0,
    horizons=(3, 7),
    stride: int = 1,
    max_history: int | None = None,
) -> BacktestResult:
    """Refit at every origin and score h-day-ahead predictions.

    At origin day T the information set is the end of day T: admissions
    through ``a_T`` (the trend is fitted on them) and the morning census
    ``N_T``.  Occupancy h days ahead uses the realized ``a_T`` for the
    origin day itself plus predicted arrivals for days T+1 .. T+h-1; the
    realized-arrivals variant substitutes the actual stream throughout.

    ``census`` must be aligned with ``admissions`` (same first day).
    Origins without enough fitting history are recorded under ``skipped``;
    ``stride`` spaces origins, ``max_history`` optionally caps the fit
    window length.
    """
    census = check_nonnegative("census", census)
    if len(census) != len(admissions):
        raise ValueError("census and admissions must cover the same days")
    horizons = tuple(sorted(int(h) for h in horizons))
    if not horizons or horizons[0] < 1:
        raise ValueError("horizons must be positive integers")
    h_max = horizons[-1]
    T_total = len(admissions)

    records = []
    skipped = []
    counts = admissions.counts
    for origin in range(1, T_total - horizons[0] + 1, int(stride)):
        if origin < MIN_FIT_DAYS:
            skipped.append((origin, f"needs {MIN_FIT_DAYS} days of history, has {origin}"))
            continue
        history = AdmissionSeries(admissions.start_date, counts[:origin])
        if max_history is not None and len(history) > max_history:
            history = history.tail_slice(max_history)
        model = TrendModel(smoothing=smoothing).fit(history)
        h_avail = min(h_max, T_total - origin)
        predicted = model.predict(h_avail)

        n_now = float(census[origin - 1])
        past = counts[: origin - 1][::-1]  # a_{T-1}, a_{T-2}, ..., a_1
        try:
            resid = residual_survival(past, survival)
        except ValueError as err:
            skipped.append((origin, str(err)))
            continue

        # arrival means for days T+0 .. T+h-1: realized a_T, then forecasts
        fc_means = np.concatenate([[counts[origin - 1]], predicted[: h_avail - 1]])
        real_means = counts[origin - 1 : origin - 1 + h_avail].astype(float)
        fc_var = fc_means.copy()
        fc_var[0] = 0.0  # a_T is realized, not random
        occ_fc = forecast_occupancy(n_now, resid, fc_means, survival, admissions_variance=fc_var)
        occ_real = forecast_occupancy(
            n_now, resid, real_means, survival, admissions_variance=np.zeros(h_avail)
        )

        for h in horizons:
            if origin + h > T_total:
                continue
            records.append(
                BacktestRecord(
                    origin_index=origin,
                    horizon=h,
                    actual_arrivals=float(counts[origin + h - 1]),
                    predicted_arrivals=float(predicted[h - 1]),
                    actual_occupancy=float(census[origin + h - 1]),
                    occupancy_forecasted_arrivals=float(occ_fc.mean[h - 1]),
                    occupancy_realized_arrivals=float(occ_real.mean[h - 1]),
                )
            )

    if not records:
        raise ValueError("no origin has enough history to score any horizon")
    reports = _score(records, [h for h in horizons if any(r.horizon == h for r in records)])
    return BacktestResult(
        admissions=admissions,
        horizons=horizons,
        records=tuple(records),
        skipped=tuple(skipped),
        reports=reports,
    )


def lambda_sweep(
    admissions: AdmissionSeries,
    census,
    survival,
    smoothings,
    horizon: int = 3,
    stride: int = 1,
):
    """Backtest once per smoothing value; returns {smoothing: {series: report}}."""
    out = {}
    for lam in smoothings:
        result = rolling_backtest(
            admissions,
            census,
            survival,
            smoothing=float(lam),
            horizons=(int(horizon),),
            stride=stride,
        )
        out[float(lam)] = {series: result.reports[(series, int(horizon))] for series in SERIES_ORDER}
    return out
