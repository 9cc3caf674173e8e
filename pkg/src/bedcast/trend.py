"""Seasonal log-trend model for daily admission counts.

The model writes each day's log count as a smooth trend ``x_t`` plus a
weekday effect ``s_{w(t)}`` and picks both by minimizing

    sum_t |x_t + s_{w(t)} - log a_t|  +  smoothing * sum_t |d2 x_t|

subject to the identifiability normalization ``sum_d s_d = 0`` (the
objective is invariant under shifting mass between trend and weekday
effects; the constraint makes ``x`` the de-seasonalized trend).  Absolute
values keep the fit robust to outliers and let the trend change slope in a
few places rather than everywhere.  Zero counts are floored at 0.5 before
taking logs.

Extrapolation continues the last fitted slope: the t-day-ahead prediction
is ``exp(x_T + t (x_T - x_{T-1}) + s_{w(T+t)})``, and
``exp(x_t - x_{t-1})`` acts as a day-to-day growth (reproduction-like)
factor of the de-seasonalized series.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .lp import OPTIMAL, L1Problem, solve_l1
from .validation import check_nonnegative, check_nonnegative_scalar, check_positive_scalar

#: shortest series accepted for fitting: three full weeks, so every weekday
#: effect is informed by at least three observations
MIN_FIT_DAYS = 21

#: floor applied to counts before taking logs (half-count correction)
ZERO_FLOOR = 0.5

#: default growth-factor exponent, roughly matching the incubation lag
REPRODUCTION_EXPONENT = 4.5


@dataclass(frozen=True)
class AdmissionSeries:
    """Daily admission counts starting at ``start_date``.

    Counts must be non-negative; the CSV readers additionally require
    integers, but the in-memory API accepts reals so exact synthetic
    series can be fitted in tests.
    """

    start_date: dt.date
    counts: np.ndarray

    def __post_init__(self):
        counts = check_nonnegative("counts", self.counts)
        if len(counts) == 0:
            raise ValueError("counts is empty")
        if not isinstance(self.start_date, dt.date):
            raise ValueError("start_date must be a datetime.date")
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return len(self.counts)

    @property
    def dates(self):
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self.counts))]

    def weekday(self, t: int) -> int:
        """Weekday index 0-6 (Monday=0) of day ``t`` (1-based)."""
        return (self.start_date.weekday() + (t - 1)) % 7

    def date_of(self, t: int) -> dt.date:
        return self.start_date + dt.timedelta(days=t - 1)

    def tail_slice(self, length: int) -> "AdmissionSeries":
        """The most recent ``length`` days as a new series."""
        if length > len(self):
            raise ValueError("slice longer than series")
        return AdmissionSeries(
            start_date=self.date_of(len(self) - length + 1),
            counts=self.counts[len(self) - length :],
        )


class TrendModel(BaseEstimator):
    """L1 seasonal log-trend fit with linear extrapolation.

    Parameters
    ----------
    smoothing : float, default 10.0
        Weight on absolute second differences of the log trend; larger
        values force a straighter trend.

    Attributes (after ``fit``)
    --------------------------
    x_ : ndarray of shape (T,)
        De-seasonalized log-trend values.
    weekday_effects_ : ndarray of shape (7,)
        Additive log-scale weekday effects, summing to zero, indexed by
        weekday (Monday=0).
    objective_ : float
        Optimal value of the fitted criterion.
    """

    def __init__(self, smoothing: float = 10.0):
        self.smoothing = smoothing

    def fit(self, series: AdmissionSeries, y=None):
        smoothing = check_nonnegative_scalar("smoothing", self.smoothing)
        if not isinstance(series, AdmissionSeries):
            raise ValueError("fit expects an AdmissionSeries")
        T = len(series)
        if T < MIN_FIT_DAYS:
            raise ValueError(
                f"need at least {MIN_FIT_DAYS} days of admissions to fit, got {T}"
            )
        logs = np.log(np.maximum(series.counts, ZERO_FLOOR))
        weekdays = np.array([series.weekday(t) for t in range(1, T + 1)])

        n = T + 7  # variables: x_1..x_T then s_0..s_6
        residual_terms = []
        for t in range(T):
            row = np.zeros(n)
            row[t] = 1.0
            row[T + weekdays[t]] = 1.0
            residual_terms.append((row, logs[t]))
        penalty_terms = []
        for t in range(2, T):  # |x_t - 2 x_{t-1} + x_{t-2}| for t = 3..T (1-based)
            row = np.zeros(n)
            row[t] = 1.0
            row[t - 1] = -2.0
            row[t - 2] = 1.0
            penalty_terms.append((row, 0.0))
        normalization = np.zeros(n)
        normalization[T:] = 1.0

        problem = L1Problem(
            num_vars=n,
            residual_terms=tuple(residual_terms),
            penalty_terms=tuple(penalty_terms),
            penalty_weights=(smoothing,) * len(penalty_terms),
            equalities=((normalization, 0.0),),
        )
        solution = solve_l1(problem)
        if solution.status != OPTIMAL:
            raise RuntimeError(f"trend fit did not converge: {solution.status}")

        self.series_ = series
        self.x_ = solution.values[:T]
        self.weekday_effects_ = solution.values[T:]
        self.objective_ = solution.objective
        self.lp_iterations_ = solution.iterations
        return self

    def _check_fitted(self):
        if not hasattr(self, "x_"):
            raise NotFittedError("this TrendModel is not fitted yet; call fit first")

    def fitted_values(self) -> np.ndarray:
        """In-sample fit ``exp(x_t + s_{w(t)})``."""
        self._check_fitted()
        T = len(self.x_)
        w = np.array([self.series_.weekday(t) for t in range(1, T + 1)])
        return np.exp(self.x_ + self.weekday_effects_[w])

    def predict(self, horizon: int) -> np.ndarray:
        """Admission predictions for 1..horizon days past the fitted window."""
        self._check_fitted()
        horizon = int(horizon)
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        T = len(self.x_)
        slope = self.x_[-1] - self.x_[-2]
        t = np.arange(1, horizon + 1)
        w = np.array([self.series_.weekday(T + k) for k in t])
        return np.exp(self.x_[-1] + t * slope + self.weekday_effects_[w])

    def reproduction_factors(self, exponent: float = REPRODUCTION_EXPONENT) -> np.ndarray:
        """Powers of the de-seasonalized day-to-day growth, ``exp(e (x_t - x_{t-1}))``.

        Element ``i`` corresponds to day ``t = i + 2``; a flat trend gives 1
        everywhere.  The default exponent of 4.5 scales the daily factor to
        an infection-generation time scale.
        """
        self._check_fitted()
        exponent = check_positive_scalar("exponent", exponent)
        return np.exp(exponent * np.diff(self.x_))

    def prediction_dates(self, horizon: int):
        self._check_fitted()
        last = self.series_.date_of(len(self.x_))
        return [last + dt.timedelta(days=k) for k in range(1, int(horizon) + 1)]
