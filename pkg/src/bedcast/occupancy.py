"""Bed-occupancy forecasts from a discrete-time infinite-server model.

Occupancy at the morning of day ``T+t`` decomposes into patients already
present at the origin (each still there with probability ``P(S_r >= t)``)
and future arrivals (an arrival during day ``T+s`` occupies a bed at the
morning of ``T+t`` iff its stay reaches ``t-s`` overnights).  Means and
variances follow in closed form; arrivals on distinct days are treated as
independent.

A patient admitted with a zero-night stay never appears in any morning
census; admission counts and the survival discretization share that
convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .los import DiscreteSurvival
from .residual import ResidualSurvival
from .validation import check_nonnegative, check_nonnegative_scalar, check_positive_scalar


@dataclass(frozen=True)
class OccupancyForecast:
    """Per-horizon occupancy mean, variance and interval bounds (in beds).

    Element ``i`` refers to ``t = i + 1`` days after the origin.  Bounds
    are ``mean +/- z * sqrt(variance)`` with the lower bound clamped at 0.
    """

    mean: np.ndarray
    variance: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    z: float

    @property
    def horizon(self) -> int:
        return len(self.mean)


def forecast_occupancy(
    census,
    residual: ResidualSurvival,
    admissions_mean,
    survival: DiscreteSurvival,
    admissions_variance=None,
    z: float = 2.0,
) -> OccupancyForecast:
    """Forecast occupied beds 1..h days ahead.

    ``census`` is the number of occupied beds at the origin morning;
    ``admissions_mean[s]`` (s = 0 .. h-1) is the expected number of
    arrivals during day ``T+s``, where s = 0 is the origin day itself.
    ``admissions_variance`` defaults to the mean (Poisson arrivals).

    For t = 1..h:

        mean[t]     = census * R(t) + sum_{s<t} E A_s * G(t-s)
        variance[t] = census * R(t) (1 - R(t))
                      + sum_{s<t} [Var A_s * G(t-s)^2 + E A_s * G(t-s)(1 - G(t-s))]

    with ``R`` the residual tail and ``G`` the fresh-stay tail.  When
    ``Var A_s = E A_s`` and ``census = 0`` the variance reduces to the mean
    exactly (Poisson-like census).
    """
    n0 = check_nonnegative_scalar("census", census)
    adm_mean = check_nonnegative("admissions_mean", admissions_mean)
    if admissions_variance is None:
        adm_var = adm_mean
    else:
        adm_var = check_nonnegative("admissions_variance", admissions_variance)
        if len(adm_var) != len(adm_mean):
            raise ValueError(
                f"admissions_variance has length {len(adm_var)}, "
                f"expected {len(adm_mean)}"
            )
    z = check_positive_scalar("z", z)
    h = len(adm_mean)
    if h == 0:
        raise ValueError("admissions_mean must cover at least one day")

    r = residual.prob_at_least(np.arange(1, h + 1))
    r = np.atleast_1d(r)
    g = survival.prob_at_least(np.arange(0, h + 1))  # g[d] = P(S >= d)
    g = np.atleast_1d(g)

    mean = np.empty(h)
    variance = np.empty(h)
    for t in range(1, h + 1):
        gs = g[t - np.arange(t)]  # G(t-s) for s = 0..t-1
        arrivals_mean = float(adm_mean[:t] @ gs)
        # (Var A - E A) * G^2 + E A * G: algebraically Var A G^2 + E A G(1-G),
        # written so Var A == E A collapses the first term to exactly zero
        arrivals_var = float((adm_var[:t] - adm_mean[:t]) @ gs**2) + float(adm_mean[:t] @ gs)
        mean[t - 1] = n0 * r[t - 1] + arrivals_mean
        variance[t - 1] = n0 * r[t - 1] * (1.0 - r[t - 1]) + arrivals_var

    sd = np.sqrt(variance)
    lower = np.maximum(mean - z * sd, 0.0)
    upper = mean + z * sd
    return OccupancyForecast(mean=mean, variance=variance, lower=lower, upper=upper, z=z)
