"""Synthetic scenarios and a Monte-Carlo census simulator.

Scenarios generate Poisson daily admissions whose intensity grows or
shrinks by a fixed factor per day within each phase (mimicking policy-era
trend breaks) modulated by weekday multipliers.  The census simulator
draws an integer stay for every admitted patient and counts occupied beds
each morning; it doubles as an independent oracle for the closed-form
occupancy forecasts.

Randomness comes from numpy's PCG64 generator, seeded explicitly, so
streams are reproducible across platforms; a handful of frozen draws in
the test suite pin the stream.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .los import DiscreteSurvival, discretize
from .trend import AdmissionSeries
from .validation import check_nonnegative, check_positive_scalar


@dataclass(frozen=True)
class Scenario:
    """Recipe for synthetic admission data.

    ``phases`` is a sequence of ``(length_days, daily_growth_factor)``
    pairs; the intensity starts at ``base_intensity`` and multiplies by the
    active phase's factor each subsequent day.  ``weekday_multipliers``
    (Monday first) must have geometric mean 1 so they redistribute rather
    than change weekly volume.  ``los`` may be a :class:`DiscreteSurvival`
    or a parametric model with an ``sf`` method (discretized on demand).
    """

    base_intensity: float
    phases: tuple
    weekday_multipliers: tuple
    los: object
    seed: int
    start_date: dt.date = dt.date(2020, 11, 2)

    def __post_init__(self):
        check_positive_scalar("base_intensity", self.base_intensity)
        if not self.phases:
            raise ValueError("need at least one phase")
        for length, growth in self.phases:
            if int(length) < 1:
                raise ValueError("phase lengths must be >= 1 day")
            check_positive_scalar("growth", growth)
        mult = np.asarray(self.weekday_multipliers, dtype=float)
        if mult.shape != (7,) or np.any(mult <= 0):
            raise ValueError("weekday_multipliers must be 7 positive numbers")
        if abs(np.log(mult).mean()) > 1e-9:
            raise ValueError("weekday_multipliers must have geometric mean 1")

    @property
    def total_days(self) -> int:
        return int(sum(int(length) for length, _ in self.phases))

    def survival(self) -> DiscreteSurvival:
        if isinstance(self.los, DiscreteSurvival):
            return self.los
        return discretize(self.los)

    def intensities(self, days: int | None = None) -> np.ndarray:
        """Expected admissions per day (weekday multipliers included)."""
        days = self.total_days if days is None else int(days)
        if days < 1 or days > self.total_days:
            raise ValueError(f"days must be in 1..{self.total_days}")
        growth = np.empty(self.total_days)
        pos = 0
        for length, factor in self.phases:
            growth[pos : pos + int(length)] = factor
            pos += int(length)
        base = np.empty(days)
        base[0] = self.base_intensity
        base[1:] = self.base_intensity * np.cumprod(growth[1:days])
        weekday0 = self.start_date.weekday()
        mult = np.asarray(self.weekday_multipliers, dtype=float)
        w = (weekday0 + np.arange(days)) % 7
        return base * mult[w]


def generate_admissions(scenario: Scenario, days: int | None = None) -> AdmissionSeries:
    """Sample one Poisson admission path from the scenario."""
    mu = scenario.intensities(days)
    rng = np.random.default_rng(scenario.seed)
    counts = rng.poisson(mu).astype(float)
    return AdmissionSeries(start_date=scenario.start_date, counts=counts)


def sample_stays(survival: DiscreteSurvival, size: int, rng) -> np.ndarray:
    """Inverse-CDF stay sampling: smallest t with ``P(S >= t+1) <= v``.

    Ties resolve toward shorter stays; values beyond the stored support
    cannot occur (the tail is read as 0 past ``t_max``).
    """
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    v = rng.random(size)
    # tail[1:] is non-increasing; count of entries > v equals the stay
    descending = survival.tail[1:]
    return np.searchsorted(-descending, -v, side="left").astype(np.int64)


class CensusPath(NamedTuple):
    """Simulated morning census plus the per-patient detail behind it."""

    start_date: dt.date
    census: np.ndarray  # census[i] = occupied beds at the morning of day i+1
    admission_day: np.ndarray  # 1-based day of each admitted patient
    stay: np.ndarray  # sampled overnight stays, aligned with admission_day


def simulate_census(admissions: AdmissionSeries, survival: DiscreteSurvival, seed) -> CensusPath:
    """Simulate morning bed counts for the admission series.

    A patient admitted on day ``s`` with stay ``S`` occupies a bed at the
    mornings of days ``s+1 .. s+S``; the system starts empty, so
    ``census[0] = 0``.
    """
    T = len(admissions)
    counts = np.rint(admissions.counts).astype(np.int64)
    if np.any(np.abs(admissions.counts - counts) > 1e-9):
        raise ValueError("admission counts must be integers to simulate a census")
    rng = np.random.default_rng(seed)
    admission_day = np.repeat(np.arange(1, T + 1), counts)
    stay = sample_stays(survival, len(admission_day), rng)

    # +1 at the first occupied morning, -1 after the last one, then cumsum
    delta = np.zeros(T + 2, dtype=np.int64)
    first = admission_day + 1
    last = np.minimum(admission_day + stay, T)
    occupies = stay >= 1
    np.add.at(delta, np.minimum(first[occupies], T + 1), 1)
    np.add.at(delta, last[occupies] + 1, -1)
    census = np.cumsum(delta)[1 : T + 1]
    return CensusPath(
        start_date=admissions.start_date,
        census=census,
        admission_day=admission_day,
        stay=stay,
    )


class MonteCarloForecast(NamedTuple):
    mean: np.ndarray
    variance: np.ndarray
    mean_se: np.ndarray
    variance_se: np.ndarray
    replications: int


def _sample_residual_stays(past_arrivals, survival, count, rng):
    """Two-stage residual draw: arrival day, then stay conditional on it.

    The arrival day of a present patient is ``u`` days back with
    probability proportional to ``a[T-u] * P(S >= u)``; its remaining stay
    then follows ``P(S >= t+u | S >= u)``.  This deliberately avoids the
    residual-survival arithmetic so the simulator stays an independent
    check of it.
    """
    tail = survival.tail
    t_max = survival.t_max
    arrivals = check_nonnegative("past_arrivals", past_arrivals)
    window = min(len(arrivals), t_max)
    weights = arrivals[:window] * tail[1 : window + 1]
    total = weights.sum()
    if total <= 0:
        raise ValueError("no arrival history can explain a present patient")
    u_draws = rng.choice(window, size=count, p=weights / total) + 1
    remaining = np.empty(count, dtype=np.int64)
    padded = np.concatenate([tail, [0.0]])
    for u in np.unique(u_draws):
        sel = u_draws == u
        cond = padded[u + 1 : t_max + 2] / padded[u]
        v = rng.random(int(sel.sum()))
        remaining[sel] = np.searchsorted(-cond, -v, side="left")
    return remaining


def monte_carlo_forecast(
    past_arrivals,
    census,
    survival: DiscreteSurvival,
    future_intensities,
    horizon: int | None = None,
    replications: int = 20000,
    seed=0,
    poisson_arrivals: bool = True,
) -> MonteCarloForecast:
    """Empirical occupancy moments by direct simulation.

    ``past_arrivals`` is ordered most recent first (as in
    :func:`bedcast.residual.residual_survival`); ``future_intensities[s]``
    is the expected arrival count during day ``T+s`` for s = 0 .. h-1.
    With ``poisson_arrivals=False`` the intensities are used as fixed
    (deterministic) arrival counts instead.
    """
    if replications < 1000:
        raise ValueError("need at least 1000 replications for stable moments")
    intensities = check_nonnegative("future_intensities", future_intensities)
    h = len(intensities) if horizon is None else int(horizon)
    if h < 1 or h > len(intensities):
        raise ValueError("horizon must be in 1..len(future_intensities)")
    census = int(census)
    rng = np.random.default_rng(seed)

    totals = np.zeros((replications, h), dtype=np.int64)

    if census > 0:
        remaining = _sample_residual_stays(
            past_arrivals, survival, census * replications, rng
        ).reshape(replications, census)
        for t in range(1, h + 1):
            totals[:, t - 1] += (remaining >= t).sum(axis=1)

    for s in range(h):
        if poisson_arrivals:
            arrivals = rng.poisson(intensities[s], size=replications)
        else:
            arrivals = np.full(replications, int(round(intensities[s])), dtype=np.int64)
        n_total = int(arrivals.sum())
        if n_total == 0:
            continue
        rep_idx = np.repeat(np.arange(replications), arrivals)
        stays = sample_stays(survival, n_total, rng)
        for t in range(s + 1, h + 1):
            hit = stays >= (t - s)
            if hit.any():
                totals[:, t - 1] += np.bincount(rep_idx[hit], minlength=replications)

    mean = totals.mean(axis=0)
    variance = totals.var(axis=0, ddof=1)
    mean_se = np.sqrt(variance / replications)
    # standard error of the sample variance from the fourth central moment
    centered = totals - mean
    m4 = (centered**4).mean(axis=0)
    n = replications
    var_of_var = (m4 - (n - 3) / (n - 1) * variance**2) / n
    variance_se = np.sqrt(np.maximum(var_of_var, 0.0))
    return MonteCarloForecast(
        mean=mean,
        variance=variance,
        mean_se=mean_se,
        variance_se=variance_se,
        replications=replications,
    )
