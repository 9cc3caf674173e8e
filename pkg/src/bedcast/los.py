"""Length-of-stay estimation from right-censored data.

The central object is a discrete survival tail ``P(S >= t)`` for day counts
``t = 0, 1, ...`` where ``S`` is the number of overnight stays.  It can be
estimated nonparametrically with the Kaplan-Meier product-limit estimator,
or by fitting a continuous lognormal / gamma / Weibull model by the method
of moments and discretizing it with a half-day continuity correction
``P(S >= t) ~= P(X >= t - 0.5)``.

Data convention: a patient "discharged after s days" (s >= 1) leaves the
risk set after the day-``s`` transition and counts as the event in the
``(1 - d_s / n_s)`` factor of that transition, so their stay contributes
``S = s - 1`` overnights.  Same-day admission-and-discharge records
(stay 0) are folded into the day-1 transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc, gammaincc
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .validation import check_counts, check_positive_scalar, check_survival_tail

#: default cap on the survival support, in days
T_MAX_CAP = 120

#: tail mass treated as negligible when choosing the support length
TAIL_EPS = 1e-6


@dataclass(frozen=True)
class DiscreteSurvival:
    """Tail probabilities ``P(S >= t)`` for ``t = 0 .. t_max``.

    ``tail[0]`` is always 1 and the vector is non-increasing.  For curves
    discretized from a parametric model, ``truncated_mass`` records the
    probability mass beyond ``t_max`` (the tail is truncated, never
    renormalized).
    """

    tail: np.ndarray
    truncated_mass: float = 0.0

    def __post_init__(self):
        arr = check_survival_tail("tail", self.tail)
        object.__setattr__(self, "tail", np.minimum.accumulate(np.clip(arr, 0.0, 1.0)))

    @property
    def t_max(self) -> int:
        return len(self.tail) - 1

    def prob_at_least(self, t):
        """``P(S >= t)``, reading beyond ``t_max`` as 0."""
        t = np.atleast_1d(np.asarray(t, dtype=np.int64))
        out = np.zeros(t.shape, dtype=float)
        inside = t <= self.t_max
        out[inside] = self.tail[t[inside]]
        return out if out.size > 1 else float(out[0])

    def mean(self) -> float:
        """``E S`` by the tail-sum identity (truncated at ``t_max``)."""
        return float(self.tail[1:].sum())


@dataclass(frozen=True)
class CensoredLosData:
    """Aggregated right-censored stay data.

    ``discharged[s]`` is the number of patients discharged (or died) after
    exactly ``s`` days; ``censored[s]`` is the number still present with an
    elapsed stay of exactly ``s`` days.  Index 0 is unused and kept at 0;
    constructors fold stay-0 discharges into day 1 and drop stay-0
    censorings (they carry no information).
    """

    discharged: np.ndarray
    censored: np.ndarray

    def __post_init__(self):
        d = check_counts("discharged", self.discharged)
        c = check_counts("censored", self.censored)
        if len(d) != len(c):
            raise ValueError("discharged and censored must have equal length")
        if len(d) < 2:
            raise ValueError("need counts for at least day 1")
        if d[0] or c[0]:
            raise ValueError("day-0 slot must be empty; use the from_* constructors")
        if d.sum() < 1:
            raise ValueError("need at least one discharged patient")
        object.__setattr__(self, "discharged", d)
        object.__setattr__(self, "censored", c)

    @classmethod
    def from_counts(cls, days, discharged, censored=None):
        """Build from aggregated per-day counts (``days`` need not be sorted)."""
        days = check_counts("days", days)
        discharged = check_counts("discharged", discharged)
        censored = (
            np.zeros_like(discharged) if censored is None else check_counts("censored", censored)
        )
        if not (len(days) == len(discharged) == len(censored)):
            raise ValueError("days, discharged and censored must have equal length")
        s_max = max(int(days.max(initial=0)), 1)
        d = np.zeros(s_max + 1, dtype=np.int64)
        c = np.zeros(s_max + 1, dtype=np.int64)
        for day, nd, nc in zip(days, discharged, censored):
            slot = max(int(day), 1)  # stay-0 discharges fold into day 1
            d[slot] += nd
            if day >= 1:
                c[day] += nc
        return cls(discharged=d, censored=c)

    @classmethod
    def from_records(cls, stay_days, is_censored):
        """Build from one record per patient."""
        stay_days = check_counts("stay_days", stay_days)
        flags = np.asarray(is_censored, dtype=bool)
        if len(stay_days) != len(flags):
            raise ValueError("stay_days and is_censored must have equal length")
        ones = np.ones_like(stay_days)
        return cls.from_counts(
            days=np.concatenate([stay_days[~flags], stay_days[flags]]),
            discharged=np.concatenate([ones[~flags], 0 * ones[flags]]),
            censored=np.concatenate([0 * ones[~flags], ones[flags]]),
        )

    def n_at_risk(self) -> np.ndarray:
        """``n_s``: patients with recorded stay >= s, for s = 0 .. s_max."""
        exits = self.discharged + self.censored
        return exits[::-1].cumsum()[::-1]


def kaplan_meier(data: CensoredLosData) -> DiscreteSurvival:
    """Product-limit estimate of ``P(S >= t)``.

    ``tail[t] = prod_{s=1..t} (1 - d_s / n_s)``; beyond the last recorded
    exit the curve stays flat, so it does not reach 0 when the longest
    stay is censored.
    """
    n = data.n_at_risk()
    d = data.discharged
    if np.any((n == 0) & (d > 0)):
        raise ValueError("discharge recorded with empty risk set")
    factors = np.ones(len(d))
    alive = n > 0
    factors[alive] = 1.0 - d[alive] / n[alive]
    tail = np.cumprod(factors)
    tail[0] = 1.0
    return DiscreteSurvival(tail=tail)


class KaplanMeier(BaseEstimator):
    """Kaplan-Meier survival estimator with a scikit-learn style interface.

    After ``fit``, ``survival_`` holds the estimated :class:`DiscreteSurvival`
    and ``n_at_risk_`` the per-day risk-set sizes.
    """

    def fit(self, stay_days, is_censored=None):
        """Fit from per-patient records, or from a :class:`CensoredLosData`."""
        if isinstance(stay_days, CensoredLosData):
            data = stay_days
        else:
            if is_censored is None:
                is_censored = np.zeros(len(stay_days), dtype=bool)
            data = CensoredLosData.from_records(stay_days, is_censored)
        self.data_ = data
        self.survival_ = kaplan_meier(data)
        self.n_at_risk_ = data.n_at_risk()
        return self

    def moments(self):
        if not hasattr(self, "survival_"):
            raise NotFittedError("call fit first")
        return survival_moments(self.survival_)


class SurvivalMoments(NamedTuple):
    mean: float
    std: float
    renormalized: bool


def survival_moments(surv: DiscreteSurvival, plateau_tol: float = TAIL_EPS) -> SurvivalMoments:
    """Mean and standard deviation of a discrete survival curve.

    Uses the tail-sum identities ``E S = sum_{t>=1} tail[t]`` and
    ``E S^2 = sum_{t>=1} (2t - 1) tail[t]``.  If the curve plateaus above 0
    (longest stay censored), the moments are computed after conditioning on
    the stay not exceeding the plateau point, and the result is flagged.
    """
    tail = surv.tail
    renormalized = False
    if tail[-1] > plateau_tol:
        plateau = tail[-1]
        tail = (tail - plateau) / (1.0 - plateau)
        renormalized = True
    t = np.arange(1, len(tail))
    mean = float(tail[1:].sum())
    second = float(((2 * t - 1) * tail[1:]).sum())
    var = max(second - mean**2, 0.0)
    return SurvivalMoments(mean=mean, std=math.sqrt(var), renormalized=renormalized)


# ---------------------------------------------------------------------------
# parametric continuous models, fitted by the method of moments


@dataclass(frozen=True)
class LognormalLoS:
    """Lognormal stay model: ``ln X ~ Normal(mu, sigma2)``."""

    mu: float
    sigma2: float
    family = "lognormal"

    def __post_init__(self):
        check_positive_scalar("sigma2", self.sigma2)

    def mean(self):
        return math.exp(self.mu + self.sigma2 / 2.0)

    def variance(self):
        return (math.exp(self.sigma2) - 1.0) * math.exp(2.0 * self.mu + self.sigma2)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        z = (np.log(np.maximum(x, np.finfo(float).tiny)) - self.mu) / math.sqrt(2.0 * self.sigma2)
        out = np.where(x > 0, 0.5 * erfc(z), 1.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class GammaLoS:
    """Gamma stay model with shape ``alpha`` and rate ``beta``."""

    alpha: float
    beta: float
    family = "gamma"

    def __post_init__(self):
        check_positive_scalar("alpha", self.alpha)
        check_positive_scalar("beta", self.beta)

    def mean(self):
        return self.alpha / self.beta

    def variance(self):
        return self.alpha / self.beta**2

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > 0, gammaincc(self.alpha, self.beta * np.maximum(x, 0.0)), 1.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class WeibullLoS:
    """Weibull stay model with shape ``k`` and scale ``lam``."""

    shape: float
    scale: float
    family = "weibull"

    def __post_init__(self):
        check_positive_scalar("shape", self.shape)
        check_positive_scalar("scale", self.scale)

    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def variance(self):
        k = self.shape
        g1 = math.gamma(1.0 + 1.0 / k)
        return self.scale**2 * (math.gamma(1.0 + 2.0 / k) - g1**2)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x > 0, np.exp(-((np.maximum(x, 0.0) / self.scale) ** self.shape)), 1.0)
        return out if out.ndim else float(out)


def fit_lognormal(mean, variance) -> LognormalLoS:
    """Lognormal parameters matching the given mean and variance exactly."""
    m = check_positive_scalar("mean", mean)
    v = check_positive_scalar("variance", variance)
    mu = math.log(m**2 / math.sqrt(m**2 + v))
    sigma2 = math.log(1.0 + v / m**2)
    return LognormalLoS(mu=mu, sigma2=sigma2)


def fit_gamma(mean, variance) -> GammaLoS:
    """Gamma shape/rate matching the given mean and variance exactly."""
    m = check_positive_scalar("mean", mean)
    v = check_positive_scalar("variance", variance)
    return GammaLoS(alpha=m**2 / v, beta=m / v)


def _weibull_moment_ratio(k):
    # Gamma(1 + 2/k) / Gamma(1 + 1/k)^2, evaluated in log space
    return math.exp(math.lgamma(1.0 + 2.0 / k) - 2.0 * math.lgamma(1.0 + 1.0 / k))


def fit_weibull(mean, variance, k_lo=0.05, k_hi=50.0) -> WeibullLoS:
    """Weibull parameters matching the given mean and variance.

    There is no closed form: the shape solves
    ``Gamma(1 + 2/k) / Gamma(1 + 1/k)^2 = 1 + variance / mean^2`` by
    bisection on ``[k_lo, k_hi]`` (the ratio is strictly decreasing in k),
    then ``scale = mean / Gamma(1 + 1/k)``.
    """
    m = check_positive_scalar("mean", mean)
    v = check_positive_scalar("variance", variance)
    target = 1.0 + v / m**2
    if not (_weibull_moment_ratio(k_hi) <= target <= _weibull_moment_ratio(k_lo)):
        raise ValueError(
            f"moment ratio {target!r} outside the range achievable for shape in "
            f"[{k_lo}, {k_hi}]"
        )
    lo, hi = k_lo, k_hi
    while hi - lo > 1e-12 * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if _weibull_moment_ratio(mid) > target:
            lo = mid
        else:
            hi = mid
    k = 0.5 * (lo + hi)
    return WeibullLoS(shape=k, scale=m / math.gamma(1.0 + 1.0 / k))


def default_t_max(dist) -> int:
    """Smallest t with continuous tail below ``TAIL_EPS``, capped at 120 days."""
    for t in range(1, T_MAX_CAP + 1):
        if dist.sf(t - 0.5) < TAIL_EPS:
            return t
    return T_MAX_CAP


def discretize(dist, t_max: int | None = None) -> DiscreteSurvival:
    """Day-count survival curve from a continuous model.

    Applies the half-day continuity correction ``P(S >= t) = P(X >= t - 0.5)``
    for ``t >= 1``; ``tail[0] = 1``.  The tail is truncated at ``t_max``
    without renormalization; the dropped mass is reported on the result.
    """
    if t_max is None:
        t_max = default_t_max(dist)
    t_max = int(t_max)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    tail = np.empty(t_max + 1)
    tail[0] = 1.0
    tail[1:] = dist.sf(np.arange(1, t_max + 1) - 0.5)
    return DiscreteSurvival(tail=tail, truncated_mass=float(dist.sf(t_max + 0.5)))


def geometric_survival(mean, t_max: int | None = None) -> DiscreteSurvival:
    """Geometric tail ``q^t`` with ``q = mean / (1 + mean)`` (so ``E S = mean``)."""
    m = check_positive_scalar("mean", mean)
    q = m / (1.0 + m)
    if t_max is None:
        t_max = min(T_MAX_CAP, max(1, int(math.ceil(math.log(TAIL_EPS) / math.log(q)))))
    tail = q ** np.arange(int(t_max) + 1)
    return DiscreteSurvival(tail=tail)


def deterministic_survival(days: int) -> DiscreteSurvival:
    """Point mass at ``days`` overnight stays."""
    days = int(days)
    if days < 0:
        raise ValueError("days must be >= 0")
    tail = np.zeros(days + 2)
    tail[: days + 1] = 1.0
    return DiscreteSurvival(tail=tail)
