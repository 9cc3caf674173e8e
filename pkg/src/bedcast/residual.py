"""Residual length of stay of patients currently present.

A patient present at the forecast origin arrived ``u`` days ago with
probability proportional to ``a[T-u] * P(S >= u)``; conditioning on the
arrival day gives the remaining-stay law

    P(S_r >= t) = sum_u a[T-u] P(S >= t+u) / sum_k a[T-k] P(S >= k).

The classical stationary residual from renewal theory is the constant
arrival, long-history limit of the same expression.
"""

from __future__ import annotations

import numpy as np

from .los import DiscreteSurvival
from .validation import check_nonnegative


class ResidualSurvival(DiscreteSurvival):
    """Tail of the remaining stay of a patient present at the origin."""


def residual_survival(past_arrivals, survival: DiscreteSurvival) -> ResidualSurvival:
    """Arrival-weighted residual stay distribution.

    ``past_arrivals[0]`` is yesterday's admission count (one day before the
    origin), ``past_arrivals[1]`` the day before, and so on.  Survival
    values beyond the curve's support are read as 0, so history further
    back than ``t_max`` days cannot contribute; a history shorter than
    ``t_max`` is treated as zero arrivals before its start.
    """
    arrivals = check_nonnegative("past_arrivals", past_arrivals)
    tail = survival.tail
    t_max = survival.t_max
    horizon = len(tail) + len(arrivals)
    padded = np.zeros(horizon + 1)
    padded[: len(tail)] = tail

    window = min(len(arrivals), t_max)
    num = np.zeros(t_max + 1)
    for u in range(1, window + 1):
        a = arrivals[u - 1]
        if a > 0.0:
            num += a * padded[u : u + t_max + 1]
    if num[0] <= 0.0:
        raise ValueError(
            "no patient can be present: every arrival weight a[T-u] * P(S >= u) is zero"
        )
    return ResidualSurvival(tail=num / num[0])


def stationary_residual(survival: DiscreteSurvival) -> ResidualSurvival:
    """Renewal-theory residual: ``P(S_r >= t) = sum_{k>=t} P(S > k) / E S``.

    Equals :func:`residual_survival` with constant arrivals and a history
    at least as long as the survival support.
    """
    tail = survival.tail
    # suffix[t] = sum_{m >= t+1} tail[m]  (with tail read as 0 beyond t_max)
    suffix = np.zeros(len(tail))
    suffix[:-1] = np.cumsum(tail[:0:-1])[::-1]
    if suffix[0] <= 0.0:
        raise ValueError("survival curve has zero mean")
    return ResidualSurvival(tail=suffix / suffix[0])
