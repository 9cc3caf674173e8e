"""bedcast: hospital admission and bed-occupancy forecasting.

Fits a seasonal log-trend to daily admission counts by L1-penalized
optimization, estimates length-of-stay distributions from right-censored
data, and converts both into occupancy forecasts with a discrete-time
infinite-server model.  Includes a rolling-horizon backtest harness, a
synthetic scenario generator, and a Monte-Carlo simulation oracle.
"""

from .los import (
    CensoredLosData,
    DiscreteSurvival,
    GammaLoS,
    KaplanMeier,
    LognormalLoS,
    WeibullLoS,
    discretize,
    deterministic_survival,
    fit_gamma,
    fit_lognormal,
    fit_weibull,
    geometric_survival,
    kaplan_meier,
    survival_moments,
)
from .occupancy import OccupancyForecast, forecast_occupancy
from .residual import ResidualSurvival, residual_survival, stationary_residual
from .trend import AdmissionSeries, TrendModel
from .evaluation import (
    AccuracyReport,
    accuracy,
    lambda_sweep,
    poisson_error_floor,
    rolling_backtest,
)
from .simulate import (
    CensusPath,
    Scenario,
    generate_admissions,
    monte_carlo_forecast,
    sample_stays,
    simulate_census,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "AdmissionSeries",
    "CensoredLosData",
    "CensusPath",
    "DiscreteSurvival",
    "GammaLoS",
    "KaplanMeier",
    "LognormalLoS",
    "OccupancyForecast",
    "ResidualSurvival",
    "Scenario",
    "TrendModel",
    "WeibullLoS",
    "accuracy",
    "deterministic_survival",
    "discretize",
    "fit_gamma",
    "fit_lognormal",
    "fit_weibull",
    "forecast_occupancy",
    "generate_admissions",
    "geometric_survival",
    "kaplan_meier",
    "lambda_sweep",
    "monte_carlo_forecast",
    "poisson_error_floor",
    "residual_survival",
    "rolling_backtest",
    "sample_stays",
    "simulate_census",
    "stationary_residual",
    "survival_moments",
]
