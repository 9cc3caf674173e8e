"""Command-line interface.

Subcommands: ``fit``, ``los``, ``forecast``, ``backtest``, ``simulate``,
``poisson-floor``.  Human-readable reports go to stdout, diagnostics to
stderr, data only to files (``--out`` and friends).  Exit status is 0 iff
the command succeeded.  Flags override values from ``--config``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as dt
import sys
from pathlib import Path

import numpy as np

from . import io
from .evaluation import (
    SERIES_ORDER,
    lambda_sweep,
    poisson_error_floor,
    rolling_backtest,
)
from .los import discretize, fit_gamma, fit_lognormal, fit_weibull, kaplan_meier, survival_moments
from .occupancy import forecast_occupancy
from .residual import residual_survival
from .simulate import generate_admissions, simulate_census
from .trend import AdmissionSeries, TrendModel


def _config_value(config, key, override, cast, default):
    if override is not None:
        return override
    if config and key in config:
        return cast(config[key])
    return default


def _load_config(args):
    return io.read_config(args.config) if getattr(args, "config", None) else {}


def _resolved(args, config):
    """Effective run parameters: CLI flag, else config file, else default."""
    return {
        "smoothing": _config_value(config, "trend.lambda", args.smoothing, float, 10.0),
        "z": _config_value(config, "forecast.z", getattr(args, "z", None), float, 2.0),
        "t_max": _config_value(config, "los.t_max", getattr(args, "t_max", None), int, None),
        "family": _config_value(config, "los.family", getattr(args, "los_family", None), str, "km"),
    }


def _survival_from_los_file(path, family, t_max):
    """Empirical KM curve, or a parametric fit to its moments."""
    data = io.read_los_csv(path)
    surv = kaplan_meier(data)
    moments = survival_moments(surv)
    if moments.renormalized:
        print(
            "note: KM curve does not reach zero (longest stay censored); "
            "moments conditioned on the observed range",
            file=sys.stderr,
        )
    if family == "km":
        if surv.tail[-1] > 1e-9:
            plateau = surv.tail[-1]
            tail = (surv.tail - plateau) / (1.0 - plateau)
            surv = type(surv)(tail=tail)
        return surv, moments
    fitter = {"lognormal": fit_lognormal, "gamma": fit_gamma, "weibull": fit_weibull}.get(family)
    if fitter is None:
        raise io.InputError(f"unknown LoS family {family!r} (use km, lognormal, gamma, weibull)")
    dist = fitter(moments.mean, moments.std**2)
    return discretize(dist, t_max=t_max), moments


def _align_census(admissions, census_start, census_values):
    """Trim both series to a shared date range ending on the same day."""
    adm_end = admissions.date_of(len(admissions))
    census_end = census_start + dt.timedelta(days=len(census_values) - 1)
    if census_end != adm_end:
        raise io.InputError(
            f"census ends {census_end} but admissions end {adm_end}; "
            "both files must run through the same final day"
        )
    start = max(admissions.start_date, census_start)
    adm_offset = (start - admissions.start_date).days
    cen_offset = (start - census_start).days
    trimmed = AdmissionSeries(start, admissions.counts[adm_offset:])
    return trimmed, census_values[cen_offset:]


def cmd_fit(args):
    config = _load_config(args)
    params = _resolved(args, config)
    series = io.read_admissions_csv(args.admissions)
    horizon = args.horizon or 7
    model = TrendModel(smoothing=params["smoothing"]).fit(series)
    fitted = model.fitted_values()
    predictions = model.predict(horizon)
    growth = model.reproduction_factors()

    print(f"fitted {len(series)} days starting {series.start_date}")
    print(f"lambda = {params['smoothing']:g}, objective = {model.objective_:.6f}")
    effects = " ".join(f"{v:+.4f}" for v in model.weekday_effects_)
    print(f"weekday effects (Mon..Sun, log scale): {effects}")
    print(f"last de-seasonalized growth factor^4.5: {growth[-1]:.4f}")
    for date, value in zip(model.prediction_dates(horizon), predictions):
        print(f"predicted {date}: {value:.2f}")

    if args.out:
        dates = series.dates + model.prediction_dates(horizon)
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["date", "observed", "fitted", "predicted", "growth_factor"])
            for i, date in enumerate(dates):
                observed = f"{series.counts[i]:g}" if i < len(series) else ""
                fit_v = f"{fitted[i]:.6f}" if i < len(series) else ""
                pred = f"{predictions[i - len(series)]:.6f}" if i >= len(series) else ""
                growth_v = f"{growth[i - 1]:.6f}" if 1 <= i < len(series) else ""
                writer.writerow([date, observed, fit_v, pred, growth_v])
    if args.plot_data:
        rows = [("observed", d, v) for d, v in zip(series.dates, series.counts)]
        rows += [("fitted", d, v) for d, v in zip(series.dates, fitted)]
        rows += [("predicted", d, v) for d, v in zip(model.prediction_dates(horizon), predictions)]
        io.write_plot_data_csv(args.plot_data, rows)
    return 0


def cmd_los(args):
    config = _load_config(args)
    params = _resolved(args, config)
    data = io.read_los_csv(args.los)
    surv = kaplan_meier(data)
    km_moments = survival_moments(surv)

    # observed-only and still-present summaries, stays counted in overnights
    d = data.discharged
    c = data.censored
    days = np.arange(len(d))
    n_disc = int(d.sum())
    disc_stays = np.repeat(days - 1, d).clip(min=0)
    n_cens = int(c.sum())
    print(f"{'group':<28} {'patients':>9} {'mean':>8} {'stdev':>8}")
    print(f"{'discharged or died':<28} {n_disc:>9} {disc_stays.mean():>8.2f} {disc_stays.std():>8.2f}")
    if n_cens:
        cens_stays = np.repeat(days, c)
        print(f"{'currently treated':<28} {n_cens:>9} {cens_stays.mean():>8.2f} {cens_stays.std():>8.2f}")
    flag = " (conditioned on observed range)" if km_moments.renormalized else ""
    print(f"{'Kaplan-Meier estimate':<28} {'':>9} {km_moments.mean:>8.2f} {km_moments.std:>8.2f}{flag}")

    fits = {
        "lognormal": fit_lognormal(km_moments.mean, km_moments.std**2),
        "gamma": fit_gamma(km_moments.mean, km_moments.std**2),
        "weibull": fit_weibull(km_moments.mean, km_moments.std**2),
    }
    print("moment-matched fits:")
    log = fits["lognormal"]
    print(f"  lognormal: mu = {log.mu:.4f}, sigma2 = {log.sigma2:.4f}")
    print(f"  gamma:     shape = {fits['gamma'].alpha:.4f}, rate = {fits['gamma'].beta:.4f}")
    print(f"  weibull:   shape = {fits['weibull'].shape:.4f}, scale = {fits['weibull'].scale:.4f}")

    if args.out:
        t_max = params["t_max"] or max(surv.t_max, 1)
        curves = {name: discretize(dist, t_max=t_max) for name, dist in fits.items()}
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "km_tail", "lognormal_tail", "gamma_tail", "weibull_tail"])
            for t in range(t_max + 1):
                km_v = f"{surv.tail[t]:.8f}" if t <= surv.t_max else ""
                writer.writerow(
                    [t, km_v]
                    + [f"{curves[name].tail[t]:.8f}" for name in ("lognormal", "gamma", "weibull")]
                )
    return 0


def cmd_forecast(args):
    config = _load_config(args)
    params = _resolved(args, config)
    admissions = io.read_admissions_csv(args.admissions)
    census_start, census_values = io.read_census_csv(args.census)
    admissions, census_values = _align_census(admissions, census_start, census_values)
    survival, _ = _survival_from_los_file(args.los, params["family"], params["t_max"])

    horizon = args.horizon or 7
    model = TrendModel(smoothing=params["smoothing"]).fit(admissions)
    predicted = model.predict(max(horizon - 1, 1))
    counts = admissions.counts
    resid = residual_survival(counts[:-1][::-1], survival)
    means = np.concatenate([[counts[-1]], predicted[: horizon - 1]])
    variances = means.copy()
    variances[0] = 0.0  # today's arrivals are realized
    forecast = forecast_occupancy(
        float(census_values[-1]), resid, means, survival, admissions_variance=variances,
        z=params["z"],
    )
    dates = model.prediction_dates(horizon)
    print(f"origin {admissions.date_of(len(admissions))}: census {int(census_values[-1])}")
    for i, date in enumerate(dates):
        print(
            f"{date}: mean {forecast.mean[i]:8.1f}  interval "
            f"[{forecast.lower[i]:8.1f}, {forecast.upper[i]:8.1f}]"
        )
    if args.out:
        io.write_forecast_csv(args.out, dates, forecast)
    if args.plot_data:
        rows = [("census", admissions.date_of(i + 1), v) for i, v in enumerate(census_values)]
        rows += [("forecast_mean", d, v) for d, v in zip(dates, forecast.mean)]
        rows += [("forecast_lower", d, v) for d, v in zip(dates, forecast.lower)]
        rows += [("forecast_upper", d, v) for d, v in zip(dates, forecast.upper)]
        io.write_plot_data_csv(args.plot_data, rows)
    return 0


def _parse_horizons(text):
    try:
        horizons = tuple(int(part) for part in text.replace(",", " ").split())
    except ValueError:
        raise io.InputError(f"bad horizons {text!r}; expected integers like '3,7'")
    if not horizons:
        raise io.InputError("need at least one horizon")
    return horizons


def cmd_backtest(args):
    config = _load_config(args)
    params = _resolved(args, config)
    admissions = io.read_admissions_csv(args.admissions)
    census_start, census_values = io.read_census_csv(args.census)
    admissions, census_values = _align_census(admissions, census_start, census_values)
    survival, _ = _survival_from_los_file(args.los, params["family"], params["t_max"])
    horizons = _parse_horizons(
        args.horizons or config.get("backtest.horizons", "3,7")
    )
    stride = args.stride or int(config.get("backtest.stride", "1"))

    if args.sweep:
        lambdas = [float(x) for x in args.sweep.replace(",", " ").split()]
        sweep = lambda_sweep(
            admissions, census_values, survival, lambdas, horizon=horizons[0], stride=stride
        )
        print(f"{'lambda':>8} {'series':<32} {'wape':>8} {'mae':>10} {'rmse':>10}")
        for lam in lambdas:
            for series in SERIES_ORDER:
                rep = sweep[lam][series]
                wape = "n/a" if rep.wape is None else f"{rep.wape:8.4f}"
                print(f"{lam:>8g} {series:<32} {wape} {rep.mae:>10.3f} {rep.rmse:>10.3f}")
        return 0

    result = rolling_backtest(
        admissions, census_values, survival,
        smoothing=params["smoothing"], horizons=horizons, stride=stride,
    )
    for origin, reason in result.skipped:
        print(f"skipped origin day {origin}: {reason}", file=sys.stderr)
    print(f"{'series':<32} {'h':>3} {'wape':>8} {'mae':>10} {'rmse':>10} {'n':>5}")
    for series, horizon, rep in result.rows():
        wape = "     n/a" if rep.wape is None else f"{rep.wape:8.4f}"
        print(f"{series:<32} {horizon:>3} {wape} {rep.mae:>10.3f} {rep.rmse:>10.3f} {rep.n:>5}")
    if args.out:
        io.write_metrics_csv(args.out, result.rows())
    if args.plot_data:
        rows = []
        for record in result.records:
            target = admissions.date_of(record.origin_index + record.horizon)
            h = record.horizon
            rows.append((f"arrivals_actual_h{h}", target, record.actual_arrivals))
            rows.append((f"arrivals_predicted_h{h}", target, record.predicted_arrivals))
            rows.append((f"occupancy_actual_h{h}", target, record.actual_occupancy))
            rows.append(
                (f"occupancy_forecasted_arrivals_h{h}", target, record.occupancy_forecasted_arrivals)
            )
            rows.append(
                (f"occupancy_realized_arrivals_h{h}", target, record.occupancy_realized_arrivals)
            )
        io.write_plot_data_csv(args.plot_data, rows)
    return 0


def cmd_simulate(args):
    scenario = io.read_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    days = args.days or scenario.total_days
    admissions = generate_admissions(scenario, days)
    path = simulate_census(admissions, scenario.survival(), seed=scenario.seed + 1)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_admissions_csv(out_dir / "admissions.csv", admissions)
    io.write_census_csv(out_dir / "census.csv", path.start_date, path.census)
    print(f"wrote {out_dir / 'admissions.csv'} and {out_dir / 'census.csv'} ({days} days)")
    return 0


def cmd_poisson_floor(args):
    print(f"{'mu':>10} {'mae':>10} {'wape':>9} {'rmse':>10}")
    rows = []
    for mu in args.mu:
        floor = poisson_error_floor(mu)
        rows.append((mu, floor))
        print(f"{mu:>10g} {floor.mae:>10.3f} {floor.wape * 100:>8.2f}% {floor.rmse:>10.3f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mu", "mae", "wape", "rmse"])
            for mu, floor in rows:
                writer.writerow([mu, f"{floor.mae:.6f}", f"{floor.wape:.6f}", f"{floor.rmse:.6f}"])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bedcast",
        description="Forecast hospital admissions and bed occupancy from daily counts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, census=False, los=False):
        p.add_argument("--lambda", dest="smoothing", type=float, default=None,
                       help="trend smoothing weight (default 10)")
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--plot-data", default=None, help="tidy series,date,value CSV for plotting")
        if los:
            p.add_argument("--los", required=True, help="length-of-stay CSV")
            p.add_argument("--los-family", dest="los_family", default=None,
                           choices=["km", "lognormal", "gamma", "weibull"],
                           help="survival model built from the LoS file (default km)")
            p.add_argument("--t-max", dest="t_max", type=int, default=None,
                           help="support cap for parametric survival curves")
        if census:
            p.add_argument("census", help="census CSV (date,occupied)")

    p_fit = sub.add_parser("fit", help="fit the admission trend and predict ahead")
    p_fit.add_argument("admissions", help="admissions CSV (date,admissions)")
    p_fit.add_argument("--horizon", type=int, default=None, help="days ahead to predict (default 7)")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_los = sub.add_parser("los", help="estimate the stay distribution from censored data")
    p_los.add_argument("los", help="length-of-stay CSV")
    p_los.add_argument("--t-max", dest="t_max", type=int, default=None)
    common(p_los)
    p_los.set_defaults(func=cmd_los)

    p_fc = sub.add_parser("forecast", help="forecast occupied beds")
    p_fc.add_argument("admissions", help="admissions CSV (date,admissions)")
    p_fc.add_argument("--horizon", type=int, default=None, help="days ahead (default 7)")
    p_fc.add_argument("--z", type=float, default=None, help="interval half-width in stdevs (default 2)")
    common(p_fc, census=True, los=True)
    p_fc.set_defaults(func=cmd_forecast)

    p_bt = sub.add_parser("backtest", help="rolling-origin accuracy evaluation")
    p_bt.add_argument("admissions", help="admissions CSV (date,admissions)")
    p_bt.add_argument("--horizons", default=None, help="comma-separated horizons (default 3,7)")
    p_bt.add_argument("--stride", type=int, default=None, help="days between origins (default 1)")
    p_bt.add_argument("--sweep", default=None,
                      help="comma-separated smoothing values; reports accuracy per value")
    common(p_bt, census=True, los=True)
    p_bt.set_defaults(func=cmd_backtest)

    p_sim = sub.add_parser("simulate", help="generate synthetic admissions and census data")
    p_sim.add_argument("scenario", help="scenario file (see data/example_scenario.ini)")
    p_sim.add_argument("--days", type=int, default=None, help="days to generate")
    p_sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_sim.add_argument("--out", default=None, help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_pf = sub.add_parser("poisson-floor", help="irreducible error of predicting a Poisson variable")
    p_pf.add_argument("--mu", type=float, action="append", required=True,
                      help="Poisson rate (repeatable)")
    p_pf.add_argument("--out", default=None, help="output CSV path")
    p_pf.set_defaults(func=cmd_poisson_floor)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (io.InputError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
