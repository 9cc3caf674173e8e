"""CSV and config-file input/output.

File formats (all CSV files carry a header, UTF-8, ISO-8601 dates):

* admissions: ``date,admissions`` with consecutive daily rows
* census: ``date,occupied`` with consecutive daily rows
* length of stay, aggregated: ``stay_days,discharged,censored``
* length of stay, per patient: ``stay_days,is_censored``
* occupancy forecast: ``date,mean,variance,lower,upper``
* metrics: ``series,horizon,wape,mae,rmse,n``
* plot data (tidy long form): ``series,date,value``

Config and scenario files are flat ``key = value`` text with one section
per concern (configparser syntax); see ``data/example_scenario.ini``.
"""

from __future__ import annotations

import configparser
import csv
import datetime as dt

import numpy as np

from .los import (
    CensoredLosData,
    deterministic_survival,
    fit_gamma,
    fit_lognormal,
    fit_weibull,
    geometric_survival,
)
from .simulate import Scenario
from .trend import AdmissionSeries


class InputError(ValueError):
    """Malformed or inconsistent user-supplied file."""


def _parse_date(text, path, line_no):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise InputError(f"{path}:{line_no}: bad date {text!r}, expected YYYY-MM-DD")


def _parse_count(text, path, line_no, column):
    try:
        value = int(text.strip())
    except ValueError:
        raise InputError(f"{path}:{line_no}: {column} must be an integer, got {text!r}")
    if value < 0:
        raise InputError(f"{path}:{line_no}: {column} must be non-negative, got {value}")
    return value


def _read_rows(path, expected_header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file")
        if header != list(expected_header):
            raise InputError(
                f"{path}: expected header {','.join(expected_header)}, got {','.join(header)}"
            )
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected_header):
                raise InputError(f"{path}:{line_no}: expected {len(expected_header)} fields")
            rows.append((line_no, row))
    if not rows:
        raise InputError(f"{path}: no data rows")
    return rows


def _read_dated_counts(path, value_column):
    rows = _read_rows(path, ("date", value_column))
    dates = []
    values = []
    for line_no, row in rows:
        dates.append(_parse_date(row[0], path, line_no))
        values.append(_parse_count(row[1], path, line_no, value_column))
    gaps = []
    for prev, cur in zip(dates, dates[1:]):
        delta = (cur - prev).days
        if delta != 1:
            gaps.append(f"{prev} -> {cur}")
    if gaps:
        raise InputError(
            f"{path}: dates must be consecutive days; gaps or disorder at: " + "; ".join(gaps)
        )
    return dates[0], np.array(values, dtype=float)


def read_admissions_csv(path) -> AdmissionSeries:
    start, values = _read_dated_counts(path, "admissions")
    return AdmissionSeries(start_date=start, counts=values)


def read_census_csv(path):
    """Returns ``(start_date, occupied)`` for a ``date,occupied`` file."""
    return _read_dated_counts(path, "occupied")


def read_los_csv(path) -> CensoredLosData:
    """Accepts the aggregated or the per-patient stay schema."""
    with open(path, newline="", encoding="utf-8") as fh:
        try:
            header = [h.strip().lower() for h in next(csv.reader(fh))]
        except StopIteration:
            raise InputError(f"{path}: empty file")
    if header == ["stay_days", "discharged", "censored"]:
        rows = _read_rows(path, ("stay_days", "discharged", "censored"))
        days, discharged, censored = [], [], []
        for line_no, row in rows:
            days.append(_parse_count(row[0], path, line_no, "stay_days"))
            discharged.append(_parse_count(row[1], path, line_no, "discharged"))
            censored.append(_parse_count(row[2], path, line_no, "censored"))
        return CensoredLosData.from_counts(days, discharged, censored)
    if header == ["stay_days", "is_censored"]:
        rows = _read_rows(path, ("stay_days", "is_censored"))
        stays, flags = [], []
        truthy = {"1": True, "true": True, "0": False, "false": False}
        for line_no, row in rows:
            stays.append(_parse_count(row[0], path, line_no, "stay_days"))
            flag = truthy.get(row[1].strip().lower())
            if flag is None:
                raise InputError(f"{path}:{line_no}: is_censored must be 0/1/true/false")
            flags.append(flag)
        return CensoredLosData.from_records(stays, flags)
    raise InputError(
        f"{path}: unrecognized length-of-stay schema {','.join(header)}; expected "
        "stay_days,discharged,censored or stay_days,is_censored"
    )


def write_dated_counts(path, start_date, values, value_column):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", value_column])
        for i, v in enumerate(values):
            writer.writerow([start_date + dt.timedelta(days=i), int(round(float(v)))])


def write_admissions_csv(path, series: AdmissionSeries):
    write_dated_counts(path, series.start_date, series.counts, "admissions")


def write_census_csv(path, start_date, census):
    write_dated_counts(path, start_date, census, "occupied")


def write_forecast_csv(path, dates, forecast):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "mean", "variance", "lower", "upper"])
        for i, date in enumerate(dates):
            writer.writerow(
                [
                    date,
                    f"{forecast.mean[i]:.6f}",
                    f"{forecast.variance[i]:.6f}",
                    f"{forecast.lower[i]:.6f}",
                    f"{forecast.upper[i]:.6f}",
                ]
            )


def read_forecast_csv(path):
    rows = _read_rows(path, ("date", "mean", "variance", "lower", "upper"))
    out = []
    for line_no, row in rows:
        date = _parse_date(row[0], path, line_no)
        try:
            numbers = [float(cell) for cell in row[1:]]
        except ValueError:
            raise InputError(f"{path}:{line_no}: non-numeric forecast value")
        out.append((date, *numbers))
    return out


def write_metrics_csv(path, rows):
    """``rows`` as produced by ``BacktestResult.rows()``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "horizon", "wape", "mae", "rmse", "n"])
        for series, horizon, report in rows:
            wape = "" if report.wape is None else f"{report.wape:.6f}"
            writer.writerow(
                [series, horizon, wape, f"{report.mae:.6f}", f"{report.rmse:.6f}", report.n]
            )


def read_metrics_csv(path):
    rows = _read_rows(path, ("series", "horizon", "wape", "mae", "rmse", "n"))
    out = []
    for line_no, row in rows:
        wape = None if row[2] == "" else float(row[2])
        out.append((row[0], int(row[1]), wape, float(row[3]), float(row[4]), int(row[5])))
    return out


def write_plot_data_csv(path, rows):
    """Tidy long-form series for external plotting: (series, date, value)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "date", "value"])
        for series, date, value in rows:
            writer.writerow([series, date, f"{float(value):.6f}"])


def read_plot_data_csv(path):
    rows = _read_rows(path, ("series", "date", "value"))
    return [
        (row[0], _parse_date(row[1], path, line_no), float(row[2])) for line_no, row in rows
    ]


# ---------------------------------------------------------------------------
# config and scenario files


def _load_ini(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    found = parser.read(path, encoding="utf-8")
    if not found:
        raise InputError(f"{path}: cannot read file")
    return parser


def read_config(path) -> dict:
    """Flat ``{section.key: value-string}`` view of a config file."""
    parser = _load_ini(path)
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            out[f"{section}.{key}"] = value.strip()
    return out


def survival_from_spec(family, mean=None, std=None, days=None, t_max=None):
    """Build a survival curve from scenario/config keys."""
    family = family.strip().lower()
    if family == "deterministic":
        if days is None:
            raise InputError("deterministic stay needs 'days'")
        return deterministic_survival(int(days))
    if family == "geometric":
        if mean is None:
            raise InputError("geometric stay needs 'mean'")
        return geometric_survival(float(mean), t_max=t_max)
    if family in ("lognormal", "gamma", "weibull"):
        if mean is None or std is None:
            raise InputError(f"{family} stay needs 'mean' and 'std'")
        fitter = {"lognormal": fit_lognormal, "gamma": fit_gamma, "weibull": fit_weibull}[family]
        from .los import discretize

        return discretize(fitter(float(mean), float(std) ** 2), t_max=t_max)
    raise InputError(f"unknown stay family {family!r}")


def read_scenario(path) -> Scenario:
    """Parse a scenario file; see ``data/example_scenario.ini`` for the schema.

    Weekday multipliers are normalized to geometric mean 1, so they can be
    written in round numbers.
    """
    parser = _load_ini(path)
    try:
        sc = parser["scenario"]
        base = float(sc["base_intensity"])
        seed = int(sc["seed"])
        start = dt.date.fromisoformat(sc.get("start_date", "2020-11-02"))
        phases = []
        for _, value in parser.items("phases"):
            parts = value.split()
            if len(parts) != 2:
                raise InputError(f"{path}: phase entries need 'length growth', got {value!r}")
            phases.append((int(parts[0]), float(parts[1])))
        raw_mult = [float(x) for x in parser["weekday"]["multipliers"].split()]
        if len(raw_mult) != 7:
            raise InputError(f"{path}: need 7 weekday multipliers")
        mult = np.asarray(raw_mult, dtype=float)
        if np.any(mult <= 0):
            raise InputError(f"{path}: weekday multipliers must be positive")
        mult = mult / np.exp(np.log(mult).mean())
        los_sec = parser["los"]
        survival = survival_from_spec(
            los_sec["family"],
            mean=los_sec.get("mean"),
            std=los_sec.get("std"),
            days=los_sec.get("days"),
            t_max=int(los_sec["t_max"]) if "t_max" in los_sec else None,
        )
    except KeyError as err:
        raise InputError(f"{path}: missing scenario key {err}")
    return Scenario(
        base_intensity=base,
        phases=tuple(phases),
        weekday_multipliers=tuple(mult),
        los=survival,
        seed=seed,
        start_date=start,
    )
