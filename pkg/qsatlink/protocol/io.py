import math

import pandas as pd

from qsatlink.protocol.types import SessionReport, TwoWayResult
from qsatlink.tabular import PathOrStream, write_report
from qsatlink.timing import intervals_to_frame

SESSION_EXTRA_COLUMNS = [
    "mean_slant_range_m",
    "mean_elevation_deg",
    "airmass",
    "mu_sat_estimate",
]


def report_to_frame(report: SessionReport) -> pd.DataFrame:
    """
    Per-interval session table: the interval analysis columns followed by the geometry
    and the mu_sat estimate of each interval.
    """
    frame = intervals_to_frame([r.stats for r in report.intervals])
    frame["mean_slant_range_m"] = [r.mean_slant_range for r in report.intervals]
    frame["mean_elevation_deg"] = [math.degrees(r.mean_elevation) for r in report.intervals]
    frame["airmass"] = [r.airmass for r in report.intervals]
    frame["mu_sat_estimate"] = [r.mu_sat_estimate for r in report.intervals]
    return frame


def save_report(report: SessionReport, target: PathOrStream) -> None:
    write_report(report_to_frame(report), target)


def two_way_to_frame(result: TwoWayResult) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "slot": result.sifted_slots,
            "key_bit": result.key_bits.astype(int),
            "sifted_bit": result.sifted_bits.astype(int),
            "error": (result.sifted_bits != result.key_bits).astype(int),
        }
    )


def save_two_way(result: TwoWayResult, target: PathOrStream) -> None:
    write_report(two_way_to_frame(result), target)


def summary_rows(report: SessionReport) -> pd.DataFrame:
    """
    Pass-level aggregates as name/value rows.
    """
    summary = report.summary
    verdict = report.verdict
    rows = [
        ("satellite", report.satellite),
        ("seed", report.seed),
        ("channel_model", report.channel_model),
        ("n_intervals", summary.n_intervals),
        ("n_qualified", summary.n_qualified),
        ("n_corr", summary.n_corr),
        ("n_wrong", summary.n_wrong),
        ("qber", summary.qber),
        ("return_rate_hz", summary.return_rate_hz),
        ("duty_cycle", summary.duty_cycle),
        ("mu_sat_estimate", report.mu_sat_estimate),
        ("mu_sat_upper_bound", report.mu_sat_upper_bound),
        ("qber_ok", verdict.qber_ok),
        ("mu_ok", verdict.mu_ok),
        ("feasible", verdict.overall),
    ]
    return pd.DataFrame(rows, columns=["name", "value"]).astype({"value": object})
