import logging
import math
from typing import List, Optional, Sequence

import pandas as pd

from qsatlink.exceptions import InvalidArgumentException
from qsatlink.timing.gating import gate_events, offset_histogram
from qsatlink.timing.grid import Grid, as_grid
from qsatlink.timing.qber import (
    background_residuals,
    exceeds_background,
    qber_bayesian,
    qber_background_subtracted,
)
from qsatlink.timing.types import (
    GateConfig,
    GatedCounts,
    IntervalStats,
    PassSummary,
    ReceiveWindows,
    TimeTagStream,
)

logger = logging.getLogger(__name__)

"""
Default analysis interval length in seconds.
"""
DEFAULT_INTERVAL = 5.0

"""
Default selection threshold in Poisson standard deviations above the background.
"""
DEFAULT_SELECTION_SIGMA = 5.0


def interval_bounds(grid: Grid, interval: float) -> List[tuple]:
    """
    Consecutive intervals from the first expected arrival to the end of the grid.

    The last interval is shorter when the grid does not span a whole number of intervals.
    """
    if not (math.isfinite(interval) and interval > 0):
        raise InvalidArgumentException(f"interval must be positive, got {interval}")
    n = max(int(math.ceil(grid.extent / interval - 1e-9)), 1)
    bounds = []
    for j in range(n):
        start = grid.start + j * interval
        bounds.append((start, min(start + interval, grid.end)))
    return bounds


def _return_rate(counts: GatedCounts, observed_time: float, capture: float) -> float:
    if observed_time <= 0:
        return 0.0
    if counts.expected_background_in_gate is None:
        return math.nan
    residual = sum(background_residuals(counts))
    return residual / (capture * observed_time)


def analyze_intervals(
    stream: TimeTagStream,
    grid,
    cfg: GateConfig,
    interval: float = DEFAULT_INTERVAL,
    windows: Optional[ReceiveWindows] = None,
    correct_channel: int = 0,
    n_sigma: float = DEFAULT_SELECTION_SIGMA,
) -> List[IntervalStats]:
    """
    Gate every interval of the pass and estimate its QBER and return rate.

    :param stream: Detector events
    :param grid: Expected arrival times
    :param cfg: Gate widths
    :param interval: Interval length in **seconds**
    :param windows: Open receive windows. Events outside them are ignored, their open time
        sets each interval's duty cycle and their correct channel the interval's
    :param correct_channel: Correct channel when no windows are given
    :param n_sigma: Selection threshold in Poisson standard deviations

    :return: One record per interval, qualified or not
    """
    grid = as_grid(grid)
    capture = cfg.capture_fraction
    results: List[IntervalStats] = []

    for index, (start, end) in enumerate(interval_bounds(grid, interval)):
        events = stream.between(start, end)
        if windows is not None:
            events = events.within(windows.bounds)
            observed = windows.open_time(start, end)
            channel = windows.majority_channel(start, end, default=correct_channel)
        else:
            observed = end - start
            channel = correct_channel

        counts = gate_events(events, grid, cfg, channel, observed)
        b = counts.expected_background_in_gate
        qualified = b is not None and any(
            exceeds_background(n, b, n_sigma) for n in counts.n_signal
        )
        results.append(
            IntervalStats(
                index=index,
                t_start=start,
                t_end=end,
                counts=counts,
                observed_time=observed,
                duty_cycle=observed / (end - start) if end > start else 0.0,
                qualified=qualified,
                background_rate_hz=counts.background_rate,
                qber_raw=qber_bayesian(counts.n_signal_correct, counts.n_signal_wrong),
                qber_bg_subtracted=qber_background_subtracted(counts) if b is not None else math.nan,
                return_rate_hz=_return_rate(counts, observed, capture),
            )
        )

    n_qualified = sum(s.qualified for s in results)
    logger.debug(f"{n_qualified} of {len(results)} intervals qualified")
    return results


def select_intervals(
    stream: TimeTagStream,
    grid,
    cfg: GateConfig,
    interval: float = DEFAULT_INTERVAL,
    windows: Optional[ReceiveWindows] = None,
    correct_channel: int = 0,
    n_sigma: float = DEFAULT_SELECTION_SIGMA,
) -> List[IntervalStats]:
    """
    Intervals in which at least one channel's signal is n_sigma above its background.

    May be empty.
    """
    return [
        s
        for s in analyze_intervals(
            stream, grid, cfg, interval, windows, correct_channel, n_sigma
        )
        if s.qualified
    ]


def summarize(intervals: Sequence[IntervalStats]) -> PassSummary:
    """
    Pool the qualified intervals, or every interval when none qualified.
    """
    qualified = [s for s in intervals if s.qualified]
    selected = qualified or list(intervals)
    n_corr = sum(s.n_corr for s in selected)
    n_wrong = sum(s.n_wrong for s in selected)

    rated = [s for s in selected if math.isfinite(s.return_rate_hz) and s.observed_time > 0]
    open_time = sum(s.observed_time for s in rated)
    return_rate = (
        sum(s.return_rate_hz * s.observed_time for s in rated) / open_time if open_time > 0 else 0.0
    )
    total_length = sum(s.length for s in intervals)
    duty_cycle = sum(s.observed_time for s in intervals) / total_length if total_length > 0 else 0.0

    return PassSummary(
        n_intervals=len(intervals),
        n_qualified=len(qualified),
        n_corr=n_corr,
        n_wrong=n_wrong,
        qber=qber_bayesian(n_corr, n_wrong),
        return_rate_hz=return_rate,
        duty_cycle=duty_cycle,
        selected_qualified=bool(qualified),
    )


def interval_histograms(
    stream: TimeTagStream,
    grid,
    interval: float = DEFAULT_INTERVAL,
    windows: Optional[ReceiveWindows] = None,
    bin_width: float = 1e-10,
) -> pd.DataFrame:
    """
    Offset histograms of every interval stacked in one frame.

    :return: Frame with columns interval, t_start_s, offset_ns, count_ch0, count_ch1
    """
    grid = as_grid(grid)
    frames = []
    for index, (start, end) in enumerate(interval_bounds(grid, interval)):
        events = stream.between(start, end)
        if windows is not None:
            events = events.within(windows.bounds)
        frame = offset_histogram(events, grid, bin_width)
        frame.insert(0, "t_start_s", start)
        frame.insert(0, "interval", index)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


INTERVAL_COLUMNS = [
    "t_start_s",
    "t_end_s",
    "correct_channel",
    "n_corr",
    "n_wrong",
    "n_guard_band",
    "n_background_exterior",
    "background_rate_hz",
    "duty_cycle",
    "qber_raw",
    "qber_bg_subtracted",
    "return_rate_hz",
    "qualified",
]


def intervals_to_frame(intervals: Sequence[IntervalStats]) -> pd.DataFrame:
    """
    Per-interval analysis table, one row per interval.
    """
    return pd.DataFrame(
        {
            "t_start_s": [s.t_start for s in intervals],
            "t_end_s": [s.t_end for s in intervals],
            "correct_channel": [s.counts.correct_channel for s in intervals],
            "n_corr": [s.n_corr for s in intervals],
            "n_wrong": [s.n_wrong for s in intervals],
            "n_guard_band": [s.counts.n_guard_band for s in intervals],
            "n_background_exterior": [s.counts.n_background_exterior for s in intervals],
            "background_rate_hz": [s.background_rate_hz for s in intervals],
            "duty_cycle": [s.duty_cycle for s in intervals],
            "qber_raw": [s.qber_raw for s in intervals],
            "qber_bg_subtracted": [s.qber_bg_subtracted for s in intervals],
            "return_rate_hz": [s.return_rate_hz for s in intervals],
            "qualified": [s.qualified for s in intervals],
        },
        columns=INTERVAL_COLUMNS,
    )
