"""
Shutter schedule, SLR-anchored arrival grid, gating, interval selection and QBER estimators.
"""

from .analysis import (
    DEFAULT_INTERVAL,
    DEFAULT_SELECTION_SIGMA,
    INTERVAL_COLUMNS,
    analyze_intervals,
    interval_bounds,
    interval_histograms,
    intervals_to_frame,
    select_intervals,
    summarize,
)
from .gating import gate_events, gate_spans, offset_histogram
from .grid import ArrivalGrid, Grid, PointGrid, as_grid, expected_arrivals
from .io import (
    load_epochs,
    load_timetags,
    load_windows,
    save_epochs,
    save_timetags,
    save_windows,
)
from .qber import (
    background_residuals,
    exceeds_background,
    qber_background_subtracted,
    qber_bayesian,
)
from .schedule import effective_rx_window, pulses_per_slot, slot_rx_window
from .types import (
    GateConfig,
    GatedCounts,
    IntervalStats,
    PassSummary,
    ReceiveWindows,
    SlotSchedule,
    TimeTagStream,
    quantize,
)

__all__ = [
    "DEFAULT_INTERVAL",
    "DEFAULT_SELECTION_SIGMA",
    "INTERVAL_COLUMNS",
    "ArrivalGrid",
    "GateConfig",
    "GatedCounts",
    "Grid",
    "IntervalStats",
    "PassSummary",
    "PointGrid",
    "ReceiveWindows",
    "SlotSchedule",
    "TimeTagStream",
    "analyze_intervals",
    "as_grid",
    "background_residuals",
    "effective_rx_window",
    "exceeds_background",
    "expected_arrivals",
    "gate_events",
    "gate_spans",
    "interval_bounds",
    "interval_histograms",
    "intervals_to_frame",
    "load_epochs",
    "load_timetags",
    "load_windows",
    "offset_histogram",
    "pulses_per_slot",
    "qber_background_subtracted",
    "qber_bayesian",
    "quantize",
    "save_epochs",
    "save_timetags",
    "save_windows",
    "select_intervals",
    "slot_rx_window",
    "summarize",
]
