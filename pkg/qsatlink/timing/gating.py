import logging
import math
from typing import Optional

import numpy as np
import pandas as pd

from qsatlink.exceptions import InvalidArgumentException
from qsatlink.timing.grid import as_grid
from qsatlink.timing.types import GateConfig, GatedCounts, TimeTagStream

logger = logging.getLogger(__name__)


def gate_spans(observed_time: float, pitch: float, cfg: GateConfig):
    """
    Time covered by the signal gates and by the exterior region over an observation.

    A pitch of zero stands for one isolated arrival inside the observation.

    :return: (gate_span, exterior_span) in **seconds**
    """
    if observed_time <= 0:
        return 0.0, 0.0
    if pitch <= 0:
        gate = min(2.0 * cfg.gate_halfwidth, observed_time)
        return gate, max(observed_time - 2.0 * cfg.exclusion_halfwidth, 0.0)
    gate = min(2.0 * cfg.gate_halfwidth, pitch)
    exterior = max(pitch - 2.0 * cfg.exclusion_halfwidth, 0.0)
    return observed_time * gate / pitch, observed_time * exterior / pitch


def gate_events(
    stream: TimeTagStream,
    grid,
    cfg: GateConfig,
    correct_channel: int = 0,
    observed_time: Optional[float] = None,
) -> GatedCounts:
    """
    Split events into signal, guard band and exterior background.

    An event within signal_halfwidth * sigma of its nearest expected arrival is
    signal; beyond background_exclusion * sigma it is background; in between it
    is dropped from both tallies.

    :param stream: Detector events
    :param grid: Expected arrival times, an `ArrivalGrid` or any ordered sequence
    :param cfg: Gate widths
    :param correct_channel: Channel expected to receive the prepared state
    :param observed_time: Open receive time in **seconds** the events were collected in,
        defaults to the grid extent

    :raises InvalidArgumentException: If the grid is empty
    """
    grid = as_grid(grid)
    if correct_channel not in (0, 1):
        raise InvalidArgumentException("correct_channel must be 0 or 1")
    if observed_time is None:
        observed_time = grid.extent
    if not (math.isfinite(observed_time) and observed_time >= 0):
        raise InvalidArgumentException(
            f"observed_time must be non-negative, got {observed_time}"
        )

    distance = np.abs(grid.offsets(stream.times)) if len(stream) else np.empty(0)
    signal = distance <= cfg.gate_halfwidth
    exterior = distance > cfg.exclusion_halfwidth
    guard = ~(signal | exterior)

    channels = stream.channels
    signal_by_channel = [int(np.count_nonzero(signal & (channels == c))) for c in (0, 1)]
    exterior_by_channel = [int(np.count_nonzero(exterior & (channels == c))) for c in (0, 1)]

    gate_span, exterior_span = gate_spans(observed_time, grid.mean_pitch, cfg)
    return GatedCounts(
        n_signal_correct=signal_by_channel[correct_channel],
        n_signal_wrong=signal_by_channel[1 - correct_channel],
        n_background_exterior=sum(exterior_by_channel),
        exterior_span=exterior_span,
        gate_span=gate_span,
        correct_channel=correct_channel,
        n_guard_band=int(np.count_nonzero(guard)),
        background_by_channel=(exterior_by_channel[0], exterior_by_channel[1]),
    )


def offset_histogram(
    stream: TimeTagStream,
    grid,
    bin_width: float = 1e-10,
    half_range: Optional[float] = None,
) -> pd.DataFrame:
    """
    Counts per channel against the offset from the nearest expected arrival.

    :param bin_width: Bin width in **seconds**
    :param half_range: Histogram covers [-half_range, half_range], defaults to half the grid pitch
        or one bin around a single arrival

    :return: Frame with columns offset_ns (bin center), count_ch0, count_ch1
    """
    grid = as_grid(grid)
    if not (math.isfinite(bin_width) and bin_width > 0):
        raise InvalidArgumentException(f"bin_width must be positive, got {bin_width}")
    if half_range is None:
        half_range = grid.mean_pitch / 2 or bin_width
    n_bins = max(int(math.ceil(2 * half_range / bin_width - 1e-9)), 1)
    edges = -half_range + bin_width * np.arange(n_bins + 1)

    offsets = grid.offsets(stream.times) if len(stream) else np.empty(0)
    counts = {
        f"count_ch{c}": np.histogram(offsets[stream.channels == c], bins=edges)[0]
        for c in (0, 1)
    }
    return pd.DataFrame({"offset_ns": (edges[:-1] + bin_width / 2) * 1e9, **counts})
