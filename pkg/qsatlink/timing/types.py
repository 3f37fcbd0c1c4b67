import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import erf

from qsatlink.consts import DETECTOR_JITTER, SLOT_PERIOD, TAGGER_RESOLUTION
from qsatlink.exceptions import InvalidArgumentException

Window = Tuple[float, float]


@dataclass(frozen=True)
class SlotSchedule:
    """
    Shutter timing of one SLR slot.

    The first half of the slot carries the upgoing qubits, the second half is
    reserved to the receiver. Both shutter delays are charged against the
    receive window.
    """

    slot_period: float = SLOT_PERIOD
    """Length of a slot in **seconds**, one SLR period."""
    tx_window: Window = (0.0, SLOT_PERIOD / 2)
    """Transmit window (start, end) in **seconds** from the slot start."""
    rx_window: Window = (SLOT_PERIOD / 2, SLOT_PERIOD)
    """Receive window (start, end) in **seconds** from the slot start."""
    shutter_open_delay: float = 0.002
    """Time the receiver shutter needs to open, in **seconds**."""
    shutter_close_delay: float = 0.0025
    """Time the transmitter shutter needs to close, in **seconds**."""

    def __post_init__(self):
        if not (math.isfinite(self.slot_period) and self.slot_period > 0):
            raise InvalidArgumentException(
                f"slot_period must be positive, got {self.slot_period}"
            )
        for name in ("tx_window", "rx_window"):
            start, end = getattr(self, name)
            if not 0 <= start < end <= self.slot_period:
                raise InvalidArgumentException(
                    f"{name} ({start}, {end}) must be a non-empty range within the slot"
                )
            object.__setattr__(self, name, (float(start), float(end)))
        (tx0, tx1), (rx0, rx1) = self.tx_window, self.rx_window
        if tx0 < rx1 and rx0 < tx1:
            raise InvalidArgumentException("tx_window and rx_window overlap")
        for name in ("shutter_open_delay", "shutter_close_delay"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidArgumentException(f"{name} must be non-negative, got {value}")

    @property
    def tx_length(self) -> float:
        return self.tx_window[1] - self.tx_window[0]

    @property
    def rx_length(self) -> float:
        return self.rx_window[1] - self.rx_window[0]

    @property
    def shutter_overhead(self) -> float:
        return self.shutter_open_delay + self.shutter_close_delay


@dataclass(frozen=True)
class GateConfig:
    """
    Gating of detection events around the expected arrival times.
    """

    sigma: float = DETECTOR_JITTER
    """Detection accuracy in **seconds**."""
    signal_halfwidth: float = 1.0
    """Half width of the signal gate, in multiples of sigma."""
    background_exclusion: float = 3.0
    """Events farther than this many sigma from the grid are background."""

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidArgumentException(f"sigma must be positive, got {self.sigma}")
        if not (math.isfinite(self.signal_halfwidth) and self.signal_halfwidth > 0):
            raise InvalidArgumentException(
                f"signal_halfwidth must be positive, got {self.signal_halfwidth}"
            )
        if not (
            math.isfinite(self.background_exclusion)
            and self.background_exclusion >= self.signal_halfwidth
        ):
            raise InvalidArgumentException(
                "background_exclusion must be at least signal_halfwidth"
            )

    @property
    def gate_halfwidth(self) -> float:
        """Half width of the signal gate in **seconds**."""
        return self.signal_halfwidth * self.sigma

    @property
    def exclusion_halfwidth(self) -> float:
        return self.background_exclusion * self.sigma

    @property
    def capture_fraction(self) -> float:
        """
        Fraction of Gaussian-jittered signal falling inside the gate, erf(h/sqrt2).
        """
        return float(erf(self.signal_halfwidth / math.sqrt(2.0)))


@dataclass(frozen=True, eq=False)
class TimeTagStream:
    """
    Detector events ordered in time.
    """

    times: np.ndarray
    """Event times in **seconds**, non-decreasing."""
    channels: np.ndarray
    """Detector channel of each event, 0 or 1."""
    resolution: float = TAGGER_RESOLUTION
    """Time tagger resolution in **seconds**."""

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        channels = np.array(self.channels).reshape(-1)
        if len(times) != len(channels):
            raise InvalidArgumentException("times and channels have different lengths")
        if not np.all(np.isfinite(times)):
            raise InvalidArgumentException("event times must be finite")
        if np.any(np.diff(times) < 0):
            raise InvalidArgumentException("event times must be non-decreasing")
        if len(channels) and not np.all((channels == 0) | (channels == 1)):
            raise InvalidArgumentException("channels must be 0 or 1")
        if not (math.isfinite(self.resolution) and self.resolution > 0):
            raise InvalidArgumentException(
                f"resolution must be positive, got {self.resolution}"
            )
        channels = channels.astype(np.int8)
        times.setflags(write=False)
        channels.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "channels", channels)

    @classmethod
    def from_events(
        cls, times, channels, resolution: float = TAGGER_RESOLUTION
    ) -> "TimeTagStream":
        """
        Quantize unordered events to the tagger resolution and sort them.

        The sort is stable, so simultaneous events keep their input order.
        """
        quantized = quantize(np.asarray(times, dtype=float), resolution)
        order = np.argsort(quantized, kind="stable")
        return cls(quantized[order], np.asarray(channels)[order], resolution)

    @classmethod
    def empty(cls, resolution: float = TAGGER_RESOLUTION) -> "TimeTagStream":
        return cls(np.empty(0), np.empty(0, dtype=np.int8), resolution)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def events(self) -> List[Tuple[float, int]]:
        return [(float(t), int(c)) for t, c in zip(self.times, self.channels)]

    def count(self, channel: int) -> int:
        return int(np.count_nonzero(self.channels == channel))

    def between(self, start: float, end: float) -> "TimeTagStream":
        """
        Events with start <= t < end.
        """
        lo, hi = np.searchsorted(self.times, [start, end], side="left")
        return TimeTagStream(self.times[lo:hi], self.channels[lo:hi], self.resolution)

    def within(self, windows: np.ndarray) -> "TimeTagStream":
        """
        Events inside any of the given half-open (start, end) windows.

        :param windows: Array of shape (n, 2), sorted and non-overlapping
        """
        windows = np.asarray(windows, dtype=float).reshape(-1, 2)
        if len(windows) == 0:
            return TimeTagStream.empty(self.resolution)
        idx = np.searchsorted(windows[:, 0], self.times, side="right") - 1
        inside = (idx >= 0) & (self.times < windows[np.clip(idx, 0, None), 1])
        return TimeTagStream(self.times[inside], self.channels[inside], self.resolution)


def quantize(times: np.ndarray, resolution: float = TAGGER_RESOLUTION) -> np.ndarray:
    """
    Round times to the nearest multiple of the tagger resolution.
    """
    return np.round(np.asarray(times, dtype=float) / resolution) * resolution


@dataclass(frozen=True)
class GatedCounts:
    """
    Signal and background tallies of a gated stream.

    Spans are the total time in **seconds** covered by the signal gates and by
    the exterior background region over the observation. Both are zero when
    nothing was observed.
    """

    n_signal_correct: int
    n_signal_wrong: int
    n_background_exterior: int
    exterior_span: float
    gate_span: float
    correct_channel: int = 0
    n_guard_band: int = 0
    """Events between the signal gate and the exterior region, dropped from both tallies."""
    background_by_channel: Tuple[int, int] = field(default=(0, 0))
    """Exterior background events per channel."""

    def __post_init__(self):
        for name in ("n_signal_correct", "n_signal_wrong", "n_background_exterior", "n_guard_band"):
            if getattr(self, name) < 0:
                raise InvalidArgumentException(f"{name} must be non-negative")
        if self.exterior_span < 0 or self.gate_span < 0:
            raise InvalidArgumentException("spans must be non-negative")
        if self.correct_channel not in (0, 1):
            raise InvalidArgumentException("correct_channel must be 0 or 1")

    @property
    def n_signal(self) -> Tuple[int, int]:
        """
        Signal counts indexed by channel.
        """
        if self.correct_channel == 0:
            return self.n_signal_correct, self.n_signal_wrong
        return self.n_signal_wrong, self.n_signal_correct

    @property
    def total(self) -> int:
        return (
            self.n_signal_correct
            + self.n_signal_wrong
            + self.n_background_exterior
            + self.n_guard_band
        )

    @property
    def background_rate(self) -> float:
        """
        Background rate in Hz over both channels, nan without exterior span.
        """
        if self.exterior_span <= 0:
            return math.nan
        return self.n_background_exterior / self.exterior_span

    @property
    def expected_background_in_gate(self) -> Optional[float]:
        """
        Expected background counts inside the signal gates of one channel.

        Background light is unpolarized, so the estimate is split evenly across the two channels.
        None without exterior span.
        """
        if self.exterior_span <= 0:
            return None
        return self.n_background_exterior * (self.gate_span / self.exterior_span) / 2.0


@dataclass(frozen=True, eq=False)
class ReceiveWindows:
    """
    Open receive windows of a session with the channel expected to see the signal in each.
    """

    starts: np.ndarray
    """Window openings in **seconds**, increasing."""
    ends: np.ndarray
    """Window closings in **seconds**."""
    correct_channels: np.ndarray
    """Channel that receives the prepared state during each window."""

    def __post_init__(self):
        starts = np.array(self.starts, dtype=float).reshape(-1)
        ends = np.array(self.ends, dtype=float).reshape(-1)
        channels = np.array(self.correct_channels).reshape(-1)
        if not len(starts) == len(ends) == len(channels):
            raise InvalidArgumentException("window columns have different lengths")
        if not (np.all(np.isfinite(starts)) and np.all(np.isfinite(ends))):
            raise InvalidArgumentException("window bounds must be finite")
        if np.any(ends <= starts):
            raise InvalidArgumentException("every window must end after it starts")
        if np.any(starts[1:] < ends[:-1]):
            raise InvalidArgumentException("windows must be ordered and non-overlapping")
        if len(channels) and not np.all((channels == 0) | (channels == 1)):
            raise InvalidArgumentException("correct_channel must be 0 or 1")
        channels = channels.astype(np.int8)
        for name, values in (("starts", starts), ("ends", ends), ("correct_channels", channels)):
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @classmethod
    def empty(cls) -> "ReceiveWindows":
        return cls(np.empty(0), np.empty(0), np.empty(0, dtype=np.int8))

    def __len__(self) -> int:
        return len(self.starts)

    @property
    def bounds(self) -> np.ndarray:
        return np.column_stack([self.starts, self.ends])

    @property
    def total_open_time(self) -> float:
        return float(np.sum(self.ends - self.starts))

    def _overlaps(self, start: float, end: float) -> np.ndarray:
        return np.clip(np.minimum(self.ends, end) - np.maximum(self.starts, start), 0.0, None)

    def open_time(self, start: float, end: float) -> float:
        """
        Open receive time in **seconds** within [start, end).
        """
        return float(np.sum(self._overlaps(start, end)))

    def majority_channel(self, start: float, end: float, default: int = 0) -> int:
        """
        Correct channel holding most of the open time within [start, end).
        """
        overlaps = self._overlaps(start, end)
        per_channel = [float(np.sum(overlaps[self.correct_channels == c])) for c in (0, 1)]
        if per_channel[0] == per_channel[1] == 0.0:
            return default
        return 0 if per_channel[0] >= per_channel[1] else 1


@dataclass(frozen=True)
class IntervalStats:
    """
    Gated tallies and estimates of one analysis interval.
    """

    index: int
    t_start: float
    """Interval start in **seconds**."""
    t_end: float
    counts: GatedCounts
    observed_time: float
    """Open receive time within the interval in **seconds**."""
    duty_cycle: float
    qualified: bool
    """Whether a channel's signal exceeds the background by the selection threshold."""
    background_rate_hz: float
    qber_raw: float
    qber_bg_subtracted: float
    """nan when no background estimate is available."""
    return_rate_hz: float
    """Background-subtracted signal rate while the receiver is open, corrected for the gate capture fraction."""

    @property
    def n_corr(self) -> int:
        return self.counts.n_signal_correct

    @property
    def n_wrong(self) -> int:
        return self.counts.n_signal_wrong

    @property
    def length(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class PassSummary:
    """
    Pass-level aggregates of the interval analysis.
    """

    n_intervals: int
    n_qualified: int
    n_corr: int
    """Correct-channel signal counts pooled over the selected intervals."""
    n_wrong: int
    qber: float
    """Bayesian QBER of the pooled counts."""
    return_rate_hz: float
    """Open-time weighted return rate over the selected intervals."""
    duty_cycle: float
    """Open receive time over the whole analyzed span."""
    selected_qualified: bool
    """False when no interval qualified and every interval was pooled instead."""
