import math
from typing import Optional, Tuple

from qsatlink.exceptions import InvalidArgumentException, OutOfModelException
from qsatlink.timing.types import SlotSchedule, Window


def effective_rx_window(rtt: float, schedule: SlotSchedule) -> Tuple[float, float]:
    """
    Open receive time of one slot and the resulting duty cycle.

    Returning light overlaps the receive window for at most the round trip time
    (and never longer than the transmit window); the shutter delays are then
    subtracted and the result clamped to the receive window.

    :param rtt: Round trip time in **seconds**
    :param schedule: Slot timing

    :return: Open time in **seconds** and open time / slot period

    :raises OutOfModelException: If rtt is outside (0, slot_period)
    """
    if not math.isfinite(rtt):
        raise InvalidArgumentException(f"rtt must be finite, got {rtt}")
    if not 0 < rtt < schedule.slot_period:
        raise OutOfModelException(
            f"round trip time {rtt * 1e3:.3f} ms outside the slot (0, {schedule.slot_period * 1e3:g} ms)"
        )
    # Duty stays within 0.155 up to a 20 ms round trip, about 3000 km of slant range.
    duration = min(rtt, schedule.tx_length) - schedule.shutter_overhead
    duration = min(max(duration, 0.0), schedule.rx_length)
    return duration, duration / schedule.slot_period


def slot_rx_window(
    slot_start: float, rtt: float, schedule: SlotSchedule
) -> Optional[Window]:
    """
    Absolute (start, end) of the open receive window of the slot starting at slot_start.

    The window opens once the receiver shutter has finished opening.
    None when the open time is zero.
    """
    duration, _ = effective_rx_window(rtt, schedule)
    if duration <= 0:
        return None
    start = slot_start + schedule.rx_window[0] + schedule.shutter_open_delay
    end = min(start + duration, slot_start + schedule.rx_window[1])
    if end <= start:
        return None
    return start, end


PULSE_COUNT_TOLERANCE = 1e-6
"""Largest distance in pulses from a whole pulse count accepted as rounding noise."""


def pulses_per_slot(pulse_rate: float, slot_period: float) -> int:
    """
    Number of qubit pulses in one slot.

    :raises InvalidArgumentException: If the slot does not hold a whole number of pulses
    """
    steps = pulse_rate * slot_period
    if not (math.isfinite(steps) and steps >= 1):
        raise InvalidArgumentException(f"a slot must hold at least one pulse, got {steps}")
    whole = round(steps)
    if abs(steps - whole) > PULSE_COUNT_TOLERANCE:
        raise InvalidArgumentException(
            f"pulse rate {pulse_rate:g} Hz gives {steps!r} pulses per {slot_period:g} s slot, "
            "not a whole number"
        )
    return int(whole)
