import numpy as np
import pandas as pd

from qsatlink.consts import TAGGER_RESOLUTION
from qsatlink.exceptions import format_parse_error
from qsatlink.tabular import (
    PathOrStream,
    exact_text,
    first_violation,
    read_numeric_table,
    source_name,
    write_exact,
)
from qsatlink.timing.types import ReceiveWindows, TimeTagStream

TIMETAG_COLUMNS = ["time_s", "channel"]
WINDOW_COLUMNS = ["start_s", "end_s", "correct_channel"]


def _check_channels(name: str, values: np.ndarray, column: str, first_line: int) -> np.ndarray:
    row = first_violation((values != 0) & (values != 1))
    if row >= 0:
        raise format_parse_error(
            name, row + first_line, f"{column} must be 0 or 1, got {values[row]:g}"
        )
    return values.astype(np.int8)


def load_timetags(source: PathOrStream, resolution: float = TAGGER_RESOLUTION) -> TimeTagStream:
    """
    Load detector events from a CSV with header time_s,channel.

    A header-only or zero-byte file is an empty stream.

    :raises ParseException: Naming the offending line for malformed rows, channels other
        than 0 and 1, or decreasing times
    """
    name = source_name(source)
    table = read_numeric_table(source, TIMETAG_COLUMNS, allow_empty=True)
    times = table["time_s"].to_numpy()
    channels = _check_channels(name, table["channel"].to_numpy(), "channel", 2)
    row = first_violation(np.diff(times) < 0) + 1
    if row > 0:
        raise format_parse_error(
            name, row + 2, f"time {times[row]!r} s precedes {times[row - 1]!r} s"
        )
    return TimeTagStream(times, channels, resolution)


def save_timetags(stream: TimeTagStream, target: PathOrStream) -> None:
    """
    Write detector events; times are written in full precision.
    """
    write_exact(
        pd.DataFrame({"time_s": stream.times, "channel": stream.channels.astype(int)}),
        target,
    )


def load_epochs(source: PathOrStream) -> np.ndarray:
    """
    Load SLR detection epochs, one time in seconds per line.

    Strict monotonicity and the two-epoch minimum are left to `expected_arrivals`,
    except that a decreasing or repeated epoch is reported with its line.
    """
    name = source_name(source)
    table = read_numeric_table(source, ["epoch_s"], header=False)
    epochs = table["epoch_s"].to_numpy()
    row = first_violation(np.diff(epochs) <= 0) + 1
    if row > 0:
        raise format_parse_error(
            name, row + 1, f"epoch {epochs[row]!r} s does not increase over {epochs[row - 1]!r} s"
        )
    return epochs


def save_epochs(epochs, target: PathOrStream) -> None:
    lines = "".join(f"{text}\n" for text in exact_text(np.asarray(epochs, dtype=float)))
    if hasattr(target, "write"):
        target.write(lines)
    else:
        with open(target, "w", encoding="utf-8") as f:
            f.write(lines)


def load_windows(source: PathOrStream) -> ReceiveWindows:
    """
    Load receive windows from a CSV with header start_s,end_s,correct_channel.

    :raises ParseException: Naming the offending line for malformed rows, empty windows
        or windows out of order
    """
    name = source_name(source)
    table = read_numeric_table(source, WINDOW_COLUMNS)
    starts = table["start_s"].to_numpy()
    ends = table["end_s"].to_numpy()
    channels = _check_channels(name, table["correct_channel"].to_numpy(), "correct_channel", 2)

    row = first_violation(ends <= starts)
    if row >= 0:
        raise format_parse_error(name, row + 2, "end_s must be after start_s")
    row = first_violation(starts[1:] < ends[:-1]) + 1
    if row > 0:
        raise format_parse_error(name, row + 2, "window overlaps or precedes the previous one")
    return ReceiveWindows(starts, ends, channels)


def save_windows(windows: ReceiveWindows, target: PathOrStream) -> None:
    write_exact(
        pd.DataFrame(
            {
                "start_s": windows.starts,
                "end_s": windows.ends,
                "correct_channel": windows.correct_channels.astype(int),
            }
        ),
        target,
    )
