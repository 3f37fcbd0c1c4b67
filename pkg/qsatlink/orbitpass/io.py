from pathlib import Path

import numpy as np
import pandas as pd

from qsatlink.exceptions import format_parse_error
from qsatlink.orbitpass.types import PassGeometry
from qsatlink.tabular import (
    PathOrStream,
    first_violation,
    read_numeric_table,
    source_name,
    write_report,
)

PASS_COLUMNS = ["time_s", "slant_range_m", "elevation_deg"]


def load_pass(source: PathOrStream) -> PassGeometry:
    """
    Load a pass from a CSV with header time_s,slant_range_m,elevation_deg.

    The range rate is derived from the slant range by central differences
    (one-sided at the ends).

    :param source: Path or text stream

    :raises ParseException: Naming the offending line for malformed rows, non-increasing
        times, non-positive ranges or elevations outside [0, 90] deg
    """
    name = source_name(source)
    table = read_numeric_table(source, PASS_COLUMNS)
    if table.empty:
        raise format_parse_error(name, 2, "pass file has no samples")

    times = table["time_s"].to_numpy()
    ranges = table["slant_range_m"].to_numpy()
    elevations_deg = table["elevation_deg"].to_numpy()

    row = first_violation(np.diff(times) <= 0) + 1
    if row > 0:
        raise format_parse_error(
            name, row + 2, f"time {times[row]} s does not increase over {times[row - 1]} s"
        )
    for column, bad in (
        ("slant_range_m", ranges <= 0),
        ("elevation_deg", (elevations_deg < 0) | (elevations_deg > 90)),
    ):
        row = first_violation(bad)
        if row >= 0:
            raise format_parse_error(
                name, row + 2, f"{column} out of range: {table[column].iloc[row]}"
            )

    if len(times) > 1:
        radial_velocities = np.gradient(ranges, times)
    else:
        radial_velocities = np.zeros_like(ranges)

    return PassGeometry(
        times=times,
        slant_ranges=ranges,
        elevations=np.radians(elevations_deg),
        radial_velocities=radial_velocities,
        name=Path(name).stem if isinstance(source, (str, Path)) else "pass",
    )


def pass_to_frame(geometry: PassGeometry) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "time_s": geometry.times,
            "slant_range_m": geometry.slant_ranges,
            "elevation_deg": np.degrees(geometry.elevations),
        },
        columns=PASS_COLUMNS,
    )


def save_pass(geometry: PassGeometry, target: PathOrStream) -> None:
    """
    Write a pass in the format read by `load_pass`, with 9 significant digits.
    """
    write_report(pass_to_frame(geometry), target)
