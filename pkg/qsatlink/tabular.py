from pathlib import Path
from typing import IO, Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from qsatlink.consts import CSV_SIGNIFICANT_DIGITS
from qsatlink.exceptions import ParseException, format_parse_error

PathOrStream = Union[str, Path, IO[str]]

"""
printf-style format of floating values in report tables.
"""
REPORT_FLOAT_FORMAT = f"%.{CSV_SIGNIFICANT_DIGITS}g"


def source_name(source: PathOrStream) -> str:
    if isinstance(source, (str, Path)):
        return str(source)
    return getattr(source, "name", "<stream>")


def _parse_column(name: str, column: str, cells: pd.Series, first_line: int) -> np.ndarray:
    stripped = cells.str.strip()
    try:
        # float() is correctly rounded, so repr-formatted values come back bit-identical.
        values = stripped.astype(float).to_numpy()
    except ValueError:
        values = pd.to_numeric(stripped, errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.argmax(bad))
        raise format_parse_error(
            name, row + first_line, f"{column} is not a finite number: '{cells.iloc[row]}'"
        )
    return values


def read_numeric_table(
    source: PathOrStream,
    columns: Sequence[str],
    header: bool = True,
    allow_empty: bool = False,
) -> pd.DataFrame:
    """
    Read a CSV whose listed columns must all hold finite numbers.

    Line numbers in errors are 1-based; with a header the header is line 1.

    :param source: Path or text stream
    :param columns: Required columns, or the column names of a headerless file
    :param header: Whether the first line is a header
    :param allow_empty: Whether a zero-byte file reads as an empty table

    :raises ParseException: On a missing column or the first non-numeric cell
    """
    name = source_name(source)
    try:
        raw = pd.read_csv(
            source,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            header=0 if header else None,
            names=None if header else list(columns),
        )
    except pd.errors.EmptyDataError:
        if allow_empty or not header:
            return pd.DataFrame({c: np.empty(0) for c in columns})
        raise ParseException(
            f"{name}: empty file, expected header {','.join(columns)}", path=name, line=1
        )
    except pd.errors.ParserError as e:
        raise ParseException(f"{name}: {e}", path=name) from e

    missing = [c for c in columns if c not in raw.columns]
    if missing:
        raise format_parse_error(name, 1, f"missing column(s) {', '.join(missing)}")

    first_line = 2 if header else 1
    return pd.DataFrame(
        {c: _parse_column(name, c, raw[c], first_line) for c in columns},
        index=raw.index,
    )


def first_violation(mask: np.ndarray) -> int:
    """
    Index of the first True entry, -1 if none.
    """
    return int(np.argmax(mask)) if mask.any() else -1


def exact_text(values: Iterable[float]) -> List[str]:
    """
    Shortest text that parses back to the same double, used for time stamps.
    """
    return [repr(float(v)) for v in values]


def write_report(frame: pd.DataFrame, target: PathOrStream) -> None:
    frame.to_csv(target, index=False, float_format=REPORT_FLOAT_FORMAT, lineterminator="\n")


def write_exact(frame: pd.DataFrame, target: PathOrStream) -> None:
    """
    Write a table whose float columns must survive a read back bit-identically.
    """
    out = frame.copy()
    for column in out.columns:
        if pd.api.types.is_float_dtype(out[column]):
            out[column] = exact_text(out[column])
    out.to_csv(target, index=False, lineterminator="\n")
