import re
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from qsatlink.exceptions import ParseException

_LINE_PATTERN = re.compile(r"at line (\d+)")


def _error_line(e: "tomllib.TOMLDecodeError") -> Optional[int]:
    line = getattr(e, "lineno", None)
    if line is not None:
        return line
    # Older parsers only carry the position in the message.
    match = _LINE_PATTERN.search(str(e))
    return int(match.group(1)) if match else None


def load_toml(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a TOML file.

    :raises ParseException: If the file is not valid TOML, with the line reported by the parser
    """
    path = Path(path)
    with open(path, "rb") as f:
        try:
            return tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ParseException(f"{path}: {e}", path=str(path), line=_error_line(e)) from e
