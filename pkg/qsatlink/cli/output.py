import contextlib
import os
import tempfile
from pathlib import Path
from typing import Callable, Iterable, TextIO, Union

from qsatlink.exceptions import OutputExistsException


def check_outputs(paths: Iterable[Path], force: bool) -> None:
    """
    Refuse to run when an output would be overwritten without `--force`.

    Checked for every output before the first one is written.
    """
    existing = [str(p) for p in paths if p.exists()]
    if existing and not force:
        raise OutputExistsException(
            f"Refusing to overwrite {', '.join(existing)}; pass --force to replace"
        )


def write_atomic(path: Union[str, Path], write: Callable[[TextIO], None]) -> Path:
    """
    Write a text file through a temporary sibling renamed into place.

    Readers see either the previous file or the complete new one.

    :param path: Destination
    :param write: Callback receiving the open temporary file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            write(f)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise
    return path
