import logging
from typing import Dict, Literal, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.style import Style
from rich.text import Text

"""Console message severity levels."""
LogEntryLevel = Literal["debug", "info", "warn", "error"]

"""
Colored labels for each level.
"""
levels: Dict[LogEntryLevel, tuple[str, Style]] = {
    "error": ("ERROR", Style(color="red")),
    "warn": ("WARN ", Style(color="#FF4400")),
    "info": ("INFO ", Style(color="#FF8800")),
    "debug": ("DEBUG", Style(color="bright_black")),
}

"""
Console for results, written to standard output.
"""
console = Console(highlight=False)

"""
Console for diagnostics, written to standard error.
"""
err_console = Console(stderr=True, highlight=False)


def configure_logging(debug: bool = False, console: Optional[Console] = None) -> None:
    """
    Route the package loggers to a rich handler on standard error.

    :param debug: Log per-slot detail, otherwise warnings and pass-level results only
    :param console: Console to log to, defaults to standard error
    """
    handler = RichHandler(
        console=console or err_console,
        show_path=debug,
        show_time=debug,
        markup=False,
    )
    root = logging.getLogger("qsatlink")
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if debug else logging.INFO)
    root.propagate = False


def format_message(level: LogEntryLevel, message: str) -> Text:
    label, style = levels[level]
    return Text.assemble((label, style), " ", message)


def print_error(message: str) -> None:
    err_console.print(format_message("error", message), soft_wrap=True)


def print_warning(message: str) -> None:
    err_console.print(format_message("warn", message), soft_wrap=True)
