"""
Command-line front end: `qsatlink simulate|analyze|linkbudget|polcheck|pass-gen`.
"""

from .main import build_parser, main, run

__all__ = ["build_parser", "main", "run"]
