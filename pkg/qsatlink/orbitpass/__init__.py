"""
Pass geometry of a LEO satellite over the ground station.
"""

from .io import PASS_COLUMNS, load_pass, pass_to_frame, save_pass
from .main import circular_pass, orbital_speed, round_trip_time, slant_range
from .types import PassGeometry

__all__ = [
    "PASS_COLUMNS",
    "PassGeometry",
    "circular_pass",
    "load_pass",
    "orbital_speed",
    "pass_to_frame",
    "round_trip_time",
    "save_pass",
    "slant_range",
]
