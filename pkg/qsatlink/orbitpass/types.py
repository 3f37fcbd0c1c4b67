import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from qsatlink.consts import SPEED_OF_LIGHT
from qsatlink.exceptions import InvalidArgumentException


@dataclass(frozen=True, eq=False)
class PassGeometry:
    """
    Time series of the station-satellite geometry over a pass.
    """

    times: np.ndarray
    """Sample times in s, strictly increasing."""
    slant_ranges: np.ndarray
    """Slant range in m at each sample."""
    elevations: np.ndarray
    """Elevation in radians at each sample."""
    radial_velocities: np.ndarray
    """Range rate in m/s at each sample, positive when receding."""
    name: str = field(default="pass")

    def __post_init__(self):
        arrays = {}
        for attr in ("times", "slant_ranges", "elevations", "radial_velocities"):
            a = np.array(getattr(self, attr), dtype=float).reshape(-1)
            a.setflags(write=False)
            arrays[attr] = a
            object.__setattr__(self, attr, a)

        n = len(arrays["times"])
        if n == 0:
            raise InvalidArgumentException("A pass needs at least one sample")
        if any(len(a) != n for a in arrays.values()):
            raise InvalidArgumentException("Pass sample arrays have different lengths")
        if not all(np.all(np.isfinite(a)) for a in arrays.values()):
            raise InvalidArgumentException("Pass samples must be finite")
        if np.any(np.diff(arrays["times"]) <= 0):
            raise InvalidArgumentException("Pass sample times must be strictly increasing")
        if np.any(arrays["slant_ranges"] <= 0):
            raise InvalidArgumentException("Slant range must be positive")
        el = arrays["elevations"]
        if np.any(el < 0) or np.any(el > math.pi / 2 + 1e-12):
            raise InvalidArgumentException("Elevation must lie in [0, pi/2]")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def round_trip_times(self) -> np.ndarray:
        return 2.0 * self.slant_ranges / SPEED_OF_LIGHT

    @cached_property
    def _range_spline(self) -> CubicHermiteSpline:
        if len(self.times) < 2:
            raise InvalidArgumentException("Interpolation needs at least two pass samples")
        # The sampled range rate pins the derivative at every knot.
        return CubicHermiteSpline(self.times, self.slant_ranges, self.radial_velocities)

    @cached_property
    def _elevation_spline(self) -> CubicSpline:
        if len(self.times) < 2:
            raise InvalidArgumentException("Interpolation needs at least two pass samples")
        return CubicSpline(self.times, self.elevations)

    def _check_time(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < self.start - 1e-9) or np.any(t > self.end + 1e-9):
            raise InvalidArgumentException(
                f"time outside the pass [{self.start}, {self.end}] s"
            )
        return t

    def range_at(self, t):
        """
        Slant range in m at time t, interpolated between samples.
        """
        return self._range_spline(self._check_time(t))

    def radial_velocity_at(self, t):
        """
        Range rate in m/s at time t, the derivative of the range interpolant.
        """
        return self._range_spline(self._check_time(t), 1)

    def elevation_at(self, t):
        """
        Elevation in radians at time t, clipped to [0, pi/2].
        """
        return np.clip(self._elevation_spline(self._check_time(t)), 0.0, math.pi / 2)

    def round_trip_time_at(self, t):
        return 2.0 * self.range_at(t) / SPEED_OF_LIGHT
