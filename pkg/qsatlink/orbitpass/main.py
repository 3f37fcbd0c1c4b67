import logging
import math
from typing import Optional

import numpy as np

from qsatlink.consts import EARTH_GM, EARTH_RADIUS, ELEVATION_FLOOR, SPEED_OF_LIGHT
from qsatlink.exceptions import InvalidArgumentException
from qsatlink.orbitpass.types import PassGeometry

logger = logging.getLogger(__name__)


def slant_range(altitude: float, elevation, earth_radius: float = EARTH_RADIUS):
    """
    Distance from the station to a satellite at the given altitude seen at the given elevation.

    sqrt((R_E + h)^2 - R_E^2 cos^2 el) - R_E sin el, on a spherical Earth.

    :param altitude: Orbit altitude in m
    :param elevation: Elevation in **radians**, scalar or array
    :param earth_radius: Earth radius in m

    :return: Slant range in m
    """
    if not (math.isfinite(altitude) and altitude > 0):
        raise InvalidArgumentException(f"altitude must be positive, got {altitude}")
    el = np.asarray(elevation, dtype=float)
    if np.any(~np.isfinite(el)) or np.any(el < 0) or np.any(el > math.pi / 2 + 1e-12):
        raise InvalidArgumentException("elevation must lie in [0, pi/2]")
    r = earth_radius + altitude
    d = np.sqrt(r**2 - (earth_radius * np.cos(el)) ** 2) - earth_radius * np.sin(el)
    return float(d) if d.ndim == 0 else d


def orbital_speed(altitude: float, earth_radius: float = EARTH_RADIUS) -> float:
    """
    Speed of a circular two-body orbit, sqrt(GM / (R_E + h)), in m/s.
    """
    if not (math.isfinite(altitude) and altitude > 0):
        raise InvalidArgumentException(f"altitude must be positive, got {altitude}")
    return math.sqrt(EARTH_GM / (earth_radius + altitude))


def round_trip_time(slant_range_m):
    """
    Two-way light time 2R/c in s.
    """
    r = np.asarray(slant_range_m, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise InvalidArgumentException("slant range must be positive")
    rtt = 2.0 * r / SPEED_OF_LIGHT
    return float(rtt) if rtt.ndim == 0 else rtt


def _central_angle(elevation: float, orbit_radius: float, earth_radius: float) -> float:
    # Earth central angle between the station and the sub-satellite point.
    return math.pi / 2 - elevation - math.asin(earth_radius * math.cos(elevation) / orbit_radius)


def circular_pass(
    altitude: float,
    max_elevation: float,
    sample_period: float,
    duration: Optional[float] = None,
    horizon: float = ELEVATION_FLOOR,
    earth_radius: float = EARTH_RADIUS,
    name: str = "circular",
) -> PassGeometry:
    """
    Symmetric pass of a circular orbit over a non-rotating spherical Earth.

    The station sits at a fixed cross-track angle from the orbital plane chosen so that
    the elevation peaks at max_elevation. Time 0 is the first sample; culmination falls
    on a sample in the middle of the pass.

    :param altitude: Orbit altitude in m
    :param max_elevation: Culmination elevation in **radians**, above the 5 degree floor
    :param sample_period: Spacing of the samples in s
    :param duration: Length of the pass in s centered on culmination, defaults to horizon to horizon
    :param horizon: Lowest elevation included when no duration is given
    :param earth_radius: Earth radius in m
    :param name: Label of the pass

    :return: Pass geometry with analytic range rate
    """
    if not (math.isfinite(max_elevation) and ELEVATION_FLOOR < max_elevation <= math.pi / 2):
        raise InvalidArgumentException(
            f"max_elevation must lie in (5 deg, 90 deg], got {math.degrees(max_elevation):.3f} deg"
        )
    if not (math.isfinite(sample_period) and sample_period > 0):
        raise InvalidArgumentException(f"sample_period must be positive, got {sample_period}")
    if duration is not None and not (math.isfinite(duration) and duration > 0):
        raise InvalidArgumentException(f"duration must be positive, got {duration}")
    if not 0 <= horizon < max_elevation:
        raise InvalidArgumentException("horizon must lie below the culmination elevation")

    orbit_radius = earth_radius + altitude
    omega = orbital_speed(altitude, earth_radius) / orbit_radius
    cross_track = max(_central_angle(max_elevation, orbit_radius, earth_radius), 0.0)

    horizon_angle = _central_angle(horizon, orbit_radius, earth_radius)
    cos_along = math.cos(horizon_angle) / math.cos(cross_track)
    half_span = math.acos(min(cos_along, 1.0)) / omega
    if duration is not None:
        half_span = min(half_span, duration / 2)

    n_half = int(math.floor(half_span / sample_period + 1e-9))
    if n_half < 1:
        raise InvalidArgumentException("pass shorter than two sample periods")
    k = np.arange(-n_half, n_half + 1)
    t_rel = k * sample_period
    along = omega * t_rel

    cos_gamma = math.cos(cross_track) * np.cos(along)
    d = np.sqrt(
        altitude**2 + 2 * orbit_radius * earth_radius * (1.0 - cos_gamma)
    )
    sin_el = (orbit_radius * cos_gamma - earth_radius) / d
    elevation = np.arcsin(np.clip(sin_el, 0.0, 1.0))
    radial_velocity = (
        orbit_radius * earth_radius * omega * math.cos(cross_track) * np.sin(along) / d
    )
    # Culmination sample is exact by construction.
    radial_velocity[n_half] = 0.0

    logger.debug(
        f"circular pass h={altitude / 1e3:.0f} km el_max={math.degrees(max_elevation):.1f} deg: "
        f"{len(k)} samples over {2 * n_half * sample_period:.1f} s"
    )
    return PassGeometry(
        times=t_rel + n_half * sample_period,
        slant_ranges=d,
        elevations=elevation,
        radial_velocities=radial_velocity,
        name=name,
    )
