import io
import math

import numpy as np
import pytest

from qsatlink.consts import EARTH_RADIUS, SPEED_OF_LIGHT
from qsatlink.exceptions import InvalidArgumentException, ParseException
from qsatlink.orbitpass import (
    circular_pass,
    load_pass,
    orbital_speed,
    round_trip_time,
    save_pass,
    slant_range,
)

LARETS_ALTITUDE = 691e3


def test_slant_range_at_zenith_is_the_altitude():
    assert slant_range(LARETS_ALTITUDE, math.pi / 2) == pytest.approx(LARETS_ALTITUDE)


def test_slant_range_satisfies_law_of_cosines():
    elevation = math.radians(30.0)
    d = slant_range(LARETS_ALTITUDE, elevation)
    orbit_radius = EARTH_RADIUS + LARETS_ALTITUDE
    # station at the origin of the local vertical: (R_E + d sin el)^2 + (d cos el)^2 = r^2
    lhs = (EARTH_RADIUS + d * math.sin(elevation)) ** 2 + (d * math.cos(elevation)) ** 2
    assert lhs == pytest.approx(orbit_radius**2, rel=1e-12)
    assert d == pytest.approx(1222.4e3, rel=1e-3)


def test_round_trip_time_of_larets_at_30_degrees():
    rtt = round_trip_time(slant_range(LARETS_ALTITUDE, math.radians(30.0)))
    assert rtt == pytest.approx(8.155e-3, rel=1e-3)


def test_round_trip_time_over_leo_altitudes():
    elevations = np.radians(np.linspace(5.0, 90.0, 50))
    for altitude in (400e3, 691e3, 1490e3, 2000e3):
        rtt = round_trip_time(slant_range(altitude, elevations))
        assert np.all(rtt >= 2 * altitude / SPEED_OF_LIGHT * (1 - 1e-12))
        assert np.all(rtt < 35e-3)


def test_orbital_speed():
    assert orbital_speed(LARETS_ALTITUDE) == pytest.approx(7513.0, rel=1e-3)


def test_slant_range_rejects_negative_elevation():
    with pytest.raises(InvalidArgumentException):
        slant_range(LARETS_ALTITUDE, -0.1)


def test_circular_pass_culminates_at_minimum_range():
    geometry = circular_pass(LARETS_ALTITUDE, math.radians(30.0), sample_period=1.0)
    peak = int(np.argmax(geometry.elevations))

    assert int(np.argmin(geometry.slant_ranges)) == peak
    assert geometry.elevations[peak] == pytest.approx(math.radians(30.0), abs=1e-9)
    assert geometry.slant_ranges[peak] == pytest.approx(
        slant_range(LARETS_ALTITUDE, math.radians(30.0)), rel=1e-9
    )
    assert geometry.radial_velocities[peak] == 0.0
    assert np.all(geometry.radial_velocities[:peak] < 0)
    assert np.all(geometry.radial_velocities[peak + 1 :] > 0)
    assert np.all(geometry.elevations >= math.radians(5.0) - 1e-9)


def test_circular_pass_with_duration():
    geometry = circular_pass(LARETS_ALTITUDE, math.radians(30.0), sample_period=1.0, duration=40.0)
    assert len(geometry) == 41
    assert geometry.start == 0.0
    assert geometry.duration == pytest.approx(40.0)
    np.testing.assert_allclose(geometry.slant_ranges, geometry.slant_ranges[::-1], rtol=1e-12)


def test_circular_pass_rejects_elevation_below_floor():
    with pytest.raises(InvalidArgumentException):
        circular_pass(LARETS_ALTITUDE, math.radians(4.0), sample_period=1.0)


def test_range_rate_follows_the_range_interpolant():
    geometry = circular_pass(LARETS_ALTITUDE, math.radians(45.0), sample_period=1.0, duration=60.0)
    t = 17.25
    h = 1e-3
    numeric = (geometry.range_at(t + h) - geometry.range_at(t - h)) / (2 * h)
    assert float(geometry.radial_velocity_at(t)) == pytest.approx(float(numeric), rel=1e-6)
    np.testing.assert_allclose(
        geometry.radial_velocity_at(geometry.times), geometry.radial_velocities, atol=1e-9
    )


def test_interpolation_outside_the_pass_is_rejected():
    geometry = circular_pass(LARETS_ALTITUDE, math.radians(30.0), sample_period=1.0, duration=10.0)
    with pytest.raises(InvalidArgumentException):
        geometry.range_at(geometry.end + 1.0)


def test_load_pass_reads_every_row():
    text = "time_s,slant_range_m,elevation_deg\n0,1500000,20\n1,1490000,20.5\n2,1480000,21\n"
    geometry = load_pass(io.StringIO(text))
    assert len(geometry) == 3
    assert geometry.elevations[2] == pytest.approx(math.radians(21.0))


def test_load_pass_linear_range_has_constant_range_rate():
    text = "time_s,slant_range_m,elevation_deg\n" + "".join(
        f"{t},{1.5e6 - 6000 * t},{20 + t}\n" for t in range(5)
    )
    geometry = load_pass(io.StringIO(text))
    np.testing.assert_allclose(geometry.radial_velocities, -6000.0)


def test_load_pass_reports_decreasing_time_line():
    text = "time_s,slant_range_m,elevation_deg\n0,1500000,20\n2,1490000,21\n1,1480000,22\n"
    with pytest.raises(ParseException) as e:
        load_pass(io.StringIO(text))
    assert e.value.line == 4


def test_load_pass_reports_malformed_cell_line():
    text = "time_s,slant_range_m,elevation_deg\n0,1500000,20\n1,far,21\n"
    with pytest.raises(ParseException) as e:
        load_pass(io.StringIO(text))
    assert e.value.line == 3


def test_load_pass_rejects_elevation_above_zenith():
    text = "time_s,slant_range_m,elevation_deg\n0,1500000,91\n"
    with pytest.raises(ParseException):
        load_pass(io.StringIO(text))


def test_save_then_load_keeps_the_text(tmp_path):
    geometry = circular_pass(LARETS_ALTITUDE, math.radians(30.0), sample_period=0.5, duration=20.0)
    first = tmp_path / "pass.csv"
    second = tmp_path / "again.csv"
    save_pass(geometry, first)
    save_pass(load_pass(first), second)
    assert first.read_text() == second.read_text()
    assert load_pass(second).name == "again"
