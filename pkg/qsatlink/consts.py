import math

"""
Planck constant in J*s (exact SI).
"""
PLANCK = 6.62607015e-34

"""
Speed of light in vacuum in m/s (exact SI).
"""
SPEED_OF_LIGHT = 299792458.0

"""
Mean Earth radius in meters, spherical non-rotating Earth model.
"""
EARTH_RADIUS = 6371.0e3

"""
Standard gravitational parameter of the Earth in m^3/s^2.
"""
EARTH_GM = 3.986004418e14

"""
Lowest elevation for which the plane-parallel air-mass model is used.
"""
ELEVATION_FLOOR = math.radians(5.0)

"""
Tolerance for unitarity, normalization and phase-insensitive equality checks.
"""
NUMERIC_TOLERANCE = 1e-12

"""
Default qubit comb repetition rate in Hz.
"""
PULSE_RATE = 1e8

"""
Default SLR repetition period in seconds (one slot between two SLR pulses).
"""
SLOT_PERIOD = 0.1

"""
Number of equidistant subintervals between two consecutive SLR epochs.
"""
SUBDIVISIONS = 10_000_000

"""
Time tagger resolution in seconds.
"""
TAGGER_RESOLUTION = 81e-12

"""
Detector time jitter in seconds, used as the detection accuracy sigma.
"""
DETECTOR_JITTER = 0.5e-9

"""
QBER below which a BB84 secret key can be established.
"""
QBER_THRESHOLD = 0.11

"""
Largest mean photon number per pulse compatible with decoy-state BB84 in practice.
"""
MU_THRESHOLD = 2.0

"""
Number of significant digits used for floating values in report CSVs.
"""
CSV_SIGNIFICANT_DIGITS = 9
