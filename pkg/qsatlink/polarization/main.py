import math
from typing import Dict

import numpy as np

from qsatlink.consts import NUMERIC_TOLERANCE
from qsatlink.exceptions import InvalidArgumentException
from qsatlink.polarization.types import (
    AnalyzerBasis,
    PolarizationOperator,
    PolarizationState,
    TelescopePose,
)

_SQRT_HALF = math.sqrt(0.5)

H = PolarizationState(1.0, 0.0)
"""Horizontal polarization."""
V = PolarizationState(0.0, 1.0)
"""Vertical polarization."""
L = PolarizationState(_SQRT_HALF, 1j * _SQRT_HALF)
"""Left circular polarization, (|H> + i|V>)/sqrt2."""
R = PolarizationState(_SQRT_HALF, -1j * _SQRT_HALF)
"""Right circular polarization, (|H> - i|V>)/sqrt2."""
D = PolarizationState(_SQRT_HALF, _SQRT_HALF)
"""Diagonal polarization, (|H> + |V>)/sqrt2."""
A = PolarizationState(_SQRT_HALF, -_SQRT_HALF)
"""Anti-diagonal polarization, (|H> - |V>)/sqrt2."""

NAMED_STATES: Dict[str, PolarizationState] = {
    "H": H,
    "V": V,
    "L": L,
    "R": R,
    "D": D,
    "A": A,
}

NAMED_BASES: Dict[str, AnalyzerBasis] = {
    "HV": (H, V),
    "LR": (L, R),
    "DA": (D, A),
}


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise InvalidArgumentException(f"{name} must be finite, got {value}")


def rotation(theta: float) -> PolarizationOperator:
    """
    Rotation of the reference frame, R(theta) = exp(-i theta sigma_y).

    :param theta: Rotation angle in **radians**

    :return: [[cos theta, sin theta], [-sin theta, cos theta]]
    """
    _check_finite("theta", theta)
    c, s = math.cos(theta), math.sin(theta)
    return PolarizationOperator(np.array([[c, s], [-s, c]], dtype=complex))


def mirror_flip() -> PolarizationOperator:
    """
    Pi phase shift between s and p polarization of an ideally coated mirror (sigma_z).
    """
    return PolarizationOperator(np.diag([1.0, -1.0]).astype(complex))


def coude_uplink(pose: TelescopePose) -> PolarizationOperator:
    """
    Transformation of the Coude path from the optical table to the sky.

    U_up = sigma_z R(pi/2 - el) sigma_z R(az) sigma_z R(pi/2), rightmost factor applied first.

    :param pose: Telescope pointing

    :return: Uplink Jones matrix
    """
    sz = mirror_flip()
    return (
        sz
        @ rotation(math.pi / 2 - pose.elevation)
        @ sz
        @ rotation(pose.azimuth)
        @ sz
        @ rotation(math.pi / 2)
    )


def coude_downlink(pose: TelescopePose) -> PolarizationOperator:
    """
    Transformation of the Coude path from the sky back to the optical table.

    U_down = R(pi/2) sigma_z R(az) sigma_z R(pi/2 - el) sigma_z.
    """
    sz = mirror_flip()
    return (
        rotation(math.pi / 2)
        @ sz
        @ rotation(pose.azimuth)
        @ sz
        @ rotation(math.pi / 2 - pose.elevation)
        @ sz
    )


def ccr_transform(fr_angle: float) -> PolarizationOperator:
    """
    Corner-cube retroreflector with a Faraday rotator on its entrance face.

    U_CCR(phi) = R(-phi) sigma_z R(phi); phi = 0 is a plain metallic CCR.

    :param fr_angle: Faraday rotation angle phi in **radians**
    """
    _check_finite("fr_angle", fr_angle)
    return rotation(-fr_angle) @ mirror_flip() @ rotation(fr_angle)


def round_trip(
    pose: TelescopePose, fr_angle: float, psi: PolarizationState
) -> PolarizationState:
    """
    State received on the optical table after uplink, retroreflection and downlink.

    The result equals R(2 phi) sigma_z psi up to a global phase for every pose.

    :param pose: Telescope pointing
    :param fr_angle: Faraday rotation angle phi in **radians**
    :param psi: State injected in the Coude path

    :return: Received state
    """
    chain = coude_downlink(pose) @ ccr_transform(fr_angle) @ coude_uplink(pose)
    return chain @ psi


def expected_received_state(fr_angle: float, psi: PolarizationState) -> PolarizationState:
    """
    Pose-free prediction R(2 phi) sigma_z psi of the received state.
    """
    return (rotation(2 * fr_angle) @ mirror_flip()) @ psi


def detection_probability(
    psi: PolarizationState, analyzer_state: PolarizationState
) -> float:
    """
    Born probability |<analyzer|psi>|^2 of a click behind the analyzer port.

    :raises InvalidArgumentException: If either state is not normalized
    """
    for name, state in (("psi", psi), ("analyzer_state", analyzer_state)):
        if not isinstance(state, PolarizationState):
            raise InvalidArgumentException(f"{name} must be a PolarizationState")
        norm = float(np.vdot(state.vector, state.vector).real)
        if abs(norm - 1.0) > NUMERIC_TOLERANCE:
            raise InvalidArgumentException(f"{name} is not normalized (norm^2 = {norm})")
    p = abs(analyzer_state.overlap(psi)) ** 2
    return min(max(p, 0.0), 1.0)


def check_analyzer_basis(basis: AnalyzerBasis) -> AnalyzerBasis:
    """
    Validate that the two analyzer states are orthonormal.
    """
    a, b = basis
    if abs(a.overlap(b)) > 1e-9:
        raise InvalidArgumentException(f"Analyzer states {a} and {b} are not orthogonal")
    return basis


def correct_channel(received: PolarizationState, basis: AnalyzerBasis) -> int:
    """
    Detector channel with the larger Born probability for the ideal received state.

    Ties resolve to channel 0.
    """
    p0 = detection_probability(received, basis[0])
    p1 = detection_probability(received, basis[1])
    return 0 if p0 >= p1 else 1


def parse_state(text: str) -> PolarizationState:
    """
    Parse a state label (H, V, L, R, D, A) or a comma separated amplitude pair like "0.6,0.8i".

    Amplitude pairs must already be normalized.

    :raises InvalidArgumentException: If the text is malformed or not normalized
    """
    label = text.strip()
    if label.upper() in NAMED_STATES:
        return NAMED_STATES[label.upper()]
    parts = [p.strip() for p in label.split(",")]
    if len(parts) != 2:
        raise InvalidArgumentException(
            f"State '{text}' is neither a label ({', '.join(NAMED_STATES)}) nor an amplitude pair"
        )
    try:
        amplitudes = [complex(p.replace("i", "j").replace(" ", "")) for p in parts]
    except ValueError as e:
        raise InvalidArgumentException(f"Malformed amplitude in state '{text}': {e}")
    return PolarizationState.from_vector(amplitudes)


def parse_basis(text: str) -> AnalyzerBasis:
    """
    Parse an analyzer basis label (HV, LR, DA).
    """
    key = text.strip().upper()
    if key not in NAMED_BASES:
        raise InvalidArgumentException(
            f"Unknown analyzer basis '{text}', expected one of {', '.join(NAMED_BASES)}"
        )
    return NAMED_BASES[key]
