"""
Jones calculus for the Coude path, corner-cube retroreflectors and Faraday rotators.
"""

from .main import (
    A,
    D,
    H,
    L,
    NAMED_BASES,
    NAMED_STATES,
    R,
    V,
    ccr_transform,
    check_analyzer_basis,
    correct_channel,
    coude_downlink,
    coude_uplink,
    detection_probability,
    expected_received_state,
    mirror_flip,
    parse_basis,
    parse_state,
    rotation,
    round_trip,
)
from .types import AnalyzerBasis, PolarizationOperator, PolarizationState, TelescopePose

__all__ = [
    "A",
    "D",
    "H",
    "L",
    "R",
    "V",
    "NAMED_BASES",
    "NAMED_STATES",
    "AnalyzerBasis",
    "PolarizationOperator",
    "PolarizationState",
    "TelescopePose",
    "ccr_transform",
    "check_analyzer_basis",
    "correct_channel",
    "coude_downlink",
    "coude_uplink",
    "detection_probability",
    "expected_received_state",
    "mirror_flip",
    "parse_basis",
    "parse_state",
    "rotation",
    "round_trip",
]
