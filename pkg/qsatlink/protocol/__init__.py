"""
Monte-Carlo QKD sessions over a retroreflector pass and the two-way Faraday-rotator key exchange.
"""

from .io import report_to_frame, save_report, save_two_way, summary_rows, two_way_to_frame
from .sampling import (
    detecting_pulses,
    detecting_pulses_naive,
    route_photons,
    slot_rng,
    zero_truncated_poisson,
)
from .session import estimate_pass_mu_sat, plan_slots, simulate_pass
from .two_way import build_sifting_rule, two_way_session
from .types import (
    DEFAULT_ALPHABET,
    DEFAULT_GROUND_BASES,
    FeasibilityVerdict,
    IntervalRecord,
    SessionConfig,
    SessionReport,
    StateSegment,
    TwoWayResult,
    TwoWaySessionConfig,
)
from .verdict import feasibility_verdict

__all__ = [
    "DEFAULT_ALPHABET",
    "DEFAULT_GROUND_BASES",
    "FeasibilityVerdict",
    "IntervalRecord",
    "SessionConfig",
    "SessionReport",
    "StateSegment",
    "TwoWayResult",
    "TwoWaySessionConfig",
    "build_sifting_rule",
    "detecting_pulses",
    "detecting_pulses_naive",
    "estimate_pass_mu_sat",
    "feasibility_verdict",
    "plan_slots",
    "report_to_frame",
    "route_photons",
    "save_report",
    "save_two_way",
    "simulate_pass",
    "slot_rng",
    "summary_rows",
    "two_way_session",
    "two_way_to_frame",
    "zero_truncated_poisson",
]
