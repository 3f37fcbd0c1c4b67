import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from qsatlink.consts import (
    DETECTOR_JITTER,
    MU_THRESHOLD,
    NUMERIC_TOLERANCE,
    PULSE_RATE,
    QBER_THRESHOLD,
    TAGGER_RESOLUTION,
)
from qsatlink.exceptions import InvalidArgumentException
from qsatlink.linkbudget import LinkBudgetParams, SatelliteSpec
from qsatlink.orbitpass import PassGeometry
from qsatlink.polarization import (
    A,
    D,
    H,
    V,
    AnalyzerBasis,
    PolarizationState,
    TelescopePose,
    check_analyzer_basis,
)
from qsatlink.timing import (
    GateConfig,
    IntervalStats,
    PassSummary,
    ReceiveWindows,
    SlotSchedule,
    pulses_per_slot,
)
from qsatlink.timing.analysis import DEFAULT_INTERVAL, DEFAULT_SELECTION_SIGMA

"""Source model of the detected photon number per pulse."""
ChannelModel = Literal["downlink", "radar"]

CHANNEL_MODELS: Tuple[str, ...] = ("downlink", "radar")


@dataclass(frozen=True)
class StateSegment:
    """
    Stretch of the pass during which one state is prepared.
    """

    duration: float
    """Length of the segment in **seconds**."""
    prepared_state: PolarizationState
    analyzer_basis: Optional[AnalyzerBasis] = None
    """Receiver basis during the segment, defaults to the session's analyzer basis."""
    label: Optional[str] = None

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise InvalidArgumentException(
                f"segment duration must be positive, got {self.duration}"
            )
        if self.analyzer_basis is not None:
            check_analyzer_basis(self.analyzer_basis)

    @property
    def name(self) -> str:
        return self.label if self.label is not None else str(self.prepared_state)


@dataclass
class SessionConfig:
    """
    Everything needed to simulate one pass.

    `link` is the link-budget template; its geometry fields are replaced slot by
    slot and its satellite fields by `satellite`.
    """

    satellite: SatelliteSpec
    pass_geometry: PassGeometry
    link: LinkBudgetParams
    state_schedule: List[StateSegment]
    schedule: SlotSchedule = field(default_factory=SlotSchedule)
    gate: GateConfig = field(default_factory=GateConfig)
    analyzer_basis: AnalyzerBasis = (H, V)
    background_rate: float = 0.0
    """Background detection rate in Hz summed over both detectors while the receiver is open."""
    rng_seed: int = 0
    mu_sat: Optional[float] = None
    """Mean photons per pulse leaving the satellite, required by the downlink channel model."""
    channel_model: ChannelModel = "downlink"
    pulse_rate: float = PULSE_RATE
    """Qubit repetition rate in Hz."""
    station_azimuth: float = 0.0
    """Telescope azimuth in **radians**, held for the whole pass."""
    fr_angle: float = 0.0
    """Faraday rotation angle of the satellite in **radians**, 0 for plain CCRs."""
    detector_jitter: float = DETECTOR_JITTER
    """Standard deviation of the detection time in **seconds**."""
    tagger_resolution: float = TAGGER_RESOLUTION
    interval: float = DEFAULT_INTERVAL
    """Analysis interval length in **seconds**."""
    n_sigma: float = DEFAULT_SELECTION_SIGMA
    workers: int = 1
    """Threads simulating slots; results do not depend on it."""
    histogram_bin_width: float = 1e-10

    def __post_init__(self):
        if not self.state_schedule:
            raise InvalidArgumentException("state_schedule must hold at least one segment")
        if self.session_duration > self.pass_geometry.duration + 1e-9:
            raise InvalidArgumentException(
                f"state schedule lasts {self.session_duration:g} s, longer than the "
                f"{self.pass_geometry.duration:g} s pass"
            )
        if len(self.pass_geometry) < 2:
            raise InvalidArgumentException("the pass needs at least two samples")
        check_analyzer_basis(self.analyzer_basis)
        if not (math.isfinite(self.background_rate) and self.background_rate >= 0):
            raise InvalidArgumentException(
                f"background_rate must be non-negative, got {self.background_rate}"
            )
        if int(self.rng_seed) != self.rng_seed or self.rng_seed < 0:
            raise InvalidArgumentException(
                f"rng_seed must be a non-negative integer, got {self.rng_seed}"
            )
        if self.channel_model not in CHANNEL_MODELS:
            raise InvalidArgumentException(
                f"channel_model must be one of {', '.join(CHANNEL_MODELS)}, got {self.channel_model}"
            )
        if self.channel_model == "downlink" and not (
            self.mu_sat is not None and math.isfinite(self.mu_sat) and self.mu_sat > 0
        ):
            raise InvalidArgumentException("the downlink channel model needs a positive mu_sat")
        if not (math.isfinite(self.pulse_rate) and self.pulse_rate > 0):
            raise InvalidArgumentException(f"pulse_rate must be positive, got {self.pulse_rate}")
        pulses_per_slot(self.pulse_rate, self.schedule.slot_period)
        for name in ("station_azimuth", "fr_angle"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentException(f"{name} must be finite")
        for name in ("detector_jitter", "tagger_resolution", "interval", "histogram_bin_width"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentException(f"{name} must be positive, got {value}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidArgumentException(f"workers must be a positive integer, got {self.workers}")

    @property
    def session_duration(self) -> float:
        return sum(segment.duration for segment in self.state_schedule)

    @property
    def subdivisions(self) -> int:
        """
        Qubit pulses per SLR slot.
        """
        return pulses_per_slot(self.pulse_rate, self.schedule.slot_period)

    @property
    def link_params(self) -> LinkBudgetParams:
        return self.link.with_satellite(self.satellite)

    def segment_at(self, elapsed: float) -> StateSegment:
        """
        Segment active `elapsed` seconds after the start of the session.
        """
        bounds = np.cumsum([s.duration for s in self.state_schedule])
        index = int(np.searchsorted(bounds, elapsed + NUMERIC_TOLERANCE, side="right"))
        return self.state_schedule[min(index, len(self.state_schedule) - 1)]


@dataclass(frozen=True)
class FeasibilityVerdict:
    """
    Whether a pass meets the requirements of a decoy-state BB84 key exchange.
    """

    qber: float
    mu_sat: float
    qber_ok: bool
    """QBER strictly below the threshold."""
    mu_ok: bool
    """Mean photon number at most the threshold."""
    overall: bool
    qber_threshold: float = QBER_THRESHOLD
    mu_threshold: float = MU_THRESHOLD


@dataclass(frozen=True)
class IntervalRecord:
    """
    Analysis interval with the pass geometry it was observed at.
    """

    stats: IntervalStats
    mean_slant_range: float
    """Mean slant range in m over the open receive windows."""
    mean_elevation: float
    """Mean elevation in **radians**."""
    airmass: float
    """nan below the air-mass floor."""
    mu_sat_estimate: float
    """nan when the geometry is outside the link model."""


@dataclass(frozen=True, eq=False)
class SessionReport:
    """
    Per-interval analysis of a simulated pass and its pass-level aggregates.
    """

    intervals: List[IntervalRecord]
    summary: PassSummary
    mu_sat_estimate: float
    """Mean estimate over the qualified intervals, nan when none qualified."""
    verdict: FeasibilityVerdict
    epochs: np.ndarray
    """SLR detection epochs in **seconds**."""
    windows: ReceiveWindows
    pulse_rate: float
    satellite: str
    seed: int
    channel_model: str
    mu_sat_upper_bound: bool
    """True when the CCR reflectivity is taken as 1, so mu_sat is an upper bound."""
    n_signal_tags: int = 0
    n_background_tags: int = 0

    @property
    def qber(self) -> float:
        return self.summary.qber

    @property
    def return_rate_hz(self) -> float:
        return self.summary.return_rate_hz

    @property
    def duty_cycle(self) -> float:
        return self.summary.duty_cycle

    @property
    def qualified(self) -> List[IntervalRecord]:
        return [r for r in self.intervals if r.stats.qualified]


"""
Faraday angles realizing H, A, V and D on the ground through the 2 phi rotation.
"""
DEFAULT_ALPHABET: Tuple[float, ...] = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8)

"""
Ground measurement bases of the two-way session.
"""
DEFAULT_GROUND_BASES: Dict[str, AnalyzerBasis] = {"Z": (H, V), "X": (D, A)}

"""Maps (alphabet index, ground basis label) to the key bit; other pairs are discarded."""
SiftingRule = Dict[Tuple[int, str], int]


@dataclass
class TwoWaySessionConfig:
    """
    Two-way key session with a Faraday-rotator retroreflector.

    A horizontally polarized beam goes up; the satellite encodes its key by
    picking a Faraday angle per slot, and the ground measures the returned
    photons in a randomly chosen basis.
    """

    fr_angle_alphabet: Sequence[float] = DEFAULT_ALPHABET
    """Faraday angles in **radians**, distinct modulo pi."""
    pose_track: Optional[Sequence[TelescopePose]] = None
    """Telescope pose per slot, cycled when shorter than the session. Defaults to the pass elevation."""
    attenuation_to_single_photon: Optional[float] = None
    """Factor applied at the CCR; by default chosen so that the session's mu_sat leaves the satellite at culmination."""
    sifting_rule: Optional[SiftingRule] = None
    """Defaults to the deterministic matches between received states and ground bases."""
    ground_bases: Dict[str, AnalyzerBasis] = field(
        default_factory=lambda: dict(DEFAULT_GROUND_BASES)
    )
    n_slots: Optional[int] = None
    """Key rounds, one per SLR slot. Defaults to every slot of the pass."""
    intensity_monitor: bool = True
    """Whether the satellite monitors the incoming intensity against Trojan-horse probing."""

    def __post_init__(self):
        alphabet = [float(a) for a in self.fr_angle_alphabet]
        if not alphabet:
            raise InvalidArgumentException("fr_angle_alphabet must not be empty")
        if not all(math.isfinite(a) for a in alphabet):
            raise InvalidArgumentException("fr_angle_alphabet entries must be finite")
        reduced = sorted(a % math.pi for a in alphabet)
        gaps = np.diff(reduced + [reduced[0] + math.pi])
        if len(alphabet) > 1 and np.any(gaps < 1e-9):
            raise InvalidArgumentException("fr_angle_alphabet angles must be distinct modulo pi")
        self.fr_angle_alphabet = tuple(alphabet)
        if not self.ground_bases:
            raise InvalidArgumentException("ground_bases must not be empty")
        for basis in self.ground_bases.values():
            check_analyzer_basis(basis)
        if self.pose_track is not None and len(self.pose_track) == 0:
            raise InvalidArgumentException("pose_track must not be empty")
        if self.attenuation_to_single_photon is not None and not (
            math.isfinite(self.attenuation_to_single_photon)
            and self.attenuation_to_single_photon > 0
        ):
            raise InvalidArgumentException("attenuation_to_single_photon must be positive")
        if self.n_slots is not None and (int(self.n_slots) != self.n_slots or self.n_slots < 1):
            raise InvalidArgumentException(f"n_slots must be a positive integer, got {self.n_slots}")


@dataclass(frozen=True, eq=False)
class TwoWayResult:
    """
    Sifted key of a two-way session.
    """

    sifted_bits: np.ndarray
    """Bits measured on the ground in the sifted rounds."""
    key_bits: np.ndarray
    """Bits encoded by the satellite in the same rounds."""
    qber: float
    """Bayesian QBER of the sifted key."""
    n_rounds: int
    n_detected: int
    """Rounds with at least one detection."""
    attenuation_factor: float
    mu_sat: float
    """Mean photons per pulse leaving the satellite at culmination."""
    intensity_monitor: bool
    sifted_slots: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    """Slot index of each sifted bit."""

    @property
    def n_sifted(self) -> int:
        return len(self.sifted_bits)

    @property
    def n_errors(self) -> int:
        return int(np.count_nonzero(self.sifted_bits != self.key_bits))
