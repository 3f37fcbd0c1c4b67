"""
Quantum key distribution over satellite laser ranging retroreflectors.

qsatlink models a ground station that sends a 100 MHz comb of polarized qubits,
synchronized to a 10 Hz SLR pulse, to a LEO satellite equipped with corner-cube
retroreflectors, and detects the returning photons. It covers the radar-equation
link budget, the Jones-calculus polarization round trip through the Coude path,
SLR-anchored time gating, pass-level QBER and mean-photon-number estimation, and
a two-way key session with a Faraday-rotator retroreflector.

```py
from qsatlink import load_session_config, simulate_pass

config, _ = load_session_config("larets_example.toml")
report, timetags = simulate_pass(config)
print(f"QBER {report.qber:.1%}, mu_sat {report.mu_sat_estimate:.2f}")
```
"""

from .config import Settings, build_link_params, load_session_config
from .exceptions import (
    CatalogEntryNotFoundException,
    ConfigException,
    InsufficientDataException,
    InvalidArgumentException,
    OutOfModelException,
    OutputExistsException,
    ParseException,
    QSatLinkException,
)
from .linkbudget import (
    LinkBudgetParams,
    SatelliteCatalog,
    SatelliteSpec,
    downlink_transmissivity,
    estimate_mu_sat,
    radar_mu_rx,
    transmitter_gain,
)
from .orbitpass import PassGeometry, circular_pass, load_pass, save_pass
from .polarization import (
    A,
    D,
    H,
    L,
    R,
    V,
    PolarizationState,
    TelescopePose,
    expected_received_state,
    round_trip,
)
from .protocol import (
    FeasibilityVerdict,
    SessionConfig,
    SessionReport,
    StateSegment,
    TwoWayResult,
    TwoWaySessionConfig,
    estimate_pass_mu_sat,
    feasibility_verdict,
    simulate_pass,
    two_way_session,
)
from .timing import (
    GateConfig,
    SlotSchedule,
    TimeTagStream,
    analyze_intervals,
    effective_rx_window,
    expected_arrivals,
    gate_events,
    qber_bayesian,
)

__all__ = [
    # Config
    "Settings",
    "build_link_params",
    "load_session_config",
    # Exceptions
    "CatalogEntryNotFoundException",
    "ConfigException",
    "InsufficientDataException",
    "InvalidArgumentException",
    "OutOfModelException",
    "OutputExistsException",
    "ParseException",
    "QSatLinkException",
    # Link budget
    "LinkBudgetParams",
    "SatelliteCatalog",
    "SatelliteSpec",
    "downlink_transmissivity",
    "estimate_mu_sat",
    "radar_mu_rx",
    "transmitter_gain",
    # Pass geometry
    "PassGeometry",
    "circular_pass",
    "load_pass",
    "save_pass",
    # Polarization
    "A",
    "D",
    "H",
    "L",
    "R",
    "V",
    "PolarizationState",
    "TelescopePose",
    "expected_received_state",
    "round_trip",
    # Protocol
    "FeasibilityVerdict",
    "SessionConfig",
    "SessionReport",
    "StateSegment",
    "TwoWayResult",
    "TwoWaySessionConfig",
    "estimate_pass_mu_sat",
    "feasibility_verdict",
    "simulate_pass",
    "two_way_session",
    # Timing
    "GateConfig",
    "SlotSchedule",
    "TimeTagStream",
    "analyze_intervals",
    "effective_rx_window",
    "expected_arrivals",
    "gate_events",
    "qber_bayesian",
]
