import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from qsatlink.consts import SPEED_OF_LIGHT
from qsatlink.exceptions import (
    InsufficientDataException,
    InvalidArgumentException,
    OutOfModelException,
)
from qsatlink.linkbudget import (
    LinkBudgetParams,
    airmass_from_elevation,
    downlink_transmissivity,
    estimate_mu_sat,
    radar_mu_rx,
)
from qsatlink.polarization import (
    TelescopePose,
    correct_channel,
    detection_probability,
    expected_received_state,
    round_trip,
)
from qsatlink.protocol.sampling import (
    PASS_STREAM,
    detecting_pulses,
    route_photons,
    slot_rng,
    zero_truncated_poisson,
)
from qsatlink.protocol.types import (
    IntervalRecord,
    SessionConfig,
    SessionReport,
)
from qsatlink.protocol.verdict import feasibility_verdict
from qsatlink.timing import (
    IntervalStats,
    ReceiveWindows,
    TimeTagStream,
    analyze_intervals,
    expected_arrivals,
    slot_rx_window,
    summarize,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlotPlan:
    """
    Deterministic setup of one slot: geometry, timing and channel probabilities.
    """

    index: int
    start: float
    """Slot start in **seconds**, when the SLR pulse leaves the station."""
    epoch: float
    """Detection time of the slot's SLR return."""
    pitch: float
    """Spacing of the returning qubits, stretched by the range rate."""
    window: Optional[Tuple[float, float]]
    mu_rx: float
    p_channel0: float
    correct_channel: int


@dataclass(frozen=True)
class SlotEvents:
    times: np.ndarray
    channels: np.ndarray
    n_signal: int
    n_background: int


def pose_at(cfg: SessionConfig, t: float) -> TelescopePose:
    """
    Telescope pose tracking the satellite at time t.
    """
    return TelescopePose(
        azimuth=cfg.station_azimuth % (2 * math.pi),
        elevation=float(cfg.pass_geometry.elevation_at(t)),
    )


def slot_mu_rx(cfg: SessionConfig, params: LinkBudgetParams) -> float:
    """
    Mean detected photons per pulse at the geometry of `params`.
    """
    if cfg.channel_model == "radar":
        return radar_mu_rx(params)
    return cfg.mu_sat * downlink_transmissivity(params)


def _routing_probability(cfg: SessionConfig, pose: TelescopePose, segment) -> float:
    if not cfg.satellite.polarization_preserving:
        return 0.5
    basis = segment.analyzer_basis or cfg.analyzer_basis
    received = round_trip(pose, cfg.fr_angle, segment.prepared_state)
    # Rounded so that pose-dependent float noise cannot change a draw.
    return round(detection_probability(received, basis[0]), 12)


def plan_slots(cfg: SessionConfig) -> Tuple[np.ndarray, List[SlotPlan]]:
    """
    SLR epochs of the session and the setup of every slot.

    The SLR pulse of slot i leaves at its start and is detected one round trip
    later. Within a slot the qubit returns are spaced by the pulse period
    stretched by 1 + 2 v_r / c, evaluated mid-slot.

    :return: Epochs (one more than slots) and slot plans
    """
    geometry = cfg.pass_geometry
    period = cfg.schedule.slot_period
    n_slots = int(math.floor(cfg.session_duration / period + 1e-9))
    if n_slots < 1:
        raise InvalidArgumentException("the state schedule is shorter than one slot")

    starts = geometry.start + period * np.arange(n_slots + 1)
    starts[-1] = min(starts[-1], geometry.end)
    epochs = starts + geometry.round_trip_time_at(starts)
    mids = starts[:-1] + period / 2
    ranges = geometry.range_at(mids)
    velocities = geometry.radial_velocity_at(mids)
    elevations = geometry.elevation_at(mids)

    params = cfg.link_params
    below_floor = 0
    plans: List[SlotPlan] = []
    for i in range(n_slots):
        rtt = float(epochs[i] - starts[i])
        window = slot_rx_window(float(starts[i]), rtt, cfg.schedule)
        segment = cfg.segment_at(period * i)
        try:
            airmass = airmass_from_elevation(float(elevations[i]))
            mu_rx = slot_mu_rx(cfg, params.with_geometry(float(ranges[i]), airmass))
        except OutOfModelException:
            below_floor += 1
            window, mu_rx = None, 0.0

        pose = pose_at(cfg, float(mids[i]))
        expected = expected_received_state(cfg.fr_angle, segment.prepared_state)
        plans.append(
            SlotPlan(
                index=i,
                start=float(starts[i]),
                epoch=float(epochs[i]),
                pitch=(period / cfg.subdivisions) * (1.0 + 2.0 * float(velocities[i]) / SPEED_OF_LIGHT),
                window=window,
                mu_rx=mu_rx,
                p_channel0=_routing_probability(cfg, pose, segment),
                correct_channel=correct_channel(
                    expected, segment.analyzer_basis or cfg.analyzer_basis
                ),
            )
        )

    if below_floor:
        logger.warning(f"Receiver kept closed in {below_floor} slots below the elevation floor")
    return epochs, plans


def pulse_range(plan: SlotPlan) -> Tuple[int, int]:
    """
    First pulse index and number of pulses arriving inside the slot's open window.
    """
    if plan.window is None:
        return 0, 0
    w0, w1 = plan.window
    k_lo = int(math.ceil((w0 - plan.epoch) / plan.pitch))
    k_hi = int(math.ceil((w1 - plan.epoch) / plan.pitch)) - 1
    return k_lo, max(k_hi - k_lo + 1, 0)


def simulate_slot(cfg: SessionConfig, plan: SlotPlan) -> SlotEvents:
    """
    Detector events of one slot, drawn from the slot's own random stream.
    """
    if plan.window is None:
        return SlotEvents(np.empty(0), np.empty(0, dtype=np.int8), 0, 0)
    rng = slot_rng(cfg.rng_seed, plan.index, PASS_STREAM)
    k_lo, n_pulses = pulse_range(plan)

    pulses = detecting_pulses(rng, n_pulses, plan.mu_rx)
    photons = zero_truncated_poisson(rng, plan.mu_rx, len(pulses))
    click0, click1 = route_photons(rng, photons, plan.p_channel0)
    arrivals = plan.epoch + (k_lo + pulses) * plan.pitch
    signal_times = np.concatenate([arrivals[click0], arrivals[click1]])
    signal_channels = np.concatenate(
        [np.zeros(int(click0.sum()), dtype=np.int8), np.ones(int(click1.sum()), dtype=np.int8)]
    )
    signal_times = signal_times + rng.normal(0.0, cfg.detector_jitter, size=len(signal_times))

    w0, w1 = plan.window
    n_background = int(rng.poisson(cfg.background_rate * (w1 - w0)))
    background_times = rng.uniform(w0, w1, size=n_background)
    background_channels = rng.integers(0, 2, size=n_background).astype(np.int8)

    return SlotEvents(
        times=np.concatenate([signal_times, background_times]),
        channels=np.concatenate([signal_channels, background_channels]),
        n_signal=len(signal_times),
        n_background=n_background,
    )


def _run_slots(cfg: SessionConfig, plans: List[SlotPlan]) -> List[SlotEvents]:
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda plan: simulate_slot(cfg, plan), plans))
    return [simulate_slot(cfg, plan) for plan in plans]


def _interval_geometry(
    cfg: SessionConfig, stats: IntervalStats, windows: ReceiveWindows
) -> Tuple[float, float]:
    geometry = cfg.pass_geometry
    mids = (windows.starts + windows.ends) / 2
    mids = mids[(mids >= stats.t_start) & (mids < stats.t_end)]
    if len(mids) == 0:
        mids = np.array([(stats.t_start + stats.t_end) / 2])
    mids = np.clip(mids, geometry.start, geometry.end)
    return float(np.mean(geometry.range_at(mids))), float(np.mean(geometry.elevation_at(mids)))


def _interval_mu_sat(
    return_rate_hz: float, slant_range: float, airmass: float, link: LinkBudgetParams, pulse_rate: float
) -> float:
    if not (math.isfinite(return_rate_hz) and math.isfinite(airmass)):
        return math.nan
    return estimate_mu_sat(return_rate_hz, pulse_rate, link.with_geometry(slant_range, airmass))


def _interval_record(
    cfg: SessionConfig, stats: IntervalStats, windows: ReceiveWindows
) -> IntervalRecord:
    slant_range, elevation = _interval_geometry(cfg, stats, windows)
    try:
        airmass = airmass_from_elevation(elevation)
    except OutOfModelException:
        airmass = math.nan
    return IntervalRecord(
        stats=stats,
        mean_slant_range=slant_range,
        mean_elevation=elevation,
        airmass=airmass,
        mu_sat_estimate=_interval_mu_sat(
            stats.return_rate_hz, slant_range, airmass, cfg.link_params, cfg.pulse_rate
        ),
    )


def simulate_pass(cfg: SessionConfig) -> Tuple[SessionReport, TimeTagStream]:
    """
    Monte-Carlo simulation and analysis of a QKD pass.

    Per slot, the receive window follows from the round trip time; detected pulses are
    drawn with mean mu_rx from the downlink or radar model; each photon is routed
    through the analyzer with the Born probability of the received state (50/50 for
    depolarizing satellites); events get Gaussian jitter and uniform background is
    added while the receiver is open. The stream is then analyzed exactly as an
    external time-tag file would be, using only the SLR epochs and receive windows.

    Identical configs, seed included, give bit-identical reports and streams.

    :return: Report and the quantized, time-ordered detector events
    """
    epochs, plans = plan_slots(cfg)
    slots = _run_slots(cfg, plans)

    stream = TimeTagStream.from_events(
        np.concatenate([s.times for s in slots]) if slots else np.empty(0),
        np.concatenate([s.channels for s in slots]) if slots else np.empty(0, dtype=np.int8),
        cfg.tagger_resolution,
    )
    opened = [p for p in plans if p.window is not None]
    windows = ReceiveWindows(
        starts=[p.window[0] for p in opened],
        ends=[p.window[1] for p in opened],
        correct_channels=[p.correct_channel for p in opened],
    )

    grid = expected_arrivals(epochs, cfg.subdivisions)
    stats = analyze_intervals(
        stream, grid, cfg.gate, cfg.interval, windows, n_sigma=cfg.n_sigma
    )
    records = [_interval_record(cfg, s, windows) for s in stats]
    summary = summarize(stats)

    estimates = [r.mu_sat_estimate for r in records if r.stats.qualified and math.isfinite(r.mu_sat_estimate)]
    mu_sat = float(np.mean(estimates)) if estimates else math.nan

    n_signal = sum(s.n_signal for s in slots)
    n_background = sum(s.n_background for s in slots)
    logger.info(
        f"Simulated {len(plans)} slots of {cfg.satellite.name}: {n_signal} signal and "
        f"{n_background} background tags, QBER {summary.qber:.2%} over "
        f"{summary.n_qualified}/{summary.n_intervals} qualified intervals"
    )

    report = SessionReport(
        intervals=records,
        summary=summary,
        mu_sat_estimate=mu_sat,
        verdict=feasibility_verdict(summary.qber, mu_sat),
        epochs=epochs,
        windows=windows,
        pulse_rate=cfg.pulse_rate,
        satellite=cfg.satellite.name,
        seed=cfg.rng_seed,
        channel_model=cfg.channel_model,
        mu_sat_upper_bound=cfg.satellite.ccr_reflectivity == 1.0,
        n_signal_tags=n_signal,
        n_background_tags=n_background,
    )
    return report, stream


def estimate_pass_mu_sat(report: SessionReport, link: LinkBudgetParams) -> List[float]:
    """
    Mean photons per pulse leaving the satellite, one estimate per qualified interval.

    Each interval's return rate is inverted through the downlink transmissivity at
    the interval's mean slant range and air mass.

    :param report: Report of `simulate_pass`
    :param link: Link parameters including the satellite cross-section

    :raises InsufficientDataException: If no interval qualified
    """
    qualified = [r for r in report.intervals if r.stats.qualified]
    if not qualified:
        raise InsufficientDataException("no qualified intervals to estimate mu_sat from")
    estimates = []
    for record in qualified:
        if not math.isfinite(record.airmass):
            raise OutOfModelException(
                f"interval {record.stats.index} lies below the air-mass floor"
            )
        estimates.append(
            _interval_mu_sat(
                record.stats.return_rate_hz,
                record.mean_slant_range,
                record.airmass,
                link,
                report.pulse_rate,
            )
        )
    return estimates
