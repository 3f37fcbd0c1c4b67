import logging
import math
from typing import Dict, List, Sequence

import numpy as np

from qsatlink.exceptions import InvalidArgumentException, OutOfModelException
from qsatlink.linkbudget import airmass_from_elevation, radar_mu_rx, uplink_factor
from qsatlink.polarization import (
    H,
    AnalyzerBasis,
    detection_probability,
    expected_received_state,
    round_trip,
)
from qsatlink.protocol.sampling import (
    TWO_WAY_STREAM,
    detecting_pulses,
    route_photons,
    slot_rng,
    zero_truncated_poisson,
)
from qsatlink.protocol.session import pose_at
from qsatlink.protocol.types import (
    SessionConfig,
    SiftingRule,
    TwoWayResult,
    TwoWaySessionConfig,
)
from qsatlink.timing import qber_bayesian, slot_rx_window

logger = logging.getLogger(__name__)

_CERTAIN = 1.0 - 1e-9


def build_sifting_rule(
    alphabet: Sequence[float], ground_bases: Dict[str, AnalyzerBasis]
) -> SiftingRule:
    """
    Key bit of every (Faraday angle, ground basis) pair with a deterministic outcome.

    The satellite's bit is the analyzer channel the received state R(2 phi) sigma_z |H>
    lands in with certainty; pairs with a random outcome are discarded in sifting.
    """
    rule: SiftingRule = {}
    for index, angle in enumerate(alphabet):
        received = expected_received_state(angle, H)
        for label, basis in ground_bases.items():
            p0 = detection_probability(received, basis[0])
            if p0 >= _CERTAIN:
                rule[(index, label)] = 0
            elif p0 <= 1.0 - _CERTAIN:
                rule[(index, label)] = 1
    return rule


def _attenuation(cfg: TwoWaySessionConfig, session: SessionConfig) -> float:
    if cfg.attenuation_to_single_photon is not None:
        return cfg.attenuation_to_single_photon
    if session.mu_sat is None:
        raise InvalidArgumentException(
            "two-way session needs either attenuation_to_single_photon or the session mu_sat"
        )
    return session.mu_sat / _culmination_uplink(session)


def _culmination_uplink(session: SessionConfig) -> float:
    geometry = session.pass_geometry
    peak = int(np.argmax(geometry.elevations))
    airmass = airmass_from_elevation(float(geometry.elevations[peak]))
    params = session.link_params.with_geometry(float(geometry.slant_ranges[peak]), airmass)
    return uplink_factor(params)


def two_way_session(cfg: TwoWaySessionConfig, session: SessionConfig) -> TwoWayResult:
    """
    Two-way key exchange through a Faraday-rotator retroreflector.

    Each slot is one key round: the satellite draws an angle from the alphabet, the
    ground draws a measurement basis, and the round's outcome is the channel of the
    first detection in the open receive window (a random bit for a double click).
    Rounds whose (angle, basis) pair is in the sifting rule are kept.

    The photons go up as |H> and come back as R(2 phi) sigma_z |H> for every
    telescope pose, so the sifted key does not depend on the pose track.

    :raises InvalidArgumentException: On an empty alphabet or a session too short for the rounds
    """
    geometry = session.pass_geometry
    period = session.schedule.slot_period
    available = int(math.floor(geometry.duration / period + 1e-9))
    n_slots = cfg.n_slots if cfg.n_slots is not None else available
    if n_slots > available:
        raise InvalidArgumentException(
            f"{n_slots} rounds need {n_slots * period:g} s, the pass lasts {geometry.duration:g} s"
        )

    alphabet = list(cfg.fr_angle_alphabet)
    labels: List[str] = list(cfg.ground_bases)
    rule = cfg.sifting_rule if cfg.sifting_rule is not None else build_sifting_rule(alphabet, cfg.ground_bases)
    attenuation = _attenuation(cfg, session)
    params = session.link_params

    sifted_bits: List[int] = []
    key_bits: List[int] = []
    sifted_slots: List[int] = []
    n_detected = 0
    below_floor = 0

    for i in range(n_slots):
        rng = slot_rng(session.rng_seed, i, TWO_WAY_STREAM)
        angle_index = int(rng.integers(len(alphabet)))
        label = labels[int(rng.integers(len(labels)))]
        double_click_bit = int(rng.integers(2))

        start = geometry.start + i * period
        mid = min(start + period / 2, geometry.end)
        rtt = float(geometry.round_trip_time_at(start))
        window = slot_rx_window(start, rtt, session.schedule)
        elevation = float(geometry.elevation_at(mid))
        try:
            airmass = airmass_from_elevation(elevation)
        except OutOfModelException:
            below_floor += 1
            continue
        if window is None:
            continue

        at = params.with_geometry(float(geometry.range_at(mid)), airmass)
        mu_rx = attenuation * radar_mu_rx(at)
        pulse_period = period / session.subdivisions
        n_pulses = int(math.floor((window[1] - window[0]) / pulse_period))

        pose = cfg.pose_track[i % len(cfg.pose_track)] if cfg.pose_track else pose_at(session, mid)
        basis = cfg.ground_bases[label]
        if session.satellite.polarization_preserving:
            received = round_trip(pose, alphabet[angle_index], H)
            p0 = round(detection_probability(received, basis[0]), 12)
        else:
            p0 = 0.5

        pulses = detecting_pulses(rng, n_pulses, mu_rx)
        photons = zero_truncated_poisson(rng, mu_rx, len(pulses))
        click0, click1 = route_photons(rng, photons, p0)
        n_background = int(rng.poisson(session.background_rate * (window[1] - window[0])))
        background_times = rng.uniform(0.0, n_pulses * pulse_period, size=n_background)
        background_channels = rng.integers(0, 2, size=n_background)

        signal_first = pulses[0] * pulse_period if len(pulses) else math.inf
        background_first = background_times.min() if n_background else math.inf
        if math.isinf(signal_first) and math.isinf(background_first):
            continue
        n_detected += 1
        if background_first < signal_first:
            outcome = int(background_channels[int(np.argmin(background_times))])
        elif click0[0] and click1[0]:
            outcome = double_click_bit
        else:
            outcome = 0 if click0[0] else 1

        bit = rule.get((angle_index, label))
        if bit is None:
            continue
        sifted_bits.append(outcome)
        key_bits.append(bit)
        sifted_slots.append(i)

    if below_floor:
        logger.warning(f"Skipped {below_floor} rounds below the elevation floor")

    sifted = np.array(sifted_bits, dtype=np.int8)
    key = np.array(key_bits, dtype=np.int8)
    n_errors = int(np.count_nonzero(sifted != key))
    qber = qber_bayesian(len(sifted) - n_errors, n_errors)
    mu_sat = attenuation * _culmination_uplink(session)
    logger.info(
        f"Two-way session: {len(sifted)} sifted bits from {n_slots} rounds, QBER {qber:.2%}"
    )
    return TwoWayResult(
        sifted_bits=sifted,
        key_bits=key,
        qber=qber,
        n_rounds=n_slots,
        n_detected=n_detected,
        attenuation_factor=attenuation,
        mu_sat=mu_sat,
        intensity_monitor=cfg.intensity_monitor,
        sifted_slots=np.array(sifted_slots, dtype=np.int64),
    )
