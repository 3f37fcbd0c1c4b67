import dataclasses
import math

import numpy as np
import pytest
from scipy import stats

from qsatlink.config import build_link_params
from qsatlink.exceptions import InsufficientDataException, InvalidArgumentException
from qsatlink.linkbudget import SatelliteCatalog, airmass_from_elevation, uplink_factor
from qsatlink.orbitpass import circular_pass, slant_range
from qsatlink.polarization import H, L, R, V, PolarizationState, TelescopePose, parse_basis
from qsatlink.protocol import (
    DEFAULT_ALPHABET,
    SessionConfig,
    StateSegment,
    TwoWaySessionConfig,
    build_sifting_rule,
    detecting_pulses,
    detecting_pulses_naive,
    estimate_pass_mu_sat,
    feasibility_verdict,
    plan_slots,
    route_photons,
    simulate_pass,
    slot_rng,
    two_way_session,
    zero_truncated_poisson,
)


def _four_states(duration: float):
    hv, lr = parse_basis("HV"), parse_basis("LR")
    quarter = duration / 4
    return [
        StateSegment(quarter, H, hv, "H"),
        StateSegment(quarter, V, hv, "V"),
        StateSegment(quarter, L, lr, "L"),
        StateSegment(quarter, R, lr, "R"),
    ]


def _session(satellite: str = "Larets", duration: float = 40.0, **overrides) -> SessionConfig:
    spec = SatelliteCatalog.load()[satellite]
    kwargs = dict(
        satellite=spec,
        pass_geometry=circular_pass(
            spec.altitude, math.radians(30.0), sample_period=1.0, duration=duration
        ),
        link=build_link_params(spec),
        state_schedule=_four_states(duration),
        mu_sat=3.4,
        background_rate=150.0,
        rng_seed=1,
        station_azimuth=math.radians(35.0),
    )
    kwargs.update(overrides)
    return SessionConfig(**kwargs)


def test_verdict_on_high_photon_number():
    verdict = feasibility_verdict(14 / 214, 3.4)
    assert verdict.qber_ok
    assert not verdict.mu_ok
    assert not verdict.overall


def test_verdict_on_feasible_pass():
    assert feasibility_verdict(0.065, 1.0).overall


def test_verdict_thresholds():
    assert not feasibility_verdict(0.11, 1.0).qber_ok
    assert feasibility_verdict(0.05, 2.0).mu_ok
    assert not feasibility_verdict(0.05, math.nan).mu_ok
    with pytest.raises(InvalidArgumentException):
        feasibility_verdict(1.5, 1.0)


def test_slot_rng_is_keyed_by_slot():
    a = slot_rng(5, 17).random(4)
    assert np.array_equal(a, slot_rng(5, 17).random(4))
    assert not np.array_equal(a, slot_rng(5, 18).random(4))
    assert not np.array_equal(a, slot_rng(5, 17, stream=1).random(4))


def test_detecting_pulses_match_poisson_mean():
    n, mu = 1_000_000, 1e-3
    p = -math.expm1(-mu)
    standard_error = math.sqrt(n * p * (1 - p))

    fast = detecting_pulses(slot_rng(1, 0), n, mu)
    naive = detecting_pulses_naive(slot_rng(1, 1), n, mu)

    assert abs(len(fast) - n * p) < 3 * standard_error
    assert abs(len(naive) - n * p) < 3 * standard_error
    assert np.all(np.diff(fast) > 0)
    assert fast[0] >= 0 and fast[-1] < n


@pytest.mark.parametrize("sampler", [detecting_pulses, detecting_pulses_naive])
def test_detection_gaps_are_geometric(sampler):
    mu = 0.1
    p = -math.expm1(-mu)
    pulses = sampler(slot_rng(4, 0), 200_000, mu)
    gaps = np.diff(np.r_[-1, pulses])

    support = np.arange(1, 31)
    observed = np.r_[[np.count_nonzero(gaps == k) for k in support], np.count_nonzero(gaps > 30)]
    expected = len(gaps) * np.r_[stats.geom.pmf(support, p), stats.geom.sf(30, p)]
    assert stats.chisquare(observed, expected).pvalue > 1e-4


def test_detecting_pulses_limits():
    rng = slot_rng(1, 0)
    assert len(detecting_pulses(rng, 1000, 0.0)) == 0
    assert len(detecting_pulses(rng, 0, 1.0)) == 0
    assert np.array_equal(detecting_pulses(rng, 50, 100.0), np.arange(50))
    with pytest.raises(InvalidArgumentException):
        detecting_pulses(rng, 10, -1.0)


def test_zero_truncated_poisson():
    mu = 1.0
    photons = zero_truncated_poisson(slot_rng(2, 0), mu, 100_000)
    assert photons.min() >= 1
    assert photons.mean() == pytest.approx(mu / -math.expm1(-mu), rel=0.02)


def test_route_photons_with_certain_outcome():
    photons = np.array([1, 3, 2])
    click0, click1 = route_photons(slot_rng(3, 0), photons, 1.0)
    assert click0.all()
    assert not click1.any()


def test_route_single_photons_click_one_channel():
    photons = np.ones(1000, dtype=np.int64)
    click0, click1 = route_photons(slot_rng(3, 0), photons, 0.5)
    assert np.array_equal(click0, ~click1)
    assert 400 < click0.sum() < 600


def test_routing_follows_the_born_rule_off_the_basis_axes():
    tilted = PolarizationState.from_angles(0.4, phase=0.3)
    segment = StateSegment(20.0, tilted, parse_basis("HV"), "tilted")
    _, plans = plan_slots(_session(duration=20.0, state_schedule=[segment]))
    p0 = math.cos(0.4) ** 2
    assert {p.p_channel0 for p in plans} == {pytest.approx(p0, abs=1e-11)}

    n = 100_000
    click0, click1 = route_photons(slot_rng(6, 0), np.ones(n, dtype=np.int64), p0)
    assert np.array_equal(click0, ~click1)
    assert abs(click0.mean() - p0) < 3 * math.sqrt(p0 * (1 - p0) / n)


def test_downlink_session_needs_mu_sat():
    with pytest.raises(InvalidArgumentException):
        _session(mu_sat=None)


def test_state_schedule_longer_than_the_pass_is_rejected():
    with pytest.raises(InvalidArgumentException):
        _session(state_schedule=_four_states(80.0))


def test_pulse_rate_must_divide_the_slot():
    with pytest.raises(InvalidArgumentException):
        _session(pulse_rate=1.23456789e8)


def test_segment_lookup():
    cfg = _session()
    assert cfg.segment_at(0.0).name == "H"
    assert cfg.segment_at(10.0).name == "V"
    assert cfg.segment_at(39.9).name == "R"
    assert cfg.segment_at(45.0).name == "R"


def test_slot_plans_follow_the_pass():
    cfg = _session()
    epochs, plans = plan_slots(cfg)

    assert len(plans) == 400
    assert len(epochs) == 401
    culmination = plans[200]
    rtt = culmination.epoch - culmination.start
    assert rtt == pytest.approx(8.155e-3, rel=2e-3)
    assert culmination.window[1] - culmination.window[0] == pytest.approx(rtt - 4.5e-3, rel=1e-9)
    assert culmination.pitch == pytest.approx(1e-8, rel=1e-4)
    assert plans[10].pitch < 1e-8 < plans[390].pitch

    # H, V, L and R come back as H, V, R and L.
    assert [plans[i].correct_channel for i in (0, 100, 200, 300)] == [0, 1, 1, 0]
    assert {p.p_channel0 for p in plans[:100]} == {1.0}
    assert {p.p_channel0 for p in plans[100:200]} == {0.0}


def test_depolarizing_satellite_routes_evenly():
    _, plans = plan_slots(_session("Ajisai", duration=20.0))
    assert {p.p_channel0 for p in plans} == {0.5}


def test_simulated_pass_is_deterministic():
    cfg = _session(duration=10.0)
    first, stream = simulate_pass(cfg)
    again, stream_again = simulate_pass(cfg)
    threaded, stream_threaded = simulate_pass(dataclasses.replace(cfg, workers=4))

    assert np.array_equal(stream.times, stream_again.times)
    assert np.array_equal(stream.times, stream_threaded.times)
    assert np.array_equal(stream.channels, stream_threaded.channels)
    assert first.qber == again.qber == threaded.qber

    _, other = simulate_pass(dataclasses.replace(cfg, rng_seed=2))
    assert not np.array_equal(stream.times, other.times)


def test_noiseless_pass_has_no_wrong_signal():
    cfg = _session(duration=20.0, background_rate=0.0, mu_sat=100.0)
    report, stream = simulate_pass(cfg)

    assert report.n_background_tags == 0
    assert report.summary.n_wrong == 0
    assert report.summary.n_corr > 1000
    assert report.qber == pytest.approx(1 / (report.summary.n_corr + 2))
    assert len(stream) == report.n_signal_tags
    assert report.duty_cycle == pytest.approx(0.037, abs=0.002)


def test_mu_sat_recovered_from_return_rate():
    cfg = _session(duration=20.0, background_rate=0.0, mu_sat=100.0)
    report, _ = simulate_pass(cfg)

    assert report.mu_sat_upper_bound
    assert report.mu_sat_estimate == pytest.approx(100.0, rel=0.1)
    assert not report.verdict.mu_ok
    estimates = estimate_pass_mu_sat(report, cfg.link_params)
    assert len(estimates) == len(report.qualified)
    assert np.mean(estimates) == pytest.approx(report.mu_sat_estimate)


def test_mu_sat_estimate_needs_a_qualified_interval():
    report, _ = simulate_pass(_session(duration=10.0, mu_sat=1e-6))
    assert math.isnan(report.mu_sat_estimate)
    with pytest.raises(InsufficientDataException):
        estimate_pass_mu_sat(report, _session(duration=10.0).link_params)


def test_radar_model_returns_the_uplink_photon_number():
    cfg = _session(duration=20.0, channel_model="radar", mu_sat=None, background_rate=0.0)
    report, _ = simulate_pass(cfg)

    elevation = math.radians(30.0)
    at_culmination = cfg.link_params.with_geometry(
        float(slant_range(cfg.satellite.altitude, elevation)), airmass_from_elevation(elevation)
    )
    assert report.channel_model == "radar"
    assert report.mu_sat_estimate == pytest.approx(uplink_factor(at_culmination), rel=0.25)


@pytest.mark.slow
def test_larets_pass_statistics():
    qbers, rates = [], []
    for seed in range(20):
        report, _ = simulate_pass(_session(rng_seed=seed))
        qbers.append(report.qber)
        rates.append(report.return_rate_hz)

    assert 0.04 <= np.mean(qbers) <= 0.09
    assert 118.0 <= np.mean(rates) <= 176.0


@pytest.mark.slow
def test_depolarizing_satellite_has_even_error_rate():
    report, _ = simulate_pass(_session("Ajisai"))

    n = report.summary.n_corr + report.summary.n_wrong
    assert n >= 20
    assert abs(report.qber - 0.5) < 3 * 0.5 / math.sqrt(n) + 1 / n


def test_default_sifting_rule():
    rule = build_sifting_rule(DEFAULT_ALPHABET, TwoWaySessionConfig().ground_bases)
    assert rule == {(0, "Z"): 0, (1, "X"): 1, (2, "Z"): 1, (3, "X"): 0}


def test_alphabet_angles_must_differ_modulo_pi():
    with pytest.raises(InvalidArgumentException):
        TwoWaySessionConfig(fr_angle_alphabet=[0.0, math.pi])


def test_two_way_session_longer_than_pass_is_rejected():
    session = _session(duration=20.0)
    with pytest.raises(InvalidArgumentException):
        two_way_session(TwoWaySessionConfig(n_slots=1000), session)


def test_two_way_key_does_not_depend_on_telescope_pose():
    duration = 100.0
    session = _session(
        duration=duration,
        state_schedule=[StateSegment(duration, H, label="H")],
        background_rate=0.0,
        mu_sat=50.0,
    )
    rng = np.random.default_rng(99)
    random_track = [
        TelescopePose(float(rng.uniform(0, 2 * math.pi)), float(rng.uniform(0, math.pi / 2)))
        for _ in range(1000)
    ]
    fixed_track = [TelescopePose.from_degrees(0.0, 90.0)]

    tracked = two_way_session(TwoWaySessionConfig(pose_track=random_track, n_slots=1000), session)
    fixed = two_way_session(TwoWaySessionConfig(pose_track=fixed_track, n_slots=1000), session)

    assert tracked.n_rounds == 1000
    assert tracked.n_sifted > 100
    assert np.array_equal(tracked.sifted_bits, tracked.key_bits)
    assert tracked.n_errors == 0
    assert tracked.qber == pytest.approx(1 / (tracked.n_sifted + 2))
    assert np.array_equal(tracked.sifted_slots, fixed.sifted_slots)
    assert np.array_equal(tracked.sifted_bits, fixed.sifted_bits)
    assert tracked.mu_sat == pytest.approx(50.0)


def test_two_way_mismatched_bases_give_even_outcomes():
    duration = 100.0
    session = _session(
        duration=duration,
        state_schedule=[StateSegment(duration, H, label="H")],
        background_rate=0.0,
        mu_sat=50.0,
    )
    mismatched = {(0, "X"): 0, (1, "Z"): 0, (2, "X"): 0, (3, "Z"): 0}
    result = two_way_session(TwoWaySessionConfig(sifting_rule=mismatched, n_slots=1000), session)

    n = result.n_sifted
    assert n > 100
    assert not result.key_bits.any()
    assert abs(result.sifted_bits.mean() - 0.5) < 3 * 0.5 / math.sqrt(n)
