import io
import math

import numpy as np
import pytest

from qsatlink.exceptions import (
    InsufficientDataException,
    InvalidArgumentException,
    OutOfModelException,
    ParseException,
)
from qsatlink.linkbudget import SatelliteCatalog
from qsatlink.orbitpass import round_trip_time, slant_range
from qsatlink.timing import (
    INTERVAL_COLUMNS,
    GateConfig,
    GatedCounts,
    ReceiveWindows,
    SlotSchedule,
    TimeTagStream,
    analyze_intervals,
    effective_rx_window,
    exceeds_background,
    expected_arrivals,
    gate_events,
    interval_histograms,
    intervals_to_frame,
    load_epochs,
    load_timetags,
    load_windows,
    pulses_per_slot,
    qber_background_subtracted,
    qber_bayesian,
    save_timetags,
    select_intervals,
    slot_rx_window,
    summarize,
)


def test_duty_cycle_of_short_round_trip():
    duration, duty = effective_rx_window(5e-3, SlotSchedule())
    assert duration == pytest.approx(0.5e-3)
    assert duty == pytest.approx(0.005)


def test_duty_cycle_of_long_round_trip():
    duration, duty = effective_rx_window(20e-3, SlotSchedule())
    assert duration == pytest.approx(15.5e-3)
    assert duty == pytest.approx(0.155)


def test_round_trip_shorter_than_shutter_delays_closes_the_window():
    duration, duty = effective_rx_window(4.5e-3, SlotSchedule())
    assert duration == pytest.approx(0.0, abs=1e-15)
    assert duty == pytest.approx(0.0, abs=1e-14)
    assert effective_rx_window(1e-3, SlotSchedule()) == (0.0, 0.0)
    assert slot_rx_window(0.0, 4e-3, SlotSchedule()) is None


def test_duty_cycle_bounded_for_leo_round_trips():
    schedule = SlotSchedule()
    for rtt in np.linspace(1e-4, 20e-3, 200):
        _, duty = effective_rx_window(float(rtt), schedule)
        assert 0.0 <= duty <= 0.155 + 1e-12


@pytest.mark.parametrize(
    "satellite, lowest_elevation_deg",
    [("Larets", 5.0), ("Stella", 5.0), ("Starlette", 10.0), ("Jason-2", 20.0), ("Ajisai", 25.0)],
)
def test_duty_cycle_bounded_along_catalog_passes(satellite, lowest_elevation_deg):
    altitude = SatelliteCatalog.load()[satellite].altitude
    schedule = SlotSchedule()
    for elevation in np.linspace(lowest_elevation_deg, 90.0, 50):
        rtt = round_trip_time(slant_range(altitude, math.radians(elevation)))
        assert rtt <= 20e-3
        _, duty = effective_rx_window(rtt, schedule)
        assert 0.0 <= duty <= 0.155 + 1e-12


def test_round_trip_outside_slot_is_out_of_model():
    with pytest.raises(OutOfModelException):
        effective_rx_window(0.0, SlotSchedule())
    with pytest.raises(OutOfModelException):
        effective_rx_window(0.1, SlotSchedule())
    with pytest.raises(InvalidArgumentException):
        effective_rx_window(math.nan, SlotSchedule())


def test_pulses_per_slot_counts_whole_pulses():
    assert pulses_per_slot(100e6, 0.1) == 10_000_000
    assert pulses_per_slot(1e3, 0.1) == 100


@pytest.mark.parametrize("pulse_rate", [1.23456789e8, 100e6 + 1.0, 10.5])
def test_pulses_per_slot_rejects_fractional_pulses(pulse_rate):
    with pytest.raises(InvalidArgumentException):
        pulses_per_slot(pulse_rate, 0.1)


def test_slot_rx_window_opens_after_shutter():
    window = slot_rx_window(1.0, 8.155e-3, SlotSchedule())
    assert window[0] == pytest.approx(1.052)
    assert window[1] - window[0] == pytest.approx(8.155e-3 - 4.5e-3)


def test_overlapping_tx_and_rx_windows_are_rejected():
    with pytest.raises(InvalidArgumentException):
        SlotSchedule(tx_window=(0.0, 0.06), rx_window=(0.05, 0.1))


def test_expected_arrivals_subdivide_epoch_intervals():
    grid = expected_arrivals([0.0, 0.1], subdivisions=10)
    assert len(grid) == 10
    np.testing.assert_allclose(np.asarray(grid), np.arange(10) * 0.01, atol=1e-15)
    assert grid.end == pytest.approx(0.1)


def test_expected_arrivals_follow_doppler_stretch():
    grid = expected_arrivals([0.0, 0.1 * (1 + 2e-5)], subdivisions=10_000_000)
    pitch = 10e-9 * (1 + 2e-5)
    assert grid[1] == pytest.approx(pitch, rel=1e-12)
    assert grid[5_000_000] == pytest.approx(5_000_000 * pitch, rel=1e-12)
    assert grid.mean_pitch == pytest.approx(pitch, rel=1e-12)


def test_nearest_arrival_offsets():
    grid = expected_arrivals([0.0, 0.1, 0.2], subdivisions=10)
    offsets = grid.offsets([0.013, 0.016, 0.104, 0.199])
    np.testing.assert_allclose(offsets, [0.003, -0.004, 0.004, 0.009], atol=1e-12)


def test_expected_arrivals_need_two_increasing_epochs():
    with pytest.raises(InvalidArgumentException):
        expected_arrivals([0.0])
    with pytest.raises(InvalidArgumentException):
        expected_arrivals([0.0, 0.1, 0.1])


def test_gate_capture_fraction():
    assert GateConfig().capture_fraction == pytest.approx(0.682689, rel=1e-5)


def test_one_sigma_gate_captures_gaussian_jitter():
    rng = np.random.default_rng(7)
    n = 100_000
    sigma = 0.5e-9
    grid = expected_arrivals([0.0, 1e-3], subdivisions=10_000)
    slots = rng.integers(0, len(grid), n)
    times = np.sort(slots * 100e-9 + rng.normal(0.0, sigma, n))
    stream = TimeTagStream(times, np.zeros(n, dtype=np.int8))

    counts = gate_events(stream, grid, GateConfig(sigma=sigma))
    p = counts.n_signal_correct / n
    standard_error = math.sqrt(0.6827 * (1 - 0.6827) / n)
    assert abs(p - 0.6827) < 3 * standard_error
    assert counts.total == n


def test_gate_events_split_signal_guard_band_and_exterior():
    grid = [0.0, 100e-9, 200e-9]
    stream = TimeTagStream(
        [0.2e-9, 1.0e-9, 10e-9, 100.3e-9],
        [0, 0, 1, 1],
    )
    counts = gate_events(stream, grid, GateConfig(sigma=0.5e-9))

    assert counts.n_signal_correct == 1
    assert counts.n_signal_wrong == 1
    assert counts.n_guard_band == 1
    assert counts.n_background_exterior == 1
    assert counts.background_by_channel == (0, 1)
    assert counts.gate_span == pytest.approx(3e-9)
    assert counts.exterior_span == pytest.approx(291e-9)
    assert counts.expected_background_in_gate == pytest.approx(3 / 291 / 2)


def test_gate_events_with_wrong_channel_one():
    stream = TimeTagStream([0.1e-9, 100.1e-9, 200.1e-9], [1, 1, 0])
    counts = gate_events(stream, [0.0, 100e-9, 200e-9], GateConfig(sigma=0.5e-9), correct_channel=1)
    assert (counts.n_signal_correct, counts.n_signal_wrong) == (2, 1)
    assert counts.n_signal == (1, 2)


def test_gate_events_with_a_single_arrival():
    stream = TimeTagStream([-0.5e-9, 0.5e-9, 0.8e-9, 5e-9], [1, 0, 1, 0])
    counts = gate_events(stream, [0.0], GateConfig(sigma=0.5e-9), observed_time=1e-6)

    # Both gate edges are inside the gate.
    assert (counts.n_signal_correct, counts.n_signal_wrong) == (1, 1)
    assert counts.n_guard_band == 1
    assert counts.background_by_channel == (1, 0)
    assert counts.gate_span == pytest.approx(1e-9)
    assert counts.exterior_span == pytest.approx(1e-6 - 3e-9)

    without_observation = gate_events(stream, [0.0], GateConfig(sigma=0.5e-9))
    assert without_observation.gate_span == 0.0
    assert without_observation.total == 4


def test_gate_events_reject_an_empty_grid():
    with pytest.raises(InvalidArgumentException):
        gate_events(TimeTagStream([1.0], [0]), [], GateConfig())


def test_gate_events_conserve_events_per_channel():
    rng = np.random.default_rng(5)
    grid = expected_arrivals([0.0, 1e-4], subdivisions=1000)
    stream = TimeTagStream.from_events(rng.uniform(0.0, 1e-4, 5000), rng.integers(0, 2, 5000))
    cfg = GateConfig(sigma=0.5e-9)
    counts = gate_events(stream, grid, cfg)
    assert counts.total == len(stream)

    guard = 0
    for channel in (0, 1):
        only = stream.channels == channel
        alone = gate_events(TimeTagStream(stream.times[only], stream.channels[only]), grid, cfg)
        assert alone.total == stream.count(channel)
        assert alone.n_signal[channel] == counts.n_signal[channel]
        assert alone.background_by_channel[channel] == counts.background_by_channel[channel]
        guard += alone.n_guard_band
    assert guard == counts.n_guard_band


def test_background_subtraction_recovers_the_signal_qber():
    rng = np.random.default_rng(17)
    sigma = 0.5e-9
    grid = expected_arrivals([0.0, 1e-3], subdivisions=10_000)

    n_signal = 20_000
    signal_times = rng.integers(0, len(grid), n_signal) * 100e-9 + rng.normal(0.0, sigma, n_signal)
    signal_channels = (rng.random(n_signal) < 0.05).astype(int)
    n_background = 100_000
    background_times = rng.uniform(0.0, 1e-3, n_background)
    background_channels = rng.integers(0, 2, n_background)
    stream = TimeTagStream.from_events(
        np.r_[signal_times, background_times], np.r_[signal_channels, background_channels]
    )

    counts = gate_events(stream, grid, GateConfig(sigma=sigma))
    raw = qber_bayesian(counts.n_signal_correct, counts.n_signal_wrong)
    assert 0.07 < raw < 0.09
    assert qber_background_subtracted(counts) == pytest.approx(0.05, abs=0.01)


def test_bayesian_qber():
    qber = qber_bayesian(199, 13)
    assert qber == pytest.approx(14 / 214)
    assert f"{qber * 100:.2g}" == "6.5"
    assert qber_bayesian(0, 0) == 0.5
    with pytest.raises(InvalidArgumentException):
        qber_bayesian(-1, 0)


@pytest.mark.parametrize("n_corr, n_wrong", [(0, 0), (199, 13), (5, 80), (12.5, 0.25)])
def test_bayesian_qber_is_symmetric_under_channel_swap(n_corr, n_wrong):
    assert qber_bayesian(n_corr, n_wrong) + qber_bayesian(n_wrong, n_corr) == pytest.approx(1.0)


def test_background_subtracted_qber_needs_exterior_span():
    counts = GatedCounts(
        n_signal_correct=10,
        n_signal_wrong=2,
        n_background_exterior=0,
        exterior_span=0.0,
        gate_span=0.0,
    )
    with pytest.raises(InsufficientDataException):
        qber_background_subtracted(counts)


def test_background_subtracted_qber_floors_residuals():
    counts = GatedCounts(
        n_signal_correct=100,
        n_signal_wrong=3,
        n_background_exterior=700,
        exterior_span=0.7,
        gate_span=0.1,
    )
    # 50 background counts expected per channel
    assert qber_background_subtracted(counts) == pytest.approx(qber_bayesian(50, 0))


def test_selection_threshold_is_strict():
    assert not exceeds_background(150, 100.0, n_sigma=5.0)
    assert exceeds_background(151, 100.0, n_sigma=5.0)


def test_load_timetags_reports_bad_channel_line():
    text = "time_s,channel\n1e-9,0\n2e-9,2\n"
    with pytest.raises(ParseException) as e:
        load_timetags(io.StringIO(text))
    assert e.value.line == 3


def test_load_timetags_reports_decreasing_time_line():
    text = "time_s,channel\n1e-9,0\n3e-9,1\n2e-9,0\n"
    with pytest.raises(ParseException) as e:
        load_timetags(io.StringIO(text))
    assert e.value.line == 4


def test_empty_timetag_files_are_empty_streams():
    assert len(load_timetags(io.StringIO(""))) == 0
    assert len(load_timetags(io.StringIO("time_s,channel\n"))) == 0


def test_saved_timetags_reload_bit_identical(tmp_path):
    rng = np.random.default_rng(3)
    stream = TimeTagStream.from_events(rng.uniform(0, 1, 500), rng.integers(0, 2, 500))
    path = tmp_path / "timetags.csv"
    save_timetags(stream, path)
    loaded = load_timetags(path)
    assert np.array_equal(loaded.times, stream.times)
    assert np.array_equal(loaded.channels, stream.channels)


def test_load_epochs_reports_repeated_epoch_line():
    with pytest.raises(ParseException) as e:
        load_epochs(io.StringIO("0.0\n0.1\n0.1\n"))
    assert e.value.line == 3


def test_load_windows_rejects_overlap():
    text = "start_s,end_s,correct_channel\n0.05,0.06,0\n0.055,0.07,1\n"
    with pytest.raises(ParseException) as e:
        load_windows(io.StringIO(text))
    assert e.value.line == 3


@pytest.fixture
def synthetic_pass():
    """
    One second of 100 MHz arrivals with a strong signal in the first half only.
    """
    rng = np.random.default_rng(11)
    grid = expected_arrivals(np.linspace(0.0, 1.0, 11), subdivisions=10_000_000)
    signal_times = rng.integers(0, 50_000_000, 210) * 1e-8
    signal_channels = np.r_[np.zeros(200, dtype=int), np.ones(10, dtype=int)]
    background_times = rng.uniform(0.0, 1.0, 1000)
    background_channels = rng.integers(0, 2, 1000)
    stream = TimeTagStream.from_events(
        np.r_[signal_times, background_times], np.r_[signal_channels, background_channels]
    )
    return stream, grid


def test_analyze_intervals_qualifies_signal_interval(synthetic_pass):
    stream, grid = synthetic_pass
    intervals = analyze_intervals(stream, grid, GateConfig(), interval=0.5)

    assert [s.qualified for s in intervals] == [True, False]
    first = intervals[0]
    assert first.n_corr >= 200
    assert first.n_wrong >= 10
    assert first.duty_cycle == pytest.approx(1.0)
    assert first.qber_raw == pytest.approx(qber_bayesian(first.n_corr, first.n_wrong))
    assert first.qber_bg_subtracted < first.qber_raw
    assert first.return_rate_hz > 0


def test_summary_pools_only_qualified_intervals(synthetic_pass):
    stream, grid = synthetic_pass
    intervals = analyze_intervals(stream, grid, GateConfig(), interval=0.5)
    summary = summarize(intervals)

    assert summary.n_intervals == 2
    assert summary.n_qualified == 1
    assert summary.selected_qualified
    assert (summary.n_corr, summary.n_wrong) == (intervals[0].n_corr, intervals[0].n_wrong)
    assert summary.qber == pytest.approx(qber_bayesian(summary.n_corr, summary.n_wrong))
    assert summary.return_rate_hz == pytest.approx(intervals[0].return_rate_hz)


def test_summary_without_qualified_intervals_pools_everything(synthetic_pass):
    stream, grid = synthetic_pass
    intervals = analyze_intervals(stream, grid, GateConfig(), interval=0.5, n_sigma=1e6)
    summary = summarize(intervals)

    assert summary.n_qualified == 0
    assert not summary.selected_qualified
    assert summary.n_corr == sum(s.n_corr for s in intervals)


def test_receive_windows_set_duty_cycle_and_correct_channel(synthetic_pass):
    stream, grid = synthetic_pass
    windows = ReceiveWindows([0.0, 0.5], [0.25, 0.75], [0, 1])
    intervals = analyze_intervals(stream, grid, GateConfig(), interval=0.5, windows=windows)

    assert [s.counts.correct_channel for s in intervals] == [0, 1]
    assert [s.duty_cycle for s in intervals] == pytest.approx([0.5, 0.5])
    assert sum(s.counts.total for s in intervals) == len(stream.within(windows.bounds))


def test_interval_tables(synthetic_pass):
    stream, grid = synthetic_pass
    intervals = analyze_intervals(stream, grid, GateConfig(), interval=0.5)

    frame = intervals_to_frame(intervals)
    assert list(frame.columns) == INTERVAL_COLUMNS
    assert frame["qualified"].tolist() == [True, False]

    histograms = interval_histograms(stream, grid, interval=0.5)
    assert list(histograms.columns) == ["interval", "t_start_s", "offset_ns", "count_ch0", "count_ch1"]
    assert set(histograms["interval"]) == {0, 1}


def test_select_intervals_keeps_only_qualified(synthetic_pass):
    stream, grid = synthetic_pass
    selected = select_intervals(stream, grid, GateConfig(), interval=0.5)

    assert [s.index for s in selected] == [0]
    assert selected[0].t_start == pytest.approx(0.0)
    assert select_intervals(stream, grid, GateConfig(), interval=0.5, n_sigma=1e6) == []
