import argparse
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd
from rich.table import Table
from rich.text import Text

from qsatlink.config import DEFAULT_LINK, Settings, build_link_params, load_session_config
from qsatlink.consts import (
    DETECTOR_JITTER,
    PULSE_RATE,
    SLOT_PERIOD,
    TAGGER_RESOLUTION,
)
from qsatlink.exceptions import (
    InvalidArgumentException,
    OutOfModelException,
    QSatLinkException,
)
from qsatlink.linkbudget import link_rows
from qsatlink.logger import configure_logging, console, levels, print_error, print_warning
from qsatlink.orbitpass import circular_pass, save_pass
from qsatlink.polarization import (
    TelescopePose,
    detection_probability,
    expected_received_state,
    parse_state,
    round_trip,
)
from qsatlink.protocol import (
    save_report,
    save_two_way,
    simulate_pass,
    summary_rows,
    two_way_session,
)
from qsatlink.tabular import write_report
from qsatlink.timing import (
    GateConfig,
    analyze_intervals,
    expected_arrivals,
    interval_histograms,
    intervals_to_frame,
    load_epochs,
    load_timetags,
    load_windows,
    pulses_per_slot,
    save_epochs,
    save_timetags,
    save_windows,
    summarize,
)
from qsatlink.timing.analysis import DEFAULT_INTERVAL, DEFAULT_SELECTION_SIGMA

from .output import check_outputs, write_atomic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

"""
Fidelity above which polcheck accepts the received state.
"""
POLCHECK_TOLERANCE = 1e-9


def format_percent(value: float) -> str:
    """
    Percentage with two significant digits, e.g. 0.0654 -> "6.5%".
    """
    if math.isnan(value):
        return "nan"
    return f"{value * 100:.2g}%"


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def _verdict_text(ok: bool) -> Text:
    _, style = levels["info"] if ok else levels["error"]
    return Text("PASS" if ok else "FAIL", style=style)


def _warn_if_unqualified(summary) -> None:
    if summary.n_intervals and not summary.selected_qualified:
        print_warning("No interval rose above the background; QBER pooled over every interval")


def _print_session_summary(report) -> None:
    table = Table(title=f"{report.satellite} pass, seed {report.seed}", show_header=False)
    table.add_column("quantity")
    table.add_column("value", justify="right")
    for _, row in summary_rows(report).iterrows():
        table.add_row(str(row["name"]), _format_value(row["value"]))
    console.print(table)
    _warn_if_unqualified(report.summary)

    verdict = report.verdict
    mu_note = " (upper bound)" if report.mu_sat_upper_bound else ""
    console.print(f"QBER: {format_percent(report.qber)}")
    console.print(f"Return rate: {report.return_rate_hz:.4g} Hz in window")
    console.print(f"mu_sat: {report.mu_sat_estimate:.3g}{mu_note}")
    console.print(
        Text.assemble(
            "Verdict: ",
            _verdict_text(verdict.overall),
            f" (QBER < {format_percent(verdict.qber_threshold)}: ",
            _verdict_text(verdict.qber_ok),
            f", mu_sat <= {verdict.mu_threshold:g}: ",
            _verdict_text(verdict.mu_ok),
            ")",
        )
    )


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    config, two_way = load_session_config(args.config, settings)
    out = Path(args.out)
    names = ["report.csv", "timetags.csv", "histogram.csv", "epochs.csv", "windows.csv"]
    if args.two_way:
        if two_way is None:
            raise InvalidArgumentException(f"{args.config} has no [two_way] table")
        names.append("two_way.csv")
    check_outputs([out / name for name in names], args.force)

    report, stream = simulate_pass(config)
    grid = expected_arrivals(report.epochs, config.subdivisions)
    histogram = interval_histograms(
        stream, grid, config.interval, report.windows, config.histogram_bin_width
    )

    write_atomic(out / "report.csv", lambda f: save_report(report, f))
    write_atomic(out / "timetags.csv", lambda f: save_timetags(stream, f))
    write_atomic(out / "histogram.csv", lambda f: write_report(histogram, f))
    write_atomic(out / "epochs.csv", lambda f: save_epochs(report.epochs, f))
    write_atomic(out / "windows.csv", lambda f: save_windows(report.windows, f))

    _print_session_summary(report)

    if args.two_way:
        result = two_way_session(two_way, config)
        write_atomic(out / "two_way.csv", lambda f: save_two_way(result, f))
        monitor = "on" if result.intensity_monitor else "off"
        console.print(
            f"Two-way: {result.n_sifted} sifted bits from {result.n_rounds} rounds, "
            f"QBER {format_percent(result.qber)}, attenuation {result.attenuation_factor:.3g}, "
            f"intensity monitor {monitor}"
        )
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, settings: Settings) -> int:
    out = Path(args.out)
    check_outputs([out / "analysis.csv", out / "histogram.csv"], args.force)

    stream = load_timetags(args.timetags, args.resolution_ps * 1e-12)
    epochs = load_epochs(args.epochs)
    windows = load_windows(args.windows) if args.windows else None

    grid = expected_arrivals(epochs, pulses_per_slot(args.pulse_rate_hz, args.slot_period_s))
    gate = GateConfig(
        sigma=args.sigma_ns * 1e-9,
        signal_halfwidth=args.signal_halfwidth,
        background_exclusion=args.background_exclusion,
    )
    stats = analyze_intervals(
        stream,
        grid,
        gate,
        args.interval_s,
        windows,
        correct_channel=args.correct_channel,
        n_sigma=args.n_sigma,
    )
    histogram = interval_histograms(stream, grid, args.interval_s, windows, args.bin_ps * 1e-12)

    write_atomic(out / "analysis.csv", lambda f: write_report(intervals_to_frame(stats), f))
    write_atomic(out / "histogram.csv", lambda f: write_report(histogram, f))

    summary = summarize(stats)
    console.print(
        f"{len(stream)} events, {summary.n_qualified}/{summary.n_intervals} intervals qualified"
    )
    _warn_if_unqualified(summary)
    console.print(f"QBER: {format_percent(summary.qber)}")
    console.print(f"Return rate: {summary.return_rate_hz:.4g} Hz in window")
    return EXIT_OK


def _link_from_args(args: argparse.Namespace, satellite):
    return build_link_params(
        satellite,
        power_w=args.power_w,
        wavelength_nm=args.wavelength_nm,
        pulse_rate=args.pulse_rate_hz,
        eta_tx=args.eta_tx,
        eta_rx=args.eta_rx,
        eta_det=args.eta_det,
        telescope_area_m2=args.telescope_area_m2,
        t_zenith=args.t_zenith,
        gain_t=args.gain_t,
        divergence_urad=args.divergence_urad,
        pointing_error_urad=args.pointing_error_urad,
    )


def cmd_linkbudget(args: argparse.Namespace, settings: Settings) -> int:
    out = Path(args.out)
    check_outputs([out], args.force)

    satellite = settings.load_catalog()[args.satellite]
    altitude = args.altitude_km * 1e3 if args.altitude_km is not None else satellite.altitude
    geometry = circular_pass(
        altitude=altitude,
        max_elevation=math.radians(args.max_elevation_deg),
        sample_period=args.sample_period_s,
        duration=args.duration_s,
        horizon=0.0,
        name=satellite.name,
    )
    params = _link_from_args(args, satellite)
    rows, dropped = link_rows(
        params, geometry.elevations, geometry.slant_ranges, args.pulse_rate_hz, args.mu_sat
    )
    if not rows:
        raise OutOfModelException("every sample of the pass lies below the elevation floor")

    frame = pd.DataFrame([asdict(row) for row in rows])
    write_atomic(out, lambda f: write_report(frame, f))

    peak = max(rows, key=lambda row: row.elevation_deg)
    if dropped:
        console.print(f"{dropped} samples below the elevation floor omitted")
    console.print(
        f"{satellite.name} at culmination ({peak.elevation_deg:.1f} deg, "
        f"{peak.slant_range_m / 1e3:.1f} km): transmissivity {peak.transmissivity:.3g} "
        f"({peak.transmissivity_db:.1f} dB), mu_rx {peak.mu_rx:.3g}, "
        f"expected rate {peak.expected_rate_hz:.4g} Hz"
    )
    return EXIT_OK


def cmd_polcheck(args: argparse.Namespace, settings: Settings) -> int:
    psi = parse_state(args.state)
    pose = TelescopePose.from_degrees(args.azimuth_deg, args.elevation_deg)
    fr_angle = math.radians(args.fr_deg)

    received = round_trip(pose, fr_angle, psi)
    expected = expected_received_state(fr_angle, psi)
    fidelity = detection_probability(received, expected)

    console.print(f"input:    {psi}")
    console.print(f"received: {received}")
    console.print(f"expected: {expected}")
    console.print(f"fidelity: {fidelity:.12f}")
    return EXIT_OK if fidelity >= 1.0 - POLCHECK_TOLERANCE else EXIT_RUNTIME


def cmd_pass_gen(args: argparse.Namespace, settings: Settings) -> int:
    out = Path(args.out)
    check_outputs([out], args.force)
    geometry = circular_pass(
        altitude=args.altitude_km * 1e3,
        max_elevation=math.radians(args.max_elevation_deg),
        sample_period=args.sample_period_s,
        duration=args.duration_s,
        name=out.stem,
    )
    write_atomic(out, lambda f: save_pass(geometry, f))
    console.print(
        f"{len(geometry)} samples over {geometry.duration:g} s, "
        f"minimum range {np.min(geometry.slant_ranges) / 1e3:.1f} km"
    )
    return EXIT_OK


def _add_output(parser: argparse.ArgumentParser, help: str) -> None:
    parser.add_argument("--out", required=True, help=help)
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")


def _add_link_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("link")
    group.add_argument("--power-w", type=float, default=DEFAULT_LINK["power_w"])
    group.add_argument("--wavelength-nm", type=float, default=DEFAULT_LINK["wavelength_nm"])
    group.add_argument("--pulse-rate-hz", type=float, default=PULSE_RATE)
    group.add_argument("--eta-tx", type=float, default=DEFAULT_LINK["eta_tx"])
    group.add_argument("--eta-rx", type=float, default=DEFAULT_LINK["eta_rx"])
    group.add_argument("--eta-det", type=float, default=DEFAULT_LINK["eta_det"])
    group.add_argument("--telescope-area-m2", type=float, default=DEFAULT_LINK["telescope_area_m2"])
    group.add_argument("--t-zenith", type=float, default=DEFAULT_LINK["t_zenith"])
    gain = group.add_mutually_exclusive_group()
    gain.add_argument("--gain-t", type=float, default=None, help="transmitter gain")
    gain.add_argument("--divergence-urad", type=float, default=None, help="beam divergence")
    group.add_argument("--pointing-error-urad", type=float, default=0.0)
    group.add_argument(
        "--mu-sat",
        type=float,
        default=None,
        help="mean photons per pulse leaving the satellite; without it mu_rx uses the radar equation",
    )


def _add_pass_options(parser: argparse.ArgumentParser, altitude_required: bool) -> None:
    group = parser.add_argument_group("pass")
    group.add_argument(
        "--altitude-km",
        type=float,
        required=altitude_required,
        default=None,
        help="orbit altitude" + ("" if altitude_required else ", defaults to the catalog value"),
    )
    group.add_argument("--max-elevation-deg", type=float, required=True)
    group.add_argument("--sample-period-s", type=float, default=1.0)
    group.add_argument(
        "--duration-s", type=float, default=None, help="pass length, defaults to horizon to horizon"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsatlink",
        description="Retroreflector satellite QKD link simulator and time-tag analyzer.",
    )
    parser.add_argument("--debug", action="store_true", help="log per-slot detail")
    parser.add_argument("--catalog", default=None, help="satellite catalog, overrides QSATLINK_CATALOG")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate and analyze a QKD pass")
    s.add_argument("config", help="session config (TOML)")
    s.add_argument("--seed", type=int, default=None, help="overrides the config seed and QSATLINK_SEED")
    s.add_argument("--workers", type=int, default=None, help="slot simulation threads")
    s.add_argument("--two-way", action="store_true", help="also run the [two_way] key session")
    _add_output(s, "output directory")
    s.set_defaults(handler=cmd_simulate)

    a = sub.add_parser("analyze", help="analyze a time-tag file against SLR epochs")
    a.add_argument("--timetags", required=True, help="CSV with time_s,channel")
    a.add_argument("--epochs", required=True, help="one SLR detection epoch in s per line")
    a.add_argument("--windows", default=None, help="CSV with start_s,end_s,correct_channel")
    a.add_argument("--sigma-ns", type=float, default=DETECTOR_JITTER * 1e9)
    a.add_argument("--signal-halfwidth", type=float, default=1.0, help="gate half-width in sigma")
    a.add_argument(
        "--background-exclusion", type=float, default=3.0, help="background exclusion in sigma"
    )
    a.add_argument("--interval-s", type=float, default=DEFAULT_INTERVAL)
    a.add_argument("--n-sigma", type=float, default=DEFAULT_SELECTION_SIGMA)
    a.add_argument("--correct-channel", type=int, choices=(0, 1), default=0)
    a.add_argument("--pulse-rate-hz", type=float, default=PULSE_RATE)
    a.add_argument("--slot-period-s", type=float, default=SLOT_PERIOD)
    a.add_argument("--resolution-ps", type=float, default=TAGGER_RESOLUTION * 1e12)
    a.add_argument("--bin-ps", type=float, default=100.0, help="histogram bin width")
    _add_output(a, "output directory")
    a.set_defaults(handler=cmd_analyze)

    lb = sub.add_parser("linkbudget", help="link budget along a synthetic pass")
    lb.add_argument("--satellite", required=True)
    _add_pass_options(lb, altitude_required=False)
    _add_link_options(lb)
    _add_output(lb, "output CSV")
    lb.set_defaults(handler=cmd_linkbudget)

    p = sub.add_parser("polcheck", help="check the round-trip polarization compensation")
    p.add_argument("--state", required=True, help='H, V, L, R, D, A or amplitudes "a,b"')
    p.add_argument("--fr-deg", type=float, default=0.0, help="Faraday rotation angle")
    p.add_argument("--azimuth-deg", type=float, default=0.0)
    p.add_argument("--elevation-deg", type=float, default=45.0)
    p.set_defaults(handler=cmd_polcheck)

    g = sub.add_parser("pass-gen", help="generate a circular-orbit pass CSV")
    _add_pass_options(g, altitude_required=True)
    _add_output(g, "output CSV")
    g.set_defaults(handler=cmd_pass_gen)

    return parser


def _settings(args: argparse.Namespace) -> Settings:
    return Settings(
        seed=getattr(args, "seed", None),
        debug=True if args.debug else None,
        catalog=args.catalog,
        workers=getattr(args, "workers", None),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    :return: 0 on success, 2 for invalid input or arguments, 1 for runtime failures
    """
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace, Settings], int] = args.handler
    try:
        settings = _settings(args)
        configure_logging(settings.debug)
        return handler(args, settings)
    except (InvalidArgumentException, OutOfModelException) as e:
        print_error(str(e))
        return EXIT_USAGE
    except FileNotFoundError as e:
        print_error(f"No such file: {e.filename}")
        return EXIT_USAGE
    except QSatLinkException as e:
        print_error(str(e))
        return EXIT_RUNTIME
    except Exception as e:
        logger.debug("Unexpected failure", exc_info=True)
        print_error(f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME


def run() -> None:
    sys.exit(main())
