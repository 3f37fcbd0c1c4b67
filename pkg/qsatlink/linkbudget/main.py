import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from scipy.optimize import brentq

from qsatlink.consts import ELEVATION_FLOOR, PLANCK, SPEED_OF_LIGHT
from qsatlink.exceptions import InvalidArgumentException, OutOfModelException
from qsatlink.linkbudget.types import LinkBudgetParams

logger = logging.getLogger(__name__)


def _require_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise InvalidArgumentException(f"{name} must be positive and finite, got {value}")


def to_db(transmissivity: float) -> float:
    """
    Attenuation in dB of a linear transmissivity, -10 log10(T).
    """
    _require_positive("transmissivity", transmissivity)
    return -10.0 * math.log10(transmissivity)


def transmitter_gain(divergence: float, pointing_error: float) -> float:
    """
    Effective gain of the upgoing Gaussian beam, G_t = (8/theta_t^2) exp(-2 (theta/theta_t)^2).

    :param divergence: Beam divergence theta_t in **radians**, turbulence broadening included
    :param pointing_error: Pointing error theta in **radians**

    :return: Dimensionless gain
    """
    if not (math.isfinite(divergence) and divergence > 0):
        raise InvalidArgumentException(f"divergence must be positive, got {divergence}")
    if not (math.isfinite(pointing_error) and pointing_error >= 0):
        raise InvalidArgumentException(
            f"pointing_error must be non-negative, got {pointing_error}"
        )
    return 8.0 / divergence**2 * math.exp(-2.0 * (pointing_error / divergence) ** 2)


def divergence_for_gain(gain: float, pointing_error: float = 0.0) -> float:
    """
    Beam divergence that yields the given effective gain.

    With zero pointing error this is sqrt(8/G); otherwise the narrower of the two
    solutions is returned (the gain peaks at theta_t = 2 theta).
    """
    _require_positive("gain", gain)
    if pointing_error == 0.0:
        return math.sqrt(8.0 / gain)

    peak = 2.0 * pointing_error
    if transmitter_gain(peak, pointing_error) < gain:
        raise InvalidArgumentException(
            f"gain {gain:g} unreachable with pointing error {pointing_error:g} rad"
        )
    return brentq(
        lambda theta_t: transmitter_gain(theta_t, pointing_error) - gain,
        pointing_error * 1e-3,
        peak,
    )


def airmass_from_elevation(elevation: float) -> float:
    """
    Plane-parallel air mass 1/sin(el).

    :param elevation: Elevation in **radians**

    :raises OutOfModelException: Below the 5 degree floor, where the plane-parallel model fails
    """
    if not math.isfinite(elevation) or elevation > math.pi / 2 + 1e-12:
        raise InvalidArgumentException(f"elevation {elevation} rad outside [0, pi/2]")
    if elevation <= ELEVATION_FLOOR:
        raise OutOfModelException(
            f"elevation {math.degrees(elevation):.3f} deg is below the "
            f"{math.degrees(ELEVATION_FLOOR):.0f} deg air-mass floor"
        )
    return 1.0 / math.sin(min(elevation, math.pi / 2))


def atmospheric_transmissivity(airmass: float, t_zenith: float) -> float:
    """
    One-way atmospheric transmissivity t_zenith ** airmass; the absorbance is linear in the air mass.
    """
    if not (math.isfinite(airmass) and airmass >= 1):
        raise InvalidArgumentException(f"airmass must be >= 1, got {airmass}")
    if not 0 < t_zenith <= 1:
        raise InvalidArgumentException(f"t_zenith must be in (0, 1], got {t_zenith}")
    return t_zenith**airmass


def _spreading(slant_range: float) -> float:
    return 1.0 / (4.0 * math.pi * slant_range**2)


def radar_mu_rx(p: LinkBudgetParams) -> float:
    """
    Detected photons per pulse predicted by the two-way radar equation.

    mu_rx = mu_tx eta_tx G_t Sigma (1/4 pi R^2)^2 T_a^2 A_t eta_rx eta_det
    """
    t_a = atmospheric_transmissivity(p.airmass, p.t_zenith)
    return (
        p.mu_tx
        * p.eta_tx
        * p.gain_t
        * p.cross_section
        * _spreading(p.slant_range) ** 2
        * t_a**2
        * p.telescope_area
        * p.eta_rx
        * p.eta_det
    )


def uplink_factor(p: LinkBudgetParams) -> float:
    """
    Mean photons per pulse leaving the satellite, mu_tx eta_tx G_t rho A_eff (1/4 pi R^2) T_a.
    """
    t_a = atmospheric_transmissivity(p.airmass, p.t_zenith)
    return (
        p.mu_tx
        * p.eta_tx
        * p.gain_t
        * p.ccr_reflectivity
        * p.ccr_effective_area
        * _spreading(p.slant_range)
        * t_a
    )


def downlink_transmissivity(p: LinkBudgetParams) -> float:
    """
    Quantum channel transmission mu_rx/mu_sat from the satellite to the detectors.

    (Sigma / rho A_eff) (1/4 pi R^2) T_a A_t eta_rx eta_det
    """
    t_a = atmospheric_transmissivity(p.airmass, p.t_zenith)
    return (
        p.cross_section
        / (p.ccr_reflectivity * p.ccr_effective_area)
        * _spreading(p.slant_range)
        * t_a
        * p.telescope_area
        * p.eta_rx
        * p.eta_det
    )


def estimate_mu_sat(
    detected_rate_in_window: float, pulse_rate: float, p: LinkBudgetParams
) -> float:
    """
    Mean photons per pulse leaving the satellite, inferred from a detection rate.

    :param detected_rate_in_window: Detection rate in Hz while the receive window is open
        (already corrected for the duty cycle)
    :param pulse_rate: Qubit repetition rate in Hz
    :param p: Link parameters at the geometry of the measurement

    :return: Estimated mu_sat. With rho = 1 this is an upper bound.
    """
    if not (math.isfinite(detected_rate_in_window) and detected_rate_in_window >= 0):
        raise InvalidArgumentException(
            f"detected rate must be non-negative, got {detected_rate_in_window}"
        )
    _require_positive("pulse_rate", pulse_rate)
    transmissivity = downlink_transmissivity(p)
    if transmissivity <= 0:
        raise InvalidArgumentException("downlink transmissivity is zero")
    return detected_rate_in_window / pulse_rate / transmissivity


def mu_tx_from_power(average_power: float, pulse_rate: float, wavelength: float) -> float:
    """
    Mean photons per pulse of a pulsed source.

    :param average_power: Average optical power in W
    :param pulse_rate: Repetition rate in Hz
    :param wavelength: Wavelength in m
    """
    if not (math.isfinite(average_power) and average_power >= 0):
        raise InvalidArgumentException(
            f"average_power must be non-negative, got {average_power}"
        )
    _require_positive("pulse_rate", pulse_rate)
    _require_positive("wavelength", wavelength)
    photon_energy = PLANCK * SPEED_OF_LIGHT / wavelength
    return average_power / pulse_rate / photon_energy


@dataclass(frozen=True)
class LinkRow:
    """
    Link budget at one sample of a pass.
    """

    elevation_deg: float
    slant_range_m: float
    airmass: float
    t_a: float
    transmissivity: float
    transmissivity_db: float
    mu_rx: float
    expected_rate_hz: float


def link_row(
    p: LinkBudgetParams,
    elevation: float,
    slant_range: float,
    pulse_rate: float,
    mu_sat: Optional[float] = None,
) -> LinkRow:
    """
    Link budget at a single geometry.

    mu_rx comes from the downlink factor when mu_sat is given, otherwise from the full radar equation.
    """
    airmass = airmass_from_elevation(elevation)
    at = p.with_geometry(slant_range, airmass)
    transmissivity = downlink_transmissivity(at)
    mu_rx = mu_sat * transmissivity if mu_sat is not None else radar_mu_rx(at)
    return LinkRow(
        elevation_deg=math.degrees(elevation),
        slant_range_m=slant_range,
        airmass=airmass,
        t_a=atmospheric_transmissivity(airmass, p.t_zenith),
        transmissivity=transmissivity,
        transmissivity_db=to_db(transmissivity),
        mu_rx=mu_rx,
        expected_rate_hz=mu_rx * pulse_rate,
    )


def link_rows(
    p: LinkBudgetParams,
    elevations,
    slant_ranges,
    pulse_rate: float,
    mu_sat: Optional[float] = None,
) -> Tuple[List[LinkRow], int]:
    """
    Link budget along a pass.

    :return: Rows for the samples above the elevation floor, and the number of samples dropped
    """
    rows: List[LinkRow] = []
    dropped = 0
    for elevation, slant_range in zip(elevations, slant_ranges):
        try:
            rows.append(link_row(p, float(elevation), float(slant_range), pulse_rate, mu_sat))
        except OutOfModelException:
            dropped += 1
    if dropped:
        logger.warning(f"Dropped {dropped} samples below the elevation floor")
    return rows, dropped
