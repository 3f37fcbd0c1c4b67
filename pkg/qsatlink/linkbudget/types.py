from collections.abc import Mapping
from typing import Any, Optional, TypeVar

import attrs
from attrs import define as _attrs_define
from attrs import field as _attrs_field

from qsatlink.exceptions import InvalidArgumentException

T = TypeVar("T", bound="SatelliteSpec")

LEO_MIN_ALTITUDE = 200e3
LEO_MAX_ALTITUDE = 2000e3


def _positive(instance, attribute, value):
    if not value > 0:
        raise InvalidArgumentException(f"{attribute.name} must be positive, got {value}")


def _efficiency(instance, attribute, value):
    if not 0 < value <= 1:
        raise InvalidArgumentException(f"{attribute.name} must be in (0, 1], got {value}")


def _airmass(instance, attribute, value):
    if not value >= 1:
        raise InvalidArgumentException(f"airmass must be >= 1, got {value}")


def _leo_altitude(instance, attribute, value):
    if not LEO_MIN_ALTITUDE < value < LEO_MAX_ALTITUDE:
        raise InvalidArgumentException(
            f"altitude {value} m outside the LEO range (200 km, 2000 km)"
        )


@_attrs_define(frozen=True)
class LinkBudgetParams:
    """Every symbol of the two-way radar equation and of its downlink factor.

    Attributes:
        mu_tx (float): Mean photons per pulse leaving the source
        eta_tx (float): Transmitter optical efficiency
        gain_t (float): Effective transmitter gain
        cross_section (float): Satellite optical cross-section Sigma in m^2
        slant_range (float): Station-satellite distance R in m
        t_zenith (float): Atmospheric transmissivity at zenith
        airmass (float): Air mass of the line of sight
        telescope_area (float): Receiving telescope area A_t in m^2
        eta_rx (float): Receiver optical efficiency
        eta_det (float): Detector efficiency
        ccr_reflectivity (float): CCR reflectivity rho
        ccr_effective_area (float): Effective retroreflective area A_eff in m^2
    """

    mu_tx: float = _attrs_field(validator=_positive)
    eta_tx: float = _attrs_field(validator=_efficiency)
    gain_t: float = _attrs_field(validator=_positive)
    cross_section: float = _attrs_field(validator=_positive)
    slant_range: float = _attrs_field(validator=_positive)
    t_zenith: float = _attrs_field(validator=_efficiency)
    airmass: float = _attrs_field(validator=_airmass)
    telescope_area: float = _attrs_field(validator=_positive)
    eta_rx: float = _attrs_field(validator=_efficiency)
    eta_det: float = _attrs_field(validator=_efficiency)
    ccr_reflectivity: float = _attrs_field(validator=_efficiency)
    ccr_effective_area: float = _attrs_field(validator=_positive)

    def with_geometry(self, slant_range: float, airmass: float) -> "LinkBudgetParams":
        """
        Copy of the parameters at another point of the pass.
        """
        return attrs.evolve(self, slant_range=slant_range, airmass=airmass)

    def with_satellite(self, satellite: "SatelliteSpec") -> "LinkBudgetParams":
        return attrs.evolve(
            self,
            cross_section=satellite.cross_section,
            ccr_reflectivity=satellite.ccr_reflectivity,
            ccr_effective_area=satellite.ccr_effective_area,
        )

    def to_dict(self) -> dict[str, Any]:
        return attrs.asdict(self)


@_attrs_define(frozen=True)
class SatelliteSpec:
    """Retroreflector satellite as listed in the catalog.

    Attributes:
        name (str): Satellite name
        altitude (float): Orbit altitude in m
        cross_section (float): Optical cross-section Sigma in m^2
        ccr_reflectivity (float): CCR reflectivity rho (1 for metallic CCRs, an upper bound)
        ccr_effective_area (float): Effective retroreflective area A_eff in m^2
        polarization_preserving (bool): Whether the CCR coating preserves polarization
        notes (Optional[str]): Source of the values
    """

    name: str
    altitude: float = _attrs_field(validator=_leo_altitude)
    cross_section: float = _attrs_field(validator=_positive)
    ccr_reflectivity: float = _attrs_field(validator=_efficiency)
    ccr_effective_area: float = _attrs_field(validator=_positive)
    polarization_preserving: bool = True
    notes: Optional[str] = None

    @property
    def downlink_gain(self) -> float:
        """
        G_down = Sigma / (rho A_eff).
        """
        return self.cross_section / (self.ccr_reflectivity * self.ccr_effective_area)

    def to_dict(self) -> dict[str, Any]:
        field_dict: dict[str, Any] = {
            "name": self.name,
            "altitude_m": self.altitude,
            "cross_section_m2": self.cross_section,
            "rho": self.ccr_reflectivity,
            "a_eff_m2": self.ccr_effective_area,
            "polarization_preserving": self.polarization_preserving,
        }
        if self.notes is not None:
            field_dict["notes"] = self.notes
        return field_dict

    @classmethod
    def from_dict(cls: type[T], src_dict: Mapping[str, Any]) -> T:
        d = dict(src_dict)
        try:
            return cls(
                name=str(d.pop("name")),
                altitude=float(d.pop("altitude_m")),
                cross_section=float(d.pop("cross_section_m2")),
                ccr_reflectivity=float(d.pop("rho")),
                ccr_effective_area=float(d.pop("a_eff_m2")),
                polarization_preserving=bool(d.pop("polarization_preserving", True)),
                notes=d.pop("notes", None),
            )
        except KeyError as e:
            raise InvalidArgumentException(f"Satellite record is missing {e}") from e
        except (TypeError, ValueError) as e:
            raise InvalidArgumentException(f"Malformed satellite record: {e}") from e
