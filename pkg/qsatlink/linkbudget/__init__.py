"""
Radar-equation link budget and inversion to the mean photon number at the satellite.
"""

from .catalog import SatelliteCatalog, default_catalog_path
from .main import (
    LinkRow,
    airmass_from_elevation,
    atmospheric_transmissivity,
    divergence_for_gain,
    downlink_transmissivity,
    estimate_mu_sat,
    link_row,
    link_rows,
    mu_tx_from_power,
    radar_mu_rx,
    to_db,
    transmitter_gain,
    uplink_factor,
)
from .types import LinkBudgetParams, SatelliteSpec

__all__ = [
    "LinkBudgetParams",
    "LinkRow",
    "SatelliteCatalog",
    "SatelliteSpec",
    "airmass_from_elevation",
    "atmospheric_transmissivity",
    "default_catalog_path",
    "divergence_for_gain",
    "downlink_transmissivity",
    "estimate_mu_sat",
    "link_row",
    "link_rows",
    "mu_tx_from_power",
    "radar_mu_rx",
    "to_db",
    "transmitter_gain",
    "uplink_factor",
]
