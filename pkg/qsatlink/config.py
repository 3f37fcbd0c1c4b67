import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import attrs

from qsatlink.consts import DETECTOR_JITTER, PULSE_RATE, SLOT_PERIOD
from qsatlink.exceptions import (
    ConfigException,
    InvalidArgumentException,
    OutOfModelException,
    format_missing_field_error,
)
from qsatlink.linkbudget import (
    LinkBudgetParams,
    SatelliteCatalog,
    SatelliteSpec,
    divergence_for_gain,
    mu_tx_from_power,
    transmitter_gain,
)
from qsatlink.orbitpass import PassGeometry, circular_pass, load_pass
from qsatlink.polarization import parse_basis, parse_state
from qsatlink.protocol import (
    SessionConfig,
    StateSegment,
    TwoWaySessionConfig,
)
from qsatlink.timing import GateConfig, SlotSchedule
from qsatlink.toml import load_toml

logger = logging.getLogger(__name__)

"""
Link parameters of the ranging station used when a session config leaves them out.
"""
DEFAULT_LINK: Dict[str, float] = {
    "power_w": 0.110,
    "wavelength_nm": 532.0,
    "eta_tx": 0.1,
    "eta_rx": 0.13,
    "eta_det": 0.1,
    "telescope_area_m2": 1.73,
    "t_zenith": 0.87,
    "gain_t": 1.1e9,
}

# Config key of each link parameter whose name differs
_LINK_KEYS = {"telescope_area": "telescope_area_m2"}


class Settings:
    """
    Process-wide settings read from the environment.

    Explicit arguments take precedence over the `QSATLINK_*` environment variables.
    """

    @staticmethod
    def _seed() -> Optional[int]:
        value = os.getenv("QSATLINK_SEED")
        if value is None or value.strip() == "":
            return None
        try:
            seed = int(value)
        except ValueError:
            raise ConfigException(
                f"QSATLINK_SEED must be a non-negative integer, got '{value}'",
                field="QSATLINK_SEED",
            ) from None
        if seed < 0:
            raise ConfigException(
                f"QSATLINK_SEED must be a non-negative integer, got '{value}'",
                field="QSATLINK_SEED",
            )
        return seed

    @staticmethod
    def _debug() -> bool:
        return os.getenv("QSATLINK_DEBUG", "false").lower() == "true"

    @staticmethod
    def _catalog() -> Optional[str]:
        return os.getenv("QSATLINK_CATALOG")

    @staticmethod
    def _workers() -> Optional[int]:
        value = os.getenv("QSATLINK_WORKERS")
        if value is None or value.strip() == "":
            return None
        try:
            workers = int(value)
        except ValueError:
            workers = 0
        if workers < 1:
            raise ConfigException(
                f"QSATLINK_WORKERS must be a positive integer, got '{value}'",
                field="QSATLINK_WORKERS",
            )
        return workers

    def __init__(
        self,
        seed: Optional[int] = None,
        debug: Optional[bool] = None,
        catalog: Optional[Union[str, Path]] = None,
        workers: Optional[int] = None,
    ):
        self.seed = seed if seed is not None else Settings._seed()
        self.debug = debug if debug is not None else Settings._debug()
        self.catalog = catalog or Settings._catalog()
        self.workers = workers if workers is not None else Settings._workers()

    def load_catalog(self) -> SatelliteCatalog:
        return SatelliteCatalog.load(self.catalog)


def build_link_params(
    satellite: SatelliteSpec,
    power_w: float = DEFAULT_LINK["power_w"],
    wavelength_nm: float = DEFAULT_LINK["wavelength_nm"],
    pulse_rate: float = PULSE_RATE,
    eta_tx: float = DEFAULT_LINK["eta_tx"],
    eta_rx: float = DEFAULT_LINK["eta_rx"],
    eta_det: float = DEFAULT_LINK["eta_det"],
    telescope_area_m2: float = DEFAULT_LINK["telescope_area_m2"],
    t_zenith: float = DEFAULT_LINK["t_zenith"],
    gain_t: Optional[float] = None,
    divergence_urad: Optional[float] = None,
    pointing_error_urad: float = 0.0,
) -> LinkBudgetParams:
    """
    Link-budget template of a station and satellite in human-facing units.

    The transmitter gain is taken from `gain_t`, or computed from the divergence and
    pointing error; without either the station default gain is used. The geometry
    fields hold the zenith pass and are replaced wherever the link is evaluated.

    :param power_w: Average qubit beam power in W
    :param wavelength_nm: Qubit wavelength in nm
    :param divergence_urad: Beam divergence in **microradians**
    :param pointing_error_urad: Pointing error in **microradians**
    """
    if gain_t is not None and divergence_urad is not None:
        raise InvalidArgumentException("give either gain_t or divergence_urad, not both")
    if divergence_urad is not None:
        gain = transmitter_gain(divergence_urad * 1e-6, pointing_error_urad * 1e-6)
    elif gain_t is not None:
        gain = gain_t
    else:
        gain = DEFAULT_LINK["gain_t"]
    logger.debug(
        f"Transmitter gain {gain:.3g} (divergence {divergence_for_gain(gain) * 1e6:.1f} urad at zero pointing error)"
    )
    return LinkBudgetParams(
        mu_tx=mu_tx_from_power(power_w, pulse_rate, wavelength_nm * 1e-9),
        eta_tx=eta_tx,
        gain_t=gain,
        cross_section=satellite.cross_section,
        slant_range=satellite.altitude,
        t_zenith=t_zenith,
        airmass=1.0,
        telescope_area=telescope_area_m2,
        eta_rx=eta_rx,
        eta_det=eta_det,
        ccr_reflectivity=satellite.ccr_reflectivity,
        ccr_effective_area=satellite.ccr_effective_area,
    )


class _Section:
    """
    One table of a session config, tracking the dotted path of every key for error messages.
    """

    def __init__(self, name: str, values: Any):
        if values is None:
            values = {}
        if not isinstance(values, Mapping):
            raise ConfigException(f"'{name}' must be a table", field=name)
        self.name = name
        self.values = dict(values)

    def path(self, key: str) -> str:
        return f"{self.name}.{key}"

    def number(self, key: str, default: Optional[float] = None, required: bool = False) -> Optional[float]:
        if key not in self.values:
            if required:
                raise format_missing_field_error(self.path(key))
            return default
        value = self.values[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigException(
                f"'{self.path(key)}' must be a finite number, got {value!r}", field=self.path(key)
            )
        return float(value)

    def integer(self, key: str, default: Optional[int] = None) -> Optional[int]:
        if key not in self.values:
            return default
        value = self.values[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigException(
                f"'{self.path(key)}' must be an integer, got {value!r}", field=self.path(key)
            )
        return value

    def text(self, key: str, default: Optional[str] = None, required: bool = False) -> Optional[str]:
        if key not in self.values:
            if required:
                raise format_missing_field_error(self.path(key))
            return default
        value = self.values[key]
        if not isinstance(value, str):
            raise ConfigException(
                f"'{self.path(key)}' must be a string, got {value!r}", field=self.path(key)
            )
        return value

    def flag(self, key: str, default: bool) -> bool:
        value = self.values.get(key, default)
        if not isinstance(value, bool):
            raise ConfigException(
                f"'{self.path(key)}' must be true or false, got {value!r}", field=self.path(key)
            )
        return value

    def window(self, key: str, default: Tuple[float, float]) -> Tuple[float, float]:
        if key not in self.values:
            return default
        value = self.values[key]
        if (
            not isinstance(value, list)
            or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        ):
            raise ConfigException(
                f"'{self.path(key)}' must be a pair of numbers [start, end]", field=self.path(key)
            )
        return float(value[0]), float(value[1])

    def numbers(self, key: str) -> Optional[List[float]]:
        if key not in self.values:
            return None
        value = self.values[key]
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigException(
                f"'{self.path(key)}' must be a list of numbers", field=self.path(key)
            )
        return [float(v) for v in value]


def _as_config_error(field: str, e: Exception) -> ConfigException:
    return ConfigException(f"Invalid '{field}': {e}", field=field)


def _load_pass(section: _Section, satellite: SatelliteSpec, base_dir: Path) -> PassGeometry:
    file = section.text("file")
    if file is not None:
        path = Path(file)
        if not path.is_absolute():
            path = base_dir / path
        return load_pass(path)

    altitude_km = section.number("altitude_km", default=satellite.altitude / 1e3)
    max_elevation = section.number("max_elevation_deg", required=True)
    try:
        return circular_pass(
            altitude=altitude_km * 1e3,
            max_elevation=math.radians(max_elevation),
            sample_period=section.number("sample_period_s", default=1.0),
            duration=section.number("duration_s"),
            name=f"{satellite.name} {max_elevation:g} deg",
        )
    except (InvalidArgumentException, OutOfModelException) as e:
        raise _as_config_error(section.name, e) from e


def _load_link(section: _Section, satellite: SatelliteSpec) -> Tuple[LinkBudgetParams, float]:
    pulse_rate = section.number("pulse_rate_hz", default=PULSE_RATE)
    try:
        params = build_link_params(
            satellite,
            power_w=section.number("power_w", default=DEFAULT_LINK["power_w"]),
            wavelength_nm=section.number("wavelength_nm", default=DEFAULT_LINK["wavelength_nm"]),
            pulse_rate=pulse_rate,
            eta_tx=section.number("eta_tx", default=DEFAULT_LINK["eta_tx"]),
            eta_rx=section.number("eta_rx", default=DEFAULT_LINK["eta_rx"]),
            eta_det=section.number("eta_det", default=DEFAULT_LINK["eta_det"]),
            telescope_area_m2=section.number(
                "telescope_area_m2", default=DEFAULT_LINK["telescope_area_m2"]
            ),
            t_zenith=section.number("t_zenith", default=DEFAULT_LINK["t_zenith"]),
            gain_t=section.number("gain_t"),
            divergence_urad=section.number("divergence_urad"),
            pointing_error_urad=section.number("pointing_error_urad", default=0.0),
        )
    except InvalidArgumentException as e:
        # attrs validators name the offending attribute first
        key = str(e).split(" ", 1)[0]
        field = section.path(_LINK_KEYS.get(key, key)) if key in attrs.fields_dict(LinkBudgetParams) else section.name
        raise _as_config_error(field, e) from e
    return params, pulse_rate


def _load_schedule(section: _Section) -> SlotSchedule:
    period = section.number("slot_period_s", default=SLOT_PERIOD)
    try:
        return SlotSchedule(
            slot_period=period,
            tx_window=section.window("tx_window_s", (0.0, period / 2)),
            rx_window=section.window("rx_window_s", (period / 2, period)),
            shutter_open_delay=section.number("shutter_open_delay_ms", default=2.0) * 1e-3,
            shutter_close_delay=section.number("shutter_close_delay_ms", default=2.5) * 1e-3,
        )
    except InvalidArgumentException as e:
        raise _as_config_error(section.name, e) from e


def _load_gate(section: _Section, jitter: float) -> GateConfig:
    try:
        return GateConfig(
            sigma=section.number("sigma_ns", default=jitter * 1e9) * 1e-9,
            signal_halfwidth=section.number("signal_halfwidth", default=1.0),
            background_exclusion=section.number("background_exclusion", default=3.0),
        )
    except InvalidArgumentException as e:
        raise _as_config_error(section.name, e) from e


def _load_states(records: Any) -> List[StateSegment]:
    if not isinstance(records, list) or not records:
        raise ConfigException("at least one [[states]] table is required", field="states")
    segments = []
    for index, record in enumerate(records):
        section = _Section(f"states[{index}]", record)
        state_spec = section.text("state", required=True)
        basis_spec = section.text("basis")
        try:
            state = parse_state(state_spec)
        except InvalidArgumentException as e:
            raise _as_config_error(section.path("state"), e) from e
        try:
            basis = parse_basis(basis_spec) if basis_spec is not None else None
        except InvalidArgumentException as e:
            raise _as_config_error(section.path("basis"), e) from e
        try:
            segments.append(
                StateSegment(
                    duration=section.number("duration_s", required=True),
                    prepared_state=state,
                    analyzer_basis=basis,
                    label=state_spec.strip(),
                )
            )
        except InvalidArgumentException as e:
            raise _as_config_error(section.path("duration_s"), e) from e
    return segments


def _load_two_way(section: _Section) -> TwoWaySessionConfig:
    alphabet = section.numbers("alphabet_deg")
    kwargs: Dict[str, Any] = {
        "attenuation_to_single_photon": section.number("attenuation"),
        "n_slots": section.integer("slots"),
        "intensity_monitor": section.flag("intensity_monitor", True),
    }
    if alphabet is not None:
        kwargs["fr_angle_alphabet"] = [math.radians(a) for a in alphabet]
    try:
        return TwoWaySessionConfig(**kwargs)
    except InvalidArgumentException as e:
        raise _as_config_error(section.name, e) from e


def load_session_config(
    path: Union[str, Path], settings: Optional[Settings] = None
) -> Tuple[SessionConfig, Optional[TwoWaySessionConfig]]:
    """
    Read a TOML session config.

    Angles are given in degrees, durations in seconds unless the key says otherwise,
    the detector jitter in ns. A pass `file` is resolved relative to the config.
    `QSATLINK_SEED` (or `settings.seed`) overrides the seed of the file.

    :param path: Session config path
    :param settings: Environment settings, read from the environment by default

    :return: Session config and the two-way session config when a [two_way] table is present

    :raises ParseException: If the file is not valid TOML
    :raises ConfigException: If a value is missing or invalid, naming its dotted field
    """
    settings = settings or Settings()
    path = Path(path)
    data = load_toml(path)

    session = _Section("session", data.get("session"))
    satellite_name = session.text("satellite", required=True)
    catalog = settings.load_catalog()
    satellite = catalog[satellite_name]

    geometry = _load_pass(_Section("pass", data.get("pass")), satellite, path.parent)
    link, pulse_rate = _load_link(_Section("link", data.get("link")), satellite)
    schedule = _load_schedule(_Section("schedule", data.get("schedule")))
    jitter = session.number("detector_jitter_ns", default=DETECTOR_JITTER * 1e9) * 1e-9
    gate = _load_gate(_Section("gate", data.get("gate")), jitter)
    states = _load_states(data.get("states"))

    seed = session.integer("seed", default=0)
    if settings.seed is not None:
        logger.debug(f"Seed {settings.seed} from the environment overrides {seed}")
        seed = settings.seed
    workers = settings.workers or session.integer("workers", default=1)

    basis_spec = session.text("analyzer_basis", default="HV")
    try:
        analyzer_basis = parse_basis(basis_spec)
    except InvalidArgumentException as e:
        raise _as_config_error(session.path("analyzer_basis"), e) from e

    kwargs: Dict[str, Any] = {
        "satellite": satellite,
        "pass_geometry": geometry,
        "link": link,
        "state_schedule": states,
        "schedule": schedule,
        "gate": gate,
        "analyzer_basis": analyzer_basis,
        "background_rate": session.number("background_rate_hz", default=0.0),
        "rng_seed": seed,
        "mu_sat": session.number("mu_sat"),
        "channel_model": session.text("channel_model", default="downlink"),
        "pulse_rate": pulse_rate,
        "station_azimuth": math.radians(session.number("station_azimuth_deg", default=0.0)),
        "fr_angle": math.radians(session.number("fr_angle_deg", default=0.0)),
        "detector_jitter": jitter,
        "interval": session.number("interval_s", default=5.0),
        "workers": workers,
    }
    tagger_ps = session.number("tagger_resolution_ps")
    if tagger_ps is not None:
        kwargs["tagger_resolution"] = tagger_ps * 1e-12
    bin_ps = session.number("histogram_bin_ps")
    if bin_ps is not None:
        kwargs["histogram_bin_width"] = bin_ps * 1e-12

    try:
        config = SessionConfig(**kwargs)
    except InvalidArgumentException as e:
        raise _as_config_error("session", e) from e

    two_way = None
    if "two_way" in data:
        two_way = _load_two_way(_Section("two_way", data["two_way"]))

    logger.info(
        f"Loaded session config {path.name}: {satellite.name}, {len(states)} state segments "
        f"over {config.session_duration:g} s, seed {seed}"
    )
    return config, two_way
