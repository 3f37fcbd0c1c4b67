import math

import pytest

from qsatlink.config import Settings, load_session_config
from qsatlink.exceptions import CatalogEntryNotFoundException, ConfigException, ParseException
from qsatlink.polarization import H, L, V, parse_basis


def _edit(path, old: str, new: str):
    text = path.read_text()
    assert old in text
    path.write_text(text.replace(old, new, 1))


def test_bundled_example_loads(example_config):
    config, two_way = load_session_config(example_config)

    assert config.satellite.name == "Larets"
    assert config.rng_seed == 20160126
    assert config.mu_sat == pytest.approx(3.4)
    assert config.station_azimuth == pytest.approx(math.radians(35.0))
    assert config.session_duration == pytest.approx(40.0)
    assert config.pass_geometry.duration == pytest.approx(40.0)
    assert config.detector_jitter == pytest.approx(0.5e-9)
    assert config.gate.sigma == pytest.approx(0.5e-9)
    assert config.schedule.shutter_overhead == pytest.approx(4.5e-3)
    assert config.link.gain_t == pytest.approx(1.1e9)
    assert config.subdivisions == 10_000_000

    assert [s.name for s in config.state_schedule] == ["H", "V", "L", "R"]
    assert config.state_schedule[0].prepared_state == H
    assert config.state_schedule[1].prepared_state == V
    assert config.state_schedule[2].prepared_state == L
    assert config.state_schedule[2].analyzer_basis == parse_basis("LR")

    assert two_way is not None
    assert two_way.n_slots == 400
    assert two_way.fr_angle_alphabet[1] == pytest.approx(math.pi / 8)


def test_seed_from_environment_overrides_the_file(monkeypatch, example_config):
    monkeypatch.setenv("QSATLINK_SEED", "7")
    config, _ = load_session_config(example_config)
    assert config.rng_seed == 7


def test_explicit_seed_has_priority_over_environment(monkeypatch, example_config):
    monkeypatch.setenv("QSATLINK_SEED", "7")
    config, _ = load_session_config(example_config, Settings(seed=11))
    assert config.rng_seed == 11


@pytest.mark.parametrize("value", ["seven", "-1"])
def test_invalid_seed_in_environment(monkeypatch, value):
    monkeypatch.setenv("QSATLINK_SEED", value)
    with pytest.raises(ConfigException) as e:
        Settings()
    assert e.value.field == "QSATLINK_SEED"


def test_workers_from_environment(monkeypatch, example_config):
    monkeypatch.setenv("QSATLINK_WORKERS", "3")
    config, _ = load_session_config(example_config)
    assert config.workers == 3

    monkeypatch.setenv("QSATLINK_WORKERS", "0")
    with pytest.raises(ConfigException):
        Settings()


def test_debug_flag_from_environment(monkeypatch):
    assert not Settings().debug
    monkeypatch.setenv("QSATLINK_DEBUG", "true")
    assert Settings().debug
    assert not Settings(debug=False).debug


def test_catalog_from_environment(monkeypatch, tmp_path, example_config):
    catalog = tmp_path / "catalog.toml"
    catalog.write_text(
        '[[satellite]]\nname = "Westpac"\naltitude_m = 800e3\ncross_section_m2 = 1e5\n'
        "rho = 1.0\na_eff_m2 = 1e-3\npolarization_preserving = true\n"
    )
    monkeypatch.setenv("QSATLINK_CATALOG", str(catalog))
    with pytest.raises(CatalogEntryNotFoundException, match="Larets"):
        load_session_config(example_config)

    _edit(example_config, 'satellite = "Larets"', 'satellite = "Westpac"')
    config, _ = load_session_config(example_config)
    assert config.satellite.altitude == pytest.approx(800e3)


def test_missing_satellite_entry(example_config):
    _edit(example_config, 'satellite = "Larets"', 'satellite = "Lageos"')
    with pytest.raises(CatalogEntryNotFoundException, match="Lageos"):
        load_session_config(example_config)


def test_missing_required_field_is_named(example_config):
    _edit(example_config, 'satellite = "Larets"\n', "")
    with pytest.raises(ConfigException) as e:
        load_session_config(example_config)
    assert e.value.field == "session.satellite"


def test_invalid_efficiency_names_its_field(example_config):
    _edit(example_config, "eta_det = 0.1", "eta_det = 1.5")
    with pytest.raises(ConfigException) as e:
        load_session_config(example_config)
    assert e.value.field == "link.eta_det"


def test_wrong_type_names_its_field(example_config):
    _edit(example_config, "mu_sat = 3.4", 'mu_sat = "high"')
    with pytest.raises(ConfigException) as e:
        load_session_config(example_config)
    assert e.value.field == "session.mu_sat"


def test_bad_state_names_its_segment(example_config):
    _edit(example_config, 'state = "V"', 'state = "0.6,0.9i"')
    with pytest.raises(ConfigException) as e:
        load_session_config(example_config)
    assert e.value.field == "states[1].state"


def test_gain_and_divergence_are_exclusive(example_config):
    _edit(example_config, "gain_t = 1.1e9", "gain_t = 1.1e9\ndivergence_urad = 85.0")
    with pytest.raises(ConfigException) as e:
        load_session_config(example_config)
    assert e.value.field == "link"


def test_downlink_without_mu_sat_is_rejected(example_config):
    _edit(example_config, "mu_sat = 3.4\n", "")
    with pytest.raises(ConfigException) as e:
        load_session_config(example_config)
    assert e.value.field == "session"


def test_radar_model_does_not_need_mu_sat(example_config):
    _edit(example_config, "mu_sat = 3.4\n", "")
    _edit(example_config, 'channel_model = "downlink"', 'channel_model = "radar"')
    config, _ = load_session_config(example_config)
    assert config.mu_sat is None


def test_invalid_toml_reports_its_line(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text('[session]\nsatellite = "Larets"\nseed = \n')
    with pytest.raises(ParseException) as e:
        load_session_config(path)
    assert e.value.line == 3


def test_pass_file_is_resolved_next_to_the_config(example_config):
    pass_csv = example_config.parent / "pass.csv"
    pass_csv.write_text(
        "time_s,slant_range_m,elevation_deg\n"
        + "".join(f"{t},{1.3e6 - 1000 * t},{25 + 0.1 * t}\n" for t in range(41))
    )
    _edit(
        example_config,
        "max_elevation_deg = 30.0\nduration_s = 40.0\nsample_period_s = 1.0\n",
        'file = "pass.csv"\n',
    )
    config, _ = load_session_config(example_config)
    assert len(config.pass_geometry) == 41
    assert config.pass_geometry.slant_ranges[0] == pytest.approx(1.3e6)


def test_config_without_two_way_table(example_config):
    text = example_config.read_text()
    example_config.write_text(text[: text.index("[two_way]")])
    _, two_way = load_session_config(example_config)
    assert two_way is None
