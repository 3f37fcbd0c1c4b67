import shutil
from pathlib import Path

import pytest

import qsatlink

BUNDLED_EXAMPLE = Path(qsatlink.__file__).parent / "data" / "larets_example.toml"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("QSATLINK_SEED", "QSATLINK_DEBUG", "QSATLINK_CATALOG", "QSATLINK_WORKERS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def example_config(tmp_path) -> Path:
    path = tmp_path / "larets_example.toml"
    shutil.copyfile(BUNDLED_EXAMPLE, path)
    return path
