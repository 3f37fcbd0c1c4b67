import logging
from importlib import resources
from pathlib import Path
from typing import Dict, Iterator, Mapping, Optional, Union

from qsatlink.exceptions import (
    CatalogEntryNotFoundException,
    InvalidArgumentException,
    ParseException,
)
from qsatlink.linkbudget.types import SatelliteSpec
from qsatlink.toml import load_toml

logger = logging.getLogger(__name__)


def default_catalog_path() -> Path:
    """
    Path of the catalog bundled with the package.
    """
    return Path(str(resources.files("qsatlink") / "data" / "catalog.toml"))


class SatelliteCatalog(Mapping[str, SatelliteSpec]):
    """
    Satellites keyed by name. Lookups are case-insensitive.
    """

    def __init__(self, satellites: Dict[str, SatelliteSpec], path: Optional[str] = None):
        self._satellites = {name.lower(): spec for name, spec in satellites.items()}
        self.path = path

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> "SatelliteCatalog":
        """
        Load a catalog file with one `[[satellite]]` table per record.

        :param path: Catalog path, defaults to the bundled catalog
        """
        path = Path(path) if path is not None else default_catalog_path()
        data = load_toml(path)
        records = data.get("satellite")
        if not isinstance(records, list):
            raise ParseException(
                f"{path}: expected [[satellite]] tables", path=str(path)
            )

        satellites: Dict[str, SatelliteSpec] = {}
        for index, record in enumerate(records):
            try:
                spec = SatelliteSpec.from_dict(record)
            except InvalidArgumentException as e:
                raise ParseException(
                    f"{path}: satellite record #{index + 1}: {e}", path=str(path)
                ) from e
            satellites[spec.name] = spec

        logger.debug(f"Loaded {len(satellites)} satellites from {path}")
        return cls(satellites, path=str(path))

    def __getitem__(self, name: str) -> SatelliteSpec:
        try:
            return self._satellites[name.lower()]
        except KeyError:
            raise CatalogEntryNotFoundException(
                f"Satellite '{name}' not found in catalog {self.path or '<memory>'}",
                field="session.satellite",
            ) from None

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and name.lower() in self._satellites

    def get(self, name: str, default=None):  # type: ignore[override]
        return self[name] if name in self else default

    def __iter__(self) -> Iterator[str]:
        return iter(spec.name for spec in self._satellites.values())

    def __len__(self) -> int:
        return len(self._satellites)
