from typing import Optional


def format_parse_error(path: str, line: int, message: str) -> "ParseException":
    return ParseException(f"{path}:{line}: {message}", path=path, line=line)


def format_missing_field_error(field: str) -> "ConfigException":
    return ConfigException(
        f"Missing required field '{field}' in session config", field=field
    )


class QSatLinkException(Exception):
    """
    Base class for all qsatlink errors.

    Raised when a general simulation or analysis error occurs.
    """

    pass


class InvalidArgumentException(QSatLinkException):
    """
    Raised when an invalid argument is provided.
    """

    pass


class OutOfModelException(QSatLinkException):
    """
    Raised when an input lies outside the validity range of the physical model,
    e.g. an elevation below the air-mass floor or a round trip time longer than the slot.
    """

    pass


class InsufficientDataException(QSatLinkException):
    """
    Raised when an analysis step has no data to work on (no qualified intervals,
    no exterior background span).
    """

    pass


class ParseException(InvalidArgumentException):
    """
    Raised when an input file is malformed.

    The `path` and `line` attributes point at the offending row (1-based, header included).
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.path = path
        self.line = line


class ConfigException(InvalidArgumentException):
    """
    Raised when a session config is invalid.

    The `field` attribute holds the dotted path of the offending key, e.g. `link.eta_det`.
    """

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class CatalogEntryNotFoundException(ConfigException):
    """
    Raised when a satellite is not present in the catalog.
    """

    pass


class OutputExistsException(InvalidArgumentException):
    """
    Raised when an output file already exists and overwriting was not requested.
    """

    pass
