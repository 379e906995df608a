"""Exception types raised across the package."""


class PermCorrError(ValueError):
    """Base class for all package errors."""


class DimensionError(PermCorrError):
    """Matrix or vector sizes do not agree."""


class SymmetryError(PermCorrError):
    """Entries violate the declared symmetry class or hollow flag."""


class DegenerateError(PermCorrError):
    """A normalizer or variance is zero, so standardization is undefined."""


class EnumerationCapError(PermCorrError):
    """Full enumeration requested above the configured size cap."""


class InputFormatError(PermCorrError):
    """A CSV input could not be parsed."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
