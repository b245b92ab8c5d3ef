"""Exception types shared across the package.

Exit-code mapping used by the CLI: InvalidArgumentError -> 2,
InputIncompleteError / DegenerateFamilyError / MapFormatError /
IntegrityError -> 3, OSError -> 4.
"""


class SaifError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(SaifError, ValueError):
    """A caller-supplied value violates an operation's precondition."""


class DegenerateFamilyError(SaifError):
    """Every candidate box of a prompt family was rejected."""


class InputIncompleteError(SaifError):
    """Required cached inputs are missing; carries the missing items."""

    def __init__(self, message: str, missing: list | None = None):
        super().__init__(message)
        self.missing = missing or []


class MapFormatError(SaifError):
    """A map/mask/manifest file is malformed; names the offending field."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field


class IntegrityError(SaifError):
    """Stored checksum does not match the referenced file."""
