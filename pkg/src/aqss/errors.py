"""Exception types shared across the package."""


class AQSSError(Exception):
    """Base class for domain errors raised by this package."""


class ParseError(AQSSError, ValueError):
    """Malformed access-structure text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class StructureError(AQSSError, ValueError):
    """An access structure or plan violates a precondition."""


class CapacityError(AQSSError, MemoryError):
    """A register or instance exceeds the configured size cap."""


class UnauthorizedError(AQSSError):
    """A coalition tried to reconstruct without satisfying the plan."""

    def __init__(self, coalition, message: str | None = None):
        self.coalition = frozenset(coalition)
        super().__init__(message or f"coalition {sorted(self.coalition)} is not authorized")


class AuthorizedError(AQSSError):
    """Leakage was requested for a coalition that can reconstruct."""
