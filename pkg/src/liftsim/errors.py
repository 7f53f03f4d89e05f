"""Exception types shared across the library."""


class LiftsimError(Exception):
    """Base class for all library errors."""


class DomainError(LiftsimError):
    """Mismatched or invalid domains (e.g. comparing distributions over different supports)."""


class NullEventError(LiftsimError):
    """Conditioning on an event of probability zero."""


class BudgetError(LiftsimError):
    """An exhaustive enumeration was refused because it exceeds a configured budget."""

    def __init__(self, what: str, size, limit):
        super().__init__(f"{what}: size {size} exceeds budget {limit}")
        self.what = what
        self.size = size
        self.limit = limit


class InvariantError(LiftsimError):
    """An internal invariant that is a theorem was violated; indicates a bug or bad input."""
