"""Exception types shared across the package."""
from __future__ import annotations


class ArtifactError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ArtifactError):
    """Malformed input text."""


class ModelError(ArtifactError):
    """Input parses but violates a modelling assumption (self-loop, duplicate edge, disconnected)."""


class DegenerateError(ArtifactError):
    """Two source vertices share one host point."""


class ContractError(ArtifactError):
    """An embedding that was required to be non-contracting is not."""


class SizeError(ArtifactError):
    """Input exceeds the hard size cap of a brute-force routine."""


class MismatchError(ArtifactError):
    """An embedding file does not match the graph it is checked against."""


class ParamError(ArtifactError):
    """Invalid generator parameters."""


class BudgetError(ArtifactError):
    """A search exceeded its state budget; this is not a negative answer."""

    def __init__(self, message: str, where: str = "") -> None:
        super().__init__(message if not where else f"{message} (at {where})")
        self.where = where


class Budget:
    """A shared countdown of search states; raises BudgetError when exhausted."""

    def __init__(self, cap: int) -> None:
        self.cap = cap
        self.used = 0

    def spend(self, amount: int = 1, where: str = "") -> None:
        self.used += amount
        if self.used > self.cap:
            raise BudgetError(f"state budget of {self.cap} exceeded", where)
