"""Exception hierarchy shared by all modules.

Every error carries a CLI exit status so the front end can map failures
without inspecting messages.
"""
from __future__ import annotations


class EntSwitchError(Exception):
    """Base class; ``exit_code`` follows the CLI contract."""

    exit_code = 1


class InvalidParams(EntSwitchError, ValueError):
    exit_code = 2


class UnstableRegime(InvalidParams):
    """Raised when a steady-state quantity is requested for k <= n."""


class NotInS(InvalidParams):
    pass


class NotInterior(InvalidParams):
    pass


class NotInEj(InvalidParams):
    pass


class UnreachableTarget(InvalidParams):
    pass


class IndexOutOfRange(InvalidParams):
    pass


class AllZero(InvalidParams):
    pass


class DegreeTooHigh(InvalidParams):
    pass


class DivergentRegime(InvalidParams):
    pass


class RecursionDomain(InvalidParams):
    pass


class ConfigInvalid(InvalidParams):
    pass


class NotCritical(InvalidParams):
    pass


class CapTooSmall(InvalidParams):
    pass


class TailBoundViolated(EntSwitchError):
    exit_code = 3


class NoConvergence(EntSwitchError):
    exit_code = 3


class CertificationFailed(EntSwitchError):
    """Negative-drift certificate could not be established.

    ``stratum`` is ``0`` for the interior set and ``j`` for the boundary
    stratum whose coefficient was not strictly negative.
    """

    exit_code = 3

    def __init__(self, message: str, stratum: int | None = None, coefficient: float | None = None):
        super().__init__(message)
        self.stratum = stratum
        self.coefficient = coefficient
