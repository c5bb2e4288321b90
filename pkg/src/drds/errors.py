"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from drds.conic.types import SolveStatus


class DrdsError(Exception):
    """Base class for errors raised by drds."""


class ScenarioError(DrdsError, ValueError):
    """Invalid scenario input, tagged with the offending field path."""

    def __init__(self, field_path: str, message: str) -> None:
        super().__init__(f"{field_path}: {message}" if field_path else message)
        self.field_path = field_path
        self.reason = message


class SteeringError(DrdsError):
    """A steering program could not be solved; *stage* names where it failed."""

    def __init__(self, stage: str, status: SolveStatus, message: str = "") -> None:
        detail = f" ({message})" if message else ""
        super().__init__(f"{stage}: {status.value}{detail}")
        self.stage = stage
        self.status = status


class BackendError(DrdsError):
    """A solver backend broke down or is unavailable."""
