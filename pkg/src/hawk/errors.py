"""Exception taxonomy shared by all hawk modules."""


class HawkError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(HawkError):
    """Invalid geometric object (zero radius, empty input, non-unit normal)."""


class PrecisionError(HawkError):
    """A decision stayed UNKNOWN after escalating to the maximum precision."""


class MoveRejected(HawkError):
    """A proposed move violates a game rule; `clause` names the violated one."""

    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        self.detail = detail
        super().__init__(f"{clause}" + (f": {detail}" if detail else ""))


class OutOfTurnError(HawkError):
    """Move submitted by the player whose turn it is not."""


class StrategyError(HawkError):
    """A strategy produced an illegal move or hit an internal contradiction."""


class ConfigError(HawkError):
    """Match or tournament configuration is invalid."""


class TraceError(HawkError):
    """Trace file is unreadable or inconsistent with replay."""


class CalibrationError(HawkError):
    """Calibration cannot run (e.g. empty grid)."""
