"""Exception hierarchy shared across the package."""


class BrtSchedError(Exception):
    pass


class ValidationError(BrtSchedError, ValueError):
    """Invalid scenario data. ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class OutOfRangeError(BrtSchedError, ValueError):
    pass


class InfeasibleDisturbanceError(BrtSchedError):
    """Alighting demand exceeds the passengers on board."""


class CapacityError(BrtSchedError):
    pass


class QueueError(BrtSchedError):
    pass


class InfeasibleControlError(BrtSchedError):
    pass


class ConfigurationError(BrtSchedError, ValueError):
    pass


class OracleTooLargeError(BrtSchedError):
    pass


class EpisodeInvariantError(BrtSchedError):
    def __init__(self, step: int, message: str, seed=None):
        self.step = step
        self.seed = seed
        where = f"k={step}" if seed is None else f"seed={seed} k={step}"
        super().__init__(f"invariant violated at {where}: {message}")


class ResultIOError(BrtSchedError, OSError):
    pass
