"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Scenario configuration is malformed or inconsistent."""


class NumericalError(RuntimeError):
    """A numerical operation failed (singular or ill-conditioned system).

    `condition_number`, when available, carries the offending estimate so the
    failure is diagnosable instead of silent.
    """

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class DegenerateSceneError(NumericalError):
    """The scene makes the parameters unidentifiable (e.g. coincident targets)."""
