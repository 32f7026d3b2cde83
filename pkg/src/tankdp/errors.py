"""Exception hierarchy shared by the solver, the models and the CLI."""


class TankDpError(Exception):
    """Base class for all library errors."""


class ConfigError(TankDpError):
    """Invalid configuration, missing input file, or inconsistent run setup."""


class InfeasibleError(TankDpError):
    """A control or production is not admissible at the current state."""

    def __init__(self, message, stage=None):
        if stage is not None:
            message = f"stage {stage}: {message}"
        super().__init__(message)
        self.stage = stage


class NumericError(TankDpError):
    """Root finding failed or the model data is numerically inconsistent."""
