"""Exception types shared across the package."""


class NetsiegeError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(NetsiegeError, ValueError):
    """A configuration value is out of range or internally inconsistent."""


class InvalidTargetError(NetsiegeError, ValueError):
    """An action names a node that does not exist or is not reachable."""


class ContractViolation(NetsiegeError, RuntimeError):
    """An operation was called outside its documented precondition."""


class CheckpointError(NetsiegeError, ValueError):
    """A checkpoint file is malformed or does not match the architecture."""


class TrainingAborted(NetsiegeError, RuntimeError):
    """Training hit a non-finite loss or gradient and stopped.

    Carries a diagnostic dict (epoch, agent, loss value) for post-mortems.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
