class TdsePinnError(Exception):
    """Base class for package errors."""


class ConfigError(TdsePinnError, ValueError):
    """Invalid configuration, shape or arity mismatch."""


class NumericalError(TdsePinnError, ArithmeticError):
    """Non-finite intermediate or failed solve."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class CheckpointError(TdsePinnError):
    """Unreadable or inconsistent checkpoint file."""


class TrainingDiverged(NumericalError):
    """Loss became non-finite during training."""

    def __init__(self, step, lr, components):
        parts = ", ".join(f"{k}={v!r}" for k, v in components.items())
        super().__init__(f"non-finite loss at step {step} (lr={lr:.3e}): {parts}")
        self.step = step
        self.lr = lr
        self.components = components
