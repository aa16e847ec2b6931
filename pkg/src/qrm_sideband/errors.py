"""Exception hierarchy shared by all modules."""


class SidebandError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SidebandError, ValueError):
    """Invalid user-supplied parameters or configuration."""


class TruncationError(ConfigError):
    pass


class LabelingConflictError(SidebandError):
    """Two dressed eigenvectors claim the same bare product state."""

    def __init__(self, bare_label, indices):
        self.bare_label = bare_label
        self.indices = tuple(indices)
        super().__init__(
            f"eigenvectors {self.indices} both map to bare state {bare_label}"
        )


class DegenerateSystemError(SidebandError):
    pass


class ResonantDriveError(SidebandError):
    pass


class DivergenceError(SidebandError):
    """Fixed-point iteration failed to converge."""

    def __init__(self, message, history):
        self.history = list(history)
        super().__init__(f"{message} (last iterates: {self.history[-5:]})")


class StaleMatchingError(SidebandError):
    pass


class OutOfDomainError(SidebandError, ValueError):
    pass


class StepSizeError(SidebandError):
    pass


class NoOscillationError(SidebandError):
    pass


class PoorFitError(SidebandError):
    def __init__(self, message, diagnostics):
        self.diagnostics = dict(diagnostics)
        super().__init__(f"{message}: {self.diagnostics}")


class WindowTooNarrowError(SidebandError):
    pass


class NoTransitionFoundError(SidebandError):
    pass
