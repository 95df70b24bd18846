"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A parameter violates an operation's precondition."""


class InvalidData(ValueError):
    """Sampled or loaded data is unusable (non-finite values, bad layout)."""


class BlowUpError(RuntimeError):
    """The evolved state left the finite / guarded regime."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time
