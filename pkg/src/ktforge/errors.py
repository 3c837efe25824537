"""Exception types shared across the package."""


class KtforgeError(Exception):
    """Base class for all structured errors raised by ktforge."""


class UnknownGeneratorError(KtforgeError):
    def __init__(self, gid):
        super().__init__(f"unknown generator id {gid!r}")
        self.gid = gid


class DegreeMismatchError(KtforgeError):
    pass


class NotACycleError(KtforgeError):
    """An element required to be a cycle has a nonzero differential."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ChainConditionError(KtforgeError):
    """A would-be chain map fails d_B q = q d; carries the residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class WindowClosureError(KtforgeError):
    """The differential leaves the truncation window; carries a witness monomial."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CapOverflowError(KtforgeError):
    """A total derivative would exceed the jet-order cap."""


class InvariantViolationError(KtforgeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(KtforgeError):
    """Configuration or expression problem, with position when known."""

    def __init__(self, message, line=None, col=None):
        if line is not None:
            message = f"line {line}" + (f", col {col}" if col is not None else "") + f": {message}"
        super().__init__(message)
        self.line = line
        self.col = col
