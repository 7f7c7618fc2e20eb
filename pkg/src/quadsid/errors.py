"""Exception hierarchy shared by all quadsid modules."""


class QuadsidError(Exception):
    """Base class for every error raised by the toolkit."""


class ConfigError(QuadsidError, ValueError):
    """Malformed or unknown configuration entry."""


class LogFormatError(QuadsidError, ValueError):
    """Flight log or matrix file does not follow its schema."""


class InvalidParams(QuadsidError, ValueError):
    pass


class GimbalLock(QuadsidError, ArithmeticError):
    """Pitch too close to +-90 deg for the Euler-rate map."""

    def __init__(self, theta, step=None):
        self.theta = theta
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"gimbal lock: |theta| = {abs(theta):.9g} rad{where}")


class NumericalDivergence(QuadsidError, ArithmeticError):
    def __init__(self, message="state magnitude exceeded 1e9", step=None):
        self.step = step
        if step is not None:
            message = f"{message} at step {step}"
        super().__init__(message)


class NumericalBreakdown(QuadsidError, ArithmeticError):
    pass


class TooFewSamples(QuadsidError, ValueError):
    pass


class InsufficientExcitation(QuadsidError, ValueError):
    pass


class RankDeficientInputs(QuadsidError, ValueError):
    pass


class OrderTooLarge(QuadsidError, ValueError):
    pass


class DegenerateReference(QuadsidError, ValueError):
    pass


class NoConvergence(QuadsidError, ArithmeticError):
    pass


class NotStabilizable(QuadsidError, ArithmeticError):
    pass


class SingularClosedLoop(QuadsidError, ArithmeticError):
    pass


class InvalidThrust(QuadsidError, ValueError):
    pass
