"""Exception types raised by nmqsl."""


class NmqslError(Exception):
    """Base class for all library errors."""


class ConfigError(NmqslError, ValueError):
    """Invalid run configuration."""


class InvalidState(NmqslError, ValueError):
    """Matrix is not a valid qubit density matrix."""


class NotHermitian(NmqslError, ValueError):
    pass


class ZeroBlochVector(NmqslError, ValueError):
    pass


class NumericalError(NmqslError, ArithmeticError):
    """Failure of a numerical procedure; the CLI maps these to exit code 3."""


class PositivityLoss(NumericalError):
    pass


class RatePole(NumericalError):
    pass


class TrackingLost(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class PopulationUnderflow(NumericalError):
    pass


class LogDomain(NumericalError):
    pass


class ZeroSpeed(NumericalError):
    pass
