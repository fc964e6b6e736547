"""Exception hierarchy shared by all qqueue modules."""


class QQueueError(Exception):
    """Base class for every error raised by qqueue."""


class InvalidDimsError(QQueueError, ValueError):
    """Dimensions of matrices, subsystems or registers are inconsistent."""


class InvalidStateError(QQueueError, ValueError):
    """A matrix fails the density-matrix invariants."""


class InvalidChannelError(QQueueError, ValueError):
    """Kraus operators violate the completeness relation."""


class CapabilityError(QQueueError):
    """Requested computation exceeds the dense-materialization gate."""


class NumericalError(QQueueError, ArithmeticError):
    """An eigensolver failed or a numerical consistency check tripped."""


class ConfigError(QQueueError, ValueError):
    """Experiment configuration could not be parsed or validated."""
