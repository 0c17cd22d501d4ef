"""Exception hierarchy shared by all modules."""


class IskfError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(IskfError, ValueError):
    pass


class InvalidParameter(IskfError, ValueError):
    pass


class EmptyInput(IskfError, ValueError):
    pass


class ConfigError(IskfError, ValueError):
    """Experiment configuration failed validation.

    Attributes:
        path: dotted location of the offending field, or "" for the root.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalError(IskfError, ArithmeticError):
    """Parent of the failures that come from the linear algebra, not the inputs."""


class SingularMeasurementNoise(NumericalError):
    pass


class SingularInnovationCovariance(NumericalError):
    pass


class SingularPriorCovariance(NumericalError):
    pass


class SingularScalingMatrix(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass
