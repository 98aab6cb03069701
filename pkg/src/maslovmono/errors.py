"""Exception hierarchy shared by the exact and numerical layers."""


class MaslovMonoError(Exception):
    """Base class for all package errors."""


class DimensionError(MaslovMonoError, ValueError):
    pass


class NotUnimodularError(MaslovMonoError, ValueError):
    pass


class NotSLError(NotUnimodularError):
    """Determinant is not +1."""


class NotPrimitiveError(MaslovMonoError, ValueError):
    pass


class NoKernelError(MaslovMonoError, ValueError):
    pass


class NoEigenvalueError(MaslovMonoError, ValueError):
    pass


class MultiplicityError(MaslovMonoError, ValueError):
    pass


class DomainError(MaslovMonoError, ValueError):
    """A value of the energy-momentum map is critical or outside the image."""


class IntegrationError(MaslovMonoError, RuntimeError):
    pass


class NearCriticalError(IntegrationError):
    """Raised when a loop sample cannot be resolved; carries the loop parameter."""

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class ResolutionError(MaslovMonoError, RuntimeError):
    """A winding that should be an integer is not close enough to one."""
