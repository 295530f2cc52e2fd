"""Exception hierarchy.

Configuration problems (bad input, violated preconditions) and numerical
failures are kept apart so the command line can map them to distinct exit
codes.
"""


class SlitLabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SlitLabError, ValueError):
    """Invalid domain, mesh or experiment configuration."""


class NumericalError(SlitLabError, ArithmeticError):
    """A computation failed or did not reach its accuracy target."""


class ResolutionError(NumericalError):
    """A discretization is too coarse for the requested quantity."""


class StiffnessError(NumericalError):
    """Step size control broke down while integrating an ODE."""

    def __init__(self, message, x_reached=None):
        super().__init__(message)
        self.x_reached = x_reached


class GeometryError(NumericalError):
    """A mesh instance has a non-positive triangle."""

    def __init__(self, message, worst_triangle=None, worst_area=None):
        super().__init__(message)
        self.worst_triangle = worst_triangle
        self.worst_area = worst_area


class DegenerateEigenvalueError(NumericalError):
    """A derivative was requested for an eigenvalue that is not simple."""


class TrackingError(NumericalError):
    """A branch could not be continued from one parameter value to the next."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SamplingError(NumericalError):
    """A sample point fell outside the mesh."""
