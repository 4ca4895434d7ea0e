"""Exception hierarchy shared by all modules."""


class ApefError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(ApefError, ValueError):
    """Invalid numerical parameters (node count, lambda, tolerances, ...)."""


class DegenerateCurve(ApefError):
    """The curve lost regularity: the parametrization speed vanished somewhere."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class UnresolvedTopology(ApefError):
    """Total curvature is not close to a multiple of 2*pi (under-resolved curve)."""


class InvalidRHS(ApefError, ValueError):
    """Right-hand side of the weak problem is not in H_gamma (nonzero mean)."""


class StiffnessFailure(ApefError):
    """The step size fell below dt_min while the energy still increased."""


class GraphModeBreakdown(ApefError):
    """The evolving normal is no longer transversal to the reference normal."""


class NotApplicable(ApefError, ValueError):
    """A quantity was requested outside its domain of definition."""


class GenerationError(ApefError):
    """An initial datum failed its regularity or topology validation."""
