"""Exception hierarchy shared by the numerical modules and the runner."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical stage."""


class DomainError(NumericalError, ValueError):
    """A right-hand side was evaluated outside its domain of definition."""


class ConvergenceError(NumericalError):
    """The adaptive integrator could not keep the step size above its floor."""


class GridMismatchError(ValueError):
    """A network's hidden layer does not sit on the grid it is used with."""


class DegenerateReferenceError(ValueError):
    """The reference series has zero norm, so a relative error is undefined."""


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""
