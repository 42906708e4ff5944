"""
Errors raised by the integration library.
"""


class IntegrationError(Exception):
    """Numerical failure while advancing a trajectory."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step

    def at_step(self, step):
        """Attach the index of the failing step and return self."""
        if self.step is None:
            self.step = step
        return self

    def __str__(self):
        message = super().__str__()
        if self.step is None:
            return message
        return f'step {self.step}: {message}'


class ConvergenceError(IntegrationError):
    """Nonlinear iteration did not meet its tolerance."""

    def __init__(self, message, iterations, residual_norm, step=None):
        super().__init__(message, step=step)
        self.iterations = iterations
        self.residual_norm = residual_norm


class NonFiniteError(IntegrationError):
    """A field evaluation or a state produced inf/nan."""


class SingularPreconditionerError(IntegrationError):
    """The m x m matrix of a blended iteration cannot be factored."""


class ReferenceCheckError(IntegrationError):
    """Reference trajectory failed its step-halving self-check."""


class QuadratureError(ArithmeticError):
    """Gauss-Legendre node refinement did not converge."""


class TableauError(ValueError):
    """Invalid (k, s) pair or inconsistent tableau."""


class ProblemError(ValueError):
    """Problem definition is inconsistent."""
