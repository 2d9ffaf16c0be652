"""Exception types raised by hermgen."""


class HermgenError(Exception):
    """Base class for all library errors."""


class ParameterError(HermgenError, ValueError):
    """Invalid shapes, degrees, or matrices that are not positive semidefinite."""


class QuadratureError(HermgenError, RuntimeError):
    """Root isolation for a Gauss-Hermite rule failed to converge."""

    def __init__(self, message, node_index=None):
        super().__init__(message)
        self.node_index = node_index


class ActivationError(HermgenError, ValueError):
    """An activation returned a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class InsufficientSampleError(HermgenError, ValueError):
    """Too few observations for the requested k-statistic."""


class SolverError(HermgenError, RuntimeError):
    """Coefficient solver exhausted its restarts without a certified solution."""

    def __init__(self, message, best_residual, best_coeffs=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best_coeffs = best_coeffs


class TrainingDiverged(HermgenError, FloatingPointError):
    """Online SGD produced a non-finite loss or parameter."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step
