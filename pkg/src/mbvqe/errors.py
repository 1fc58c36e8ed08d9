"""Exception types raised across the package."""


class RegisterError(ValueError):
    """A qubit label is missing from, or duplicated in, a register."""


class MeasurementError(ValueError):
    """A forced measurement outcome has (numerically) zero probability."""

    def __init__(self, qubit, outcome, probabilities):
        self.qubit = qubit
        self.outcome = outcome
        self.probabilities = tuple(float(p) for p in probabilities)
        super().__init__(
            f"cannot force outcome {outcome} on qubit {qubit!r}: "
            f"p(0)={self.probabilities[0]:.3e}, p(1)={self.probabilities[1]:.3e}"
        )


class ExecutionError(RuntimeError):
    """A measurement pattern could not be executed as written."""


class CapacityError(RuntimeError):
    """The requested computation exceeds a hard size cap."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class UnsupportedParameterizationError(ValueError):
    """A parameter enters the ansatz in a way the gradient rule cannot handle."""


class UndefinedVScoreError(ZeroDivisionError):
    """The V-score is undefined because the energy equals its zero point."""
