"""Exception types shared across the package."""


class AngioDelayError(Exception):
    """Base class for every error raised by this package."""


class NoPositiveSteadyStateError(AngioDelayError):
    """The positive steady state does not exist (stimulation does not exceed loss)."""


class DomainError(AngioDelayError):
    """An argument left the mathematical domain of an operation."""


class NoDensityError(AngioDelayError):
    """The kernel has no pointwise density (point mass)."""


class PoleError(AngioDelayError):
    """Laplace transform evaluated at a pole of the kernel transform."""


class UnsupportedError(AngioDelayError):
    """Requested a closed-form path that is not implemented for this case."""


class NeutralModelError(AngioDelayError):
    """Kernel parameters would turn the model into a neutral delay equation."""


class DegenerateInputError(AngioDelayError):
    """Input is degenerate (e.g. the zero polynomial)."""


class ConditionFailureError(AngioDelayError):
    """A hypothesis required by a closed-form criterion fails and numerics cannot rescue it."""


class OnAxisZeroError(AngioDelayError):
    """The characteristic function has a zero on (or too close to) the imaginary axis."""


class NonConvergentError(AngioDelayError):
    """An iterative procedure did not converge to the requested tolerance."""


class ContinuationStallError(AngioDelayError):
    """Curve continuation failed even after step bisection retries."""


class ConfigError(AngioDelayError):
    """Simulation configuration violates a resolution or validity requirement."""


class InconclusiveSignError(AngioDelayError):
    """A derivative sign is too close to zero to certify a crossing direction."""


class BlowUpError(AngioDelayError):
    """State magnitude exceeded the blow-up guard during integration."""

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"state exceeded blow-up guard at t={time:g}")
