"""Exception hierarchy shared by the simulator modules."""


class BlockadeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BlockadeError, ValueError):
    """An input lies outside the domain where a formula is defined."""


class StepSizeError(BlockadeError, ValueError):
    """Fixed-step integrator asked to take a step it cannot take stably."""


class SolverError(BlockadeError, RuntimeError):
    """The steady-state linear solve failed."""


class ConvergenceError(SolverError):
    """The steady-state residual exceeds the accepted bound."""


class TruncationError(SolverError):
    """No Fock-space dimension below the hard cap gave converged results."""


class PropagationError(BlockadeError, RuntimeError):
    """Time propagation drifted off the trace-one manifold."""


class UndefinedCorrelationError(BlockadeError, ValueError):
    """A correlation or ratio is undefined (e.g. vacuum state)."""


class SpecError(BlockadeError, ValueError):
    """Malformed sweep specification, recipe name or run configuration."""
