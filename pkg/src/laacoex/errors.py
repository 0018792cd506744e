"""Exception hierarchy shared by the analytic and simulation engines."""


class LaaCoexError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LaaCoexError, ValueError):
    """An invalid scheme, rate, solver, simulation or file configuration."""


class DegenerateStateError(LaaCoexError):
    """A state has no enabled outgoing transition but receives probability flow."""

    def __init__(self, state, message=None):
        self.state = state
        super().__init__(message or f"state {tuple(state)} has no outgoing transition (eps_B = 0)")


class NonConvergenceError(LaaCoexError):
    def __init__(self, iterations, max_change):
        self.iterations = iterations
        self.max_change = max_change
        super().__init__(
            f"fixed-point iteration did not converge after {iterations} sweeps "
            f"(largest relative change {max_change:.3e})"
        )


class SingularSystemError(LaaCoexError):
    """The generator has more than one closed class reachable from the empty state."""


class FinishedError(LaaCoexError):
    """The simulation already reached its session target."""


class ScenarioError(LaaCoexError):
    """A solver or simulation failure, annotated with the scenario that produced it."""

    def __init__(self, scenario: str, cause: Exception):
        self.scenario = scenario
        self.cause = cause
        super().__init__(f"[{scenario}] {type(cause).__name__}: {cause}")
