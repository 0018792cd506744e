"""LAA/Wi-Fi unlicensed-band coexistence: exact Markov model, discrete-event simulator, experiments."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateStateError,
    FinishedError,
    LaaCoexError,
    NonConvergenceError,
    ScenarioError,
    SingularSystemError,
)
from .model import (  # noqa: E402
    DeltaVector,
    Phase,
    RateParams,
    Scheme,
    SchemeConfig,
    StateSpace,
    SystemState,
    balance_terms,
    delta_vector,
    enumerate_states,
    transition_list,
)
from .solver import (  # noqa: E402
    DroppingProbabilities,
    SolverSettings,
    StationaryDistribution,
    dropping_probabilities,
    solve_direct,
    solve_iterative,
)
from .des import DistributionSpec, SimConfig, SimStats, Simulation, run, sample  # noqa: E402

__all__ = [
    "__version__",
    "LaaCoexError", "ConfigError", "DegenerateStateError", "NonConvergenceError", "SingularSystemError",
    "FinishedError", "ScenarioError",
    "Phase", "Scheme", "SchemeConfig", "RateParams", "SystemState", "StateSpace", "DeltaVector",
    "enumerate_states", "delta_vector", "transition_list", "balance_terms",
    "SolverSettings", "StationaryDistribution", "DroppingProbabilities",
    "solve_iterative", "solve_direct", "dropping_probabilities",
    "DistributionSpec", "SimConfig", "SimStats", "Simulation", "run", "sample",
]
