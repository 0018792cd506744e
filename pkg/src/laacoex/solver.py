"""Stationary distribution of the coexistence chain.

Two independent routes are provided:

* :func:`solve_iterative` - the fixed-point iteration ``pi(n) = eps_A(n) / eps_B(n)``
  swept in place (Gauss-Seidel, lexicographic order) with one normalisation per
  sweep, stopping once every state's relative change is within ``alpha``.
* :func:`solve_direct` - an explicit generator matrix built from
  :func:`~laacoex.model.transition_list` and solved with a dense linear solve.

They share only the indicator tables, so agreement between them checks the
balance-equation bookkeeping (incoming vs outgoing terms) end to end.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components
from scipy.sparse import csr_matrix

from .errors import ConfigError, DegenerateStateError, NonConvergenceError, SingularSystemError
from .model import (
    RateParams,
    SchemeConfig,
    StateSpace,
    SystemState,
    enumerate_states,
    incoming_terms,
    transition_list,
)

__all__ = [
    "SolverSettings",
    "StationaryDistribution",
    "DroppingProbabilities",
    "solve_iterative",
    "solve_direct",
    "dropping_probabilities",
    "generator_matrix",
]


@dataclass(frozen=True)
class SolverSettings:
    alpha: float = 1e-6
    max_iterations: int = 1_000_000
    init: Mapping | None = None

    def __post_init__(self):
        if not (0 < self.alpha < 1):
            raise ConfigError(f"alpha: convergence tolerance must lie in (0, 1), got {self.alpha!r}")
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise ConfigError(f"max_iterations: must be a positive integer, got {self.max_iterations!r}")


class StationaryDistribution(Mapping):
    """Read-only map from state to probability; states outside the space map to 0."""

    def __init__(self, space: StateSpace, probabilities, iterations: int = 0, method: str = "iterative",
                 pruned: tuple = ()):
        self.space = space
        self.vector = np.asarray(probabilities, dtype=float)
        self.vector.setflags(write=False)
        self.iterations = iterations
        self.method = method
        self.pruned = tuple(pruned)

    def __getitem__(self, state) -> float:
        i = self.space.index.get(SystemState(*state)) if len(state) == 4 else None
        return 0.0 if i is None else float(self.vector[i])

    def get(self, state, default=0.0):
        try:
            return self[state]
        except TypeError:
            return default

    def __iter__(self):
        return iter(self.space.states)

    def __len__(self):
        return len(self.space)

    def __repr__(self):
        return f"StationaryDistribution({self.space.config.scheme.value}, {len(self)} states, {self.method})"


@dataclass(frozen=True)
class DroppingProbabilities:
    p_bl: float
    p_bw: float
    extra: dict = field(default_factory=dict)


def _initial_vector(space: StateSpace, init) -> np.ndarray:
    if init is None:
        return np.full(len(space), 1.0 / len(space))
    vec = np.array([float(init.get(s, 0.0)) for s in space], dtype=float)
    if np.any(vec < 0) or not np.all(np.isfinite(vec)) or vec.sum() <= 0:
        raise ConfigError("init: initial distribution must be non-negative with positive total mass")
    return vec / vec.sum()


def _iteration_matrix(space: StateSpace, config: SchemeConfig, rates: RateParams):
    """``M`` with ``pi = M @ pi`` the balance equation, plus the isolated-state mask."""
    n = len(space)
    M = np.zeros((n, n))
    isolated = np.zeros(n, dtype=bool)
    for i, s in enumerate(space):
        eps_b = sum(t.rate for t in transition_list(s, config, rates))
        terms = incoming_terms(s, config, rates)
        if eps_b == 0:
            if terms:
                raise DegenerateStateError(s)
            isolated[i] = True
            continue
        for src, c, _ in terms:
            M[i, space.index[src]] += c / eps_b
    return M, isolated


def solve_iterative(config: SchemeConfig, rates: RateParams, settings: SolverSettings | None = None
                    ) -> tuple[StationaryDistribution, int]:
    """Fixed-point iteration of the balance equation; returns ``(distribution, sweeps)``.

    One sweep updates every state in place in lexicographic order (so later
    states already see this sweep's values), then normalises.  Written as the
    equivalent triangular solve ``(I - L) pi_new = U pi_old``.

    States with no enabled outgoing move and no structural inflow cannot carry
    mass and are held at zero; a state with no outgoing move that does receive
    flow would absorb everything and raises :class:`DegenerateStateError`.
    """
    settings = settings or SolverSettings()
    space = enumerate_states(config)
    M, isolated = _iteration_matrix(space, config, rates)
    lower = np.eye(len(space)) - np.tril(M, k=-1)
    upper = np.triu(M)

    pi = _initial_vector(space, settings.init)
    pi[isolated] = 0.0
    if pi.sum() <= 0:
        raise ConfigError("init: initial distribution puts all mass on states that cannot be occupied")
    pi /= pi.sum()

    alpha = settings.alpha
    change = float("inf")
    for sweep in range(1, settings.max_iterations + 1):
        old = pi
        pi = linalg.solve_triangular(lower, upper @ old, lower=True, unit_diagonal=True)
        total = pi.sum()
        if not total > 0 or not np.isfinite(total):
            raise NonConvergenceError(sweep, float("inf"))
        pi /= total
        live = (pi != 0) | (old != 0)
        diff = np.abs(pi - old)[live]
        ref = pi[live]
        if np.all(diff <= alpha * ref):
            dist = StationaryDistribution(space, pi, iterations=sweep, method="iterative",
                                          pruned=tuple(space[i] for i in np.flatnonzero(isolated)))
            return dist, sweep
        with np.errstate(divide="ignore", invalid="ignore"):
            change = float(np.max(np.where(ref > 0, diff / ref, np.inf)))
    raise NonConvergenceError(settings.max_iterations, change)


def generator_matrix(config: SchemeConfig, rates: RateParams, space: StateSpace | None = None) -> np.ndarray:
    """Dense infinitesimal generator ``G`` with ``G[i, j]`` the rate from state i to j."""
    space = space or enumerate_states(config)
    n = len(space)
    G = np.zeros((n, n))
    for i, s in enumerate(space):
        for t in transition_list(s, config, rates):
            j = space.index.get(t.target)
            if j is None:
                raise SingularSystemError(f"transition {s} -> {t.target} leaves the state space")
            G[i, j] += t.rate
        G[i, i] = -G[i].sum()
    return G


def solve_direct(config: SchemeConfig, rates: RateParams) -> StationaryDistribution:
    """Solve ``pi G = 0`` on the closed class reachable from the empty state.

    States that cannot be reached from the empty state (in its lowest phase)
    are reported in ``.pruned`` and carry zero probability.
    """
    space = enumerate_states(config)
    G = generator_matrix(config, rates, space)
    n = len(space)
    adj = (G > 0).astype(float)
    start = space.index[SystemState(int(config.scheme.phases[0]), 0, 0, 0)]

    reach = np.zeros(n, dtype=bool)
    reach[start] = True
    frontier = [start]
    while frontier:
        i = frontier.pop()
        for j in np.flatnonzero(adj[i]):
            if not reach[j]:
                reach[j] = True
                frontier.append(j)

    sub = np.flatnonzero(reach)
    # closed classes among the reachable states = strongly connected components with no exit
    ncomp, labels = connected_components(csr_matrix(adj[np.ix_(sub, sub)]), directed=True, connection="strong")
    closed = []
    for c in range(ncomp):
        members = sub[labels == c]
        others = np.setdiff1d(np.arange(n), members)
        if not adj[np.ix_(members, others)].any():
            closed.append(members)
    if len(closed) != 1:
        raise SingularSystemError(f"{len(closed)} closed classes reachable from the empty state")
    keep = closed[0]

    Gs = G[np.ix_(keep, keep)]
    A = Gs.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(len(keep))
    b[-1] = 1.0
    try:
        sol = linalg.solve(A, b)
    except linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None
    sol = np.clip(sol, 0.0, None)
    pi = np.zeros(n)
    pi[keep] = sol / sol.sum()
    pruned = tuple(space[i] for i in range(n) if i not in set(keep.tolist()))
    return StationaryDistribution(space, pi, iterations=0, method="direct", pruned=pruned)


def dropping_probabilities(pi: StationaryDistribution, config: SchemeConfig | None = None
                           ) -> DroppingProbabilities:
    """LAA blocking = mass with a full queue; Wi-Fi blocking = mass with every channel held by LAA."""
    cfg = config or pi.space.config
    p_bl = sum(p for s, p in zip(pi.space, pi.vector) if s.z == cfg.Q)
    p_bw = sum(p for s, p in zip(pi.space, pi.vector) if s.x == cfg.D)
    return DroppingProbabilities(float(p_bl), float(p_bw))
