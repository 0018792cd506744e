"""State space, indicator predicates and transition structure of the coexistence chain.

A system state is ``(w, x, y, z)``: the LAA phase (0 OFF, 1 Sensing, 2 ON), the
number of LAA packets in service, the number of Wi-Fi packets in service and the
LAA queue length.  Every scheme shares one balance equation

    pi(n) * eps_B(n) = eps_A(n)

whose terms are switched on and off by 24 zero/one indicators.  Each scheme
supplies its own predicate table; :func:`transition_list` and
:func:`balance_terms` are written once against that table.

Indicators ending up in ``eps_B`` (1, 3, 5, 7, 8, 10, 12, 14, 17, 18, 23, 24)
describe moves *out of* the state.  The remaining ones describe moves *into* the
state from the neighbour named in the corresponding ``eps_A`` term and are
evaluated with the current state's coordinates, exactly like the outgoing ones.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple

from .errors import ConfigError, DegenerateStateError

__all__ = [
    "Phase",
    "Scheme",
    "SystemState",
    "SchemeConfig",
    "RateParams",
    "DeltaVector",
    "StateSpace",
    "Transition",
    "enumerate_states",
    "delta_vector",
    "outgoing_deltas",
    "transition_list",
    "incoming_terms",
    "balance_terms",
    "is_legal",
]

# mu'_on multiplier for the head-of-queue service start while ON
SERVICE_START_FACTOR = 10.0


class Phase(enum.IntEnum):
    OFF = 0
    SENSING = 1
    ON = 2


class Scheme(str, enum.Enum):
    UFA = "UFA"
    UTA = "UTA"
    UFAB = "UFAB"
    UTAB = "UTAB"

    @property
    def time_division(self) -> bool:
        """True for the schemes that cycle through OFF/Sensing/ON."""
        return self in (Scheme.UTA, Scheme.UTAB)

    @property
    def buffered(self) -> bool:
        return self in (Scheme.UFAB, Scheme.UTAB)

    @property
    def phases(self) -> tuple[Phase, ...]:
        return tuple(Phase) if self.time_division else (Phase.ON,)

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, Scheme):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ConfigError(f"scheme: unknown scheme {value!r} (expected one of {names})") from None


class SystemState(NamedTuple):
    w: int
    x: int
    y: int
    z: int

    def free_channels(self, d: int) -> int:
        return d - self.x - self.y

    def free_slots(self, q: int) -> int:
        return q - self.z

    def __str__(self) -> str:
        return f"({self.w},{self.x},{self.y},{self.z})"


@dataclass(frozen=True)
class SchemeConfig:
    """Allocation scheme plus the channel count ``D``, queue size ``Q`` and threshold ``Q_theta``.

    ``q_theta`` is only meaningful for the buffered schemes and must lie in
    ``1..Q-1``.  Sweep presets that reproduce the buffer-threshold figure go one
    step further (``Q_theta = Q``); pass ``allow_full_threshold=True`` for that.
    """

    scheme: Scheme
    D: int = 1
    Q: int = 2
    q_theta: int | None = None
    allow_full_threshold: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not isinstance(self.D, int) or self.D < 1:
            raise ConfigError(f"D: channel count must be an integer >= 1, got {self.D!r}")
        if not isinstance(self.Q, int) or self.Q < 1:
            raise ConfigError(f"Q: queue capacity must be an integer >= 1, got {self.Q!r}")
        if not self.scheme.buffered:
            object.__setattr__(self, "q_theta", None)
            return
        if self.q_theta is None:
            raise ConfigError(f"q_theta: required for {self.scheme.value}")
        upper = self.Q if self.allow_full_threshold else self.Q - 1
        if not isinstance(self.q_theta, int) or not 1 <= self.q_theta <= upper:
            raise ConfigError(
                f"q_theta: buffer threshold must lie in 1..{upper} for Q={self.Q}, got {self.q_theta!r}"
            )
        if self.q_theta == self.Q:
            warnings.warn(
                f"{self.scheme.value}: q_theta = Q = {self.Q} lies outside the model's 1..Q-1 range; "
                "indicator conditions are evaluated as written",
                stacklevel=3,
            )

    @property
    def qt(self) -> int:
        # threshold used inside predicates; unbuffered schemes never read it
        return self.q_theta if self.q_theta is not None else 0


@dataclass(frozen=True)
class RateParams:
    """Exponential rates, all per second.

    Arrival rates may be zero (degenerate inputs); every service or phase
    rate must be strictly positive.
    """

    lambda_l: float
    lambda_w: float
    mu_lu: float
    mu_w: float
    mu_s: float = 1.0
    mu_on: float = 0.1
    mu_off: float = 0.1

    def __post_init__(self):
        for name in ("lambda_l", "lambda_w"):
            v = getattr(self, name)
            if not v >= 0 or v == float("inf"):
                raise ConfigError(f"{name}: arrival rate must be finite and >= 0, got {v!r}")
        for name in ("mu_lu", "mu_w", "mu_s", "mu_on", "mu_off"):
            v = getattr(self, name)
            if not v > 0 or v == float("inf"):
                raise ConfigError(f"{name}: rate must be finite and > 0, got {v!r}")

    @property
    def mu_on_prime(self) -> float:
        return SERVICE_START_FACTOR * self.mu_on

    def as_dict(self) -> dict[str, float]:
        return {
            "lambda_l": self.lambda_l,
            "lambda_w": self.lambda_w,
            "mu_lu": self.mu_lu,
            "mu_w": self.mu_w,
            "mu_s": self.mu_s,
            "mu_on": self.mu_on,
            "mu_off": self.mu_off,
        }


class DeltaVector(NamedTuple):
    d1: int
    d2: int
    d3: int
    d4: int
    d5: int
    d6: int
    d7: int
    d8: int
    d9: int
    d10: int
    d11: int
    d12: int
    d13: int
    d14: int
    d15: int
    d16: int
    d17: int
    d18: int
    d19: int
    d20: int
    d21: int
    d22: int
    d23: int
    d24: int

    def __call__(self, i: int) -> int:
        """1-based access: ``dv(17)``."""
        return self[i - 1]


OUTGOING = (1, 3, 5, 7, 8, 10, 12, 14, 17, 18, 23, 24)


@dataclass(frozen=True)
class StateSpace:
    config: SchemeConfig
    states: tuple[SystemState, ...]
    index: Mapping[SystemState, int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[SystemState]:
        return iter(self.states)

    def __contains__(self, state) -> bool:
        return state in self.index

    def __getitem__(self, i: int) -> SystemState:
        return self.states[i]


class Transition(NamedTuple):
    target: SystemState
    rate: float
    delta: int


def is_legal(state, config: SchemeConfig) -> bool:
    """Bounds check against the scheme's state-space definition, for any ``D``."""
    w, x, y, z = state
    if w not in config.scheme.phases:
        return False
    return x >= 0 and y >= 0 and x + y <= config.D and 0 <= z <= config.Q


def enumerate_states(config: SchemeConfig) -> StateSpace:
    if config.D != 1:
        raise ConfigError(f"D: the analytic state space bounds x, y to {{0, 1}}; D={config.D} is simulation-only")
    states = tuple(
        SystemState(int(w), x, y, z)
        for w in config.scheme.phases
        for x in range(config.D + 1)
        for y in range(config.D + 1)
        for z in range(config.Q + 1)
        if x + y <= config.D
    )
    return StateSpace(config, states, {s: i for i, s in enumerate(states)})


def _full_table(w, x, y, z, cfg: SchemeConfig) -> list[bool]:
    """All 24 predicates (index 0 unused) under the scheme's table."""
    D, Q, qt = cfg.D, cfg.Q, cfg.qt
    scheme = cfg.scheme

    def has(w_, x_, y_, z_):
        return is_legal((w_, x_, y_, z_), cfg)

    d = [False] * 25
    if not scheme.time_division:
        # w is frozen at ON; indicators 8, 16..24 stay zero
        if scheme is Scheme.UFA:
            d[1] = x < D - y and z == 0
            d[2] = 0 < x + 1 <= D - y and z == 0 and has(w, x + 1, y, z)
            d[3] = y < D - x and z == 0
            d[4] = 0 < y + 1 <= D - x and z == 0 and has(w, x, y + 1, z)
            d[5] = z < Q and x + y == D
            d[6] = z + 1 <= Q and x + y == D and x > 0 and has(w, x, y, z + 1)
            d[7] = y > 0 and z > 0 and x + y == D
            d[9] = 0 <= x - 1 < D - y and z == 0 and has(w, x - 1, y, z)
            d[10] = 0 < x <= D - y and z == 0
            d[11] = 0 <= y - 1 < D - x and z == 0 and has(w, x, y - 1, z)
            d[12] = 0 < y <= D - x and z == 0
            d[13] = 0 <= z - 1 < Q and x + y == D and has(w, x, y, z - 1)
            d[14] = 0 < z <= Q and x + y == D and x > 0
            d[15] = x + y == D and has(w, x - 1, y + 1, z + 1)
        else:
            d[1] = x < D - y and z >= qt
            d[2] = 0 < x + 1 <= D - y and z < qt and has(w, x + 1, y, z)
            d[3] = y < D - x and z < qt
            d[4] = 0 < y + 1 <= D - x and z < qt and has(w, x, y + 1, z)
            d[5] = z < Q and (x + y == D or z < qt)
            d[6] = z + 1 <= Q and x + y == D and x > 0 and z + 1 >= qt and has(w, x, y, z + 1)
            d[7] = y > 0 and z > 0 and x + y == D and z >= qt
            d[9] = 0 <= x - 1 < D - y and z >= qt and has(w, x - 1, y, z)
            d[10] = 0 < x <= D - y and z < qt
            d[11] = 0 <= y - 1 < D - x and z < qt and has(w, x, y - 1, z)
            d[12] = 0 < y <= D - x and z < qt
            d[13] = 0 <= z - 1 < Q and (x + y == D or z - 1 < qt) and has(w, x, y, z - 1)
            d[14] = 0 < z <= Q and x + y == D and x > 0 and z >= qt
            d[15] = x + y == D and z + 1 >= qt and has(w, x - 1, y + 1, z + 1)
        return d

    on = w == Phase.ON
    d[1] = on and x < D - y and z == 0
    d[2] = ((on and z == 0) or not on) and 0 < x + 1 <= D - y and has(w, x + 1, y, z)
    d[3] = y < D - x
    # a Wi-Fi completion either hands the channel to the queue head (7) or frees it (12), never both
    d[4] = 0 < y + 1 <= D - x and has(w, x, y + 1, z) and not (on and z > 0 and x + y + 1 == D)
    d[5] = z < Q and ((on and x + y == D) or not on)
    d[6] = on and z + 1 <= Q and x + y == D and has(w, x, y, z + 1)
    d[7] = on and y > 0 and z > 0 and x + y == D
    d[8] = on and y == 0 and z > 0 and x < D - y
    d[9] = on and 0 <= x - 1 < D - y and z == 0 and has(w, x - 1, y, z)
    d[10] = ((on and z == 0) or not on) and 0 < x <= D - y
    d[11] = 0 <= y - 1 < D - x and has(w, x, y - 1, z)
    d[12] = 0 < y <= D - x and not (on and z > 0 and x + y == D)
    d[13] = 0 <= z - 1 < Q and ((on and x + y == D) or not on) and has(w, x, y, z - 1)
    d[14] = on and 0 < z <= Q
    d[15] = on and x + y == D and has(w, x - 1, y + 1, z + 1)
    d[16] = on and y == 0 and 0 <= x - 1 < D - y and has(w, x - 1, y, z + 1)

    if scheme is Scheme.UTA:
        go_on = z > 0      # Sensing -> ON and OFF -> Sensing need a backlog
        give_up = z == 0   # Sensing -> OFF on an empty queue
    else:
        go_on = z > qt
        give_up = z < qt
    d[17] = w == Phase.SENSING and x == 0 and y == 0 and go_on
    d[18] = w == Phase.OFF and go_on
    d[19] = w + 1 == Phase.SENSING and ((x == 0 and y > 0) or give_up) and has(w + 1, x, y, z)
    d[20] = w + 1 == Phase.ON and has(w + 1, x, y, z)
    d[21] = w - 1 == Phase.SENSING and x == 0 and y == 0 and go_on and has(w - 1, x, y, z)
    d[22] = w - 1 == Phase.OFF and go_on and has(w - 1, x, y, z)
    d[23] = w == Phase.SENSING and ((x == 0 and y > 0) or give_up)
    d[24] = on
    return d


def delta_vector(state, config: SchemeConfig) -> DeltaVector:
    w, x, y, z = state
    if not is_legal(state, config):
        raise ConfigError(f"state {tuple(state)} is not legal for {config.scheme.value}")
    table = _full_table(w, x, y, z, config)
    return DeltaVector(*(int(v) for v in table[1:]))


def outgoing_deltas(state, config: SchemeConfig) -> DeltaVector:
    """Alias of :func:`delta_vector` kept for callers that only read outgoing indicators."""
    return delta_vector(state, config)


def transition_list(state, config: SchemeConfig, rates: RateParams) -> list[Transition]:
    """Outgoing moves with strictly positive rate, one per enabled outgoing indicator."""
    dv = delta_vector(state, config)
    w, x, y, z = state
    S = SystemState
    candidates = (
        (1, S(w, x + 1, y, z), rates.lambda_l),
        (3, S(w, x, y + 1, z), rates.lambda_w),
        (5, S(w, x, y, z + 1), rates.lambda_l),
        (7, S(w, x + 1, y - 1, z - 1), y * rates.mu_w),
        (8, S(w, x + 1, y, z - 1), rates.mu_on_prime),
        (10, S(w, x - 1, y, z), x * rates.mu_lu),
        (12, S(w, x, y - 1, z), y * rates.mu_w),
        (14, S(w, x, y, z - 1), x * rates.mu_lu),
        (17, S(w + 1, x, y, z), rates.mu_s),
        (18, S(w + 1, x, y, z), rates.mu_off),
        (23, S(w - 1, x, y, z), rates.mu_s),
        (24, S(w - 1, x, y, z), rates.mu_on),
    )
    return [Transition(t, float(r), i) for i, t, r in candidates if dv(i) and r > 0]


def incoming_terms(state, config: SchemeConfig, rates: RateParams) -> list[tuple[SystemState, float, int]]:
    """``(source, coefficient, indicator)`` for every nonzero term of ``eps_A``.

    Sources that fall outside the state space are dropped (their probability is zero).
    """
    dv = delta_vector(state, config)
    w, x, y, z = state
    S = SystemState
    terms = (
        (2, S(w, x + 1, y, z), (x + 1) * rates.mu_lu),
        (4, S(w, x, y + 1, z), (y + 1) * rates.mu_w),
        (6, S(w, x, y, z + 1), x * rates.mu_lu),
        (9, S(w, x - 1, y, z), rates.lambda_l),
        (11, S(w, x, y - 1, z), rates.lambda_w),
        (13, S(w, x, y, z - 1), rates.lambda_l),
        (15, S(w, x - 1, y + 1, z + 1), (y + 1) * rates.mu_w),
        (16, S(w, x - 1, y, z + 1), rates.mu_on_prime),
        (19, S(w + 1, x, y, z), rates.mu_s),
        (20, S(w + 1, x, y, z), rates.mu_on),
        (21, S(w - 1, x, y, z), rates.mu_s),
        (22, S(w - 1, x, y, z), rates.mu_off),
    )
    return [(src, float(c), i) for i, src, c in terms if dv(i) and c > 0 and is_legal(src, config)]


def balance_terms(state, pi: Mapping, config: SchemeConfig, rates: RateParams) -> tuple[float, float]:
    """``(eps_A, eps_B)`` for one state given a (possibly unnormalised) distribution.

    ``pi`` is any mapping from states to probability; missing states count as zero.
    Raises :class:`DegenerateStateError` when no outgoing move is enabled.
    """
    eps_b = sum(t.rate for t in transition_list(state, config, rates))
    if eps_b == 0:
        raise DegenerateStateError(state)
    eps_a = sum(c * pi.get(src, 0.0) for src, c, _ in incoming_terms(state, config, rates))
    return eps_a, eps_b
