"""Seeded discrete-event simulator of the LAA/Wi-Fi coexistence queue.

The simulator tracks the same ``(w, x, y, z)`` state as the analytic chain but
drives it from sampled durations instead of rates, so any of the seven
durations can be replaced by a non-exponential distribution.  Scheme rules are
written here directly in terms of free channels, queue length and threshold;
they are deliberately *not* taken from :mod:`laacoex.model` so that agreement
between the two engines is an independent check.

Event loop: a binary heap of ``(time, priority, seq, kind, token)``.  Timers
that can be invalidated (the head-of-queue service-start delay) are cancelled
lazily by bumping a token.  Same-instant events are ordered departures, phase
expiries, sensing completions, service starts, arrivals, then by insertion.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import IO, Mapping, NamedTuple

import numpy as np

from .errors import ConfigError, FinishedError
from .model import Phase, RateParams, Scheme, SchemeConfig, SystemState
from .stats import batch_ratio

__all__ = [
    "RNG_ALGORITHM",
    "QUANTITIES",
    "DistributionSpec",
    "SimConfig",
    "SimStats",
    "EventKind",
    "EventRecord",
    "Simulation",
    "UniformStream",
    "run",
    "sample",
    "write_trace",
]

RNG_ALGORITHM = "numpy.PCG64"

# duration name -> RateParams attribute supplying its default exponential rate
QUANTITIES = {
    "laa_arrival": "lambda_l",
    "wifi_arrival": "lambda_w",
    "laa_service": "mu_lu",
    "wifi_service": "mu_w",
    "sensing": "mu_s",
    "on": "mu_on",
    "off": "mu_off",
}

_UNIT_NORMAL = NormalDist()


class UniformStream:
    """Buffered uniforms on [0, 1) from a PCG64 generator seeded with a 64-bit integer."""

    def __init__(self, seed: int, block: int = 1 << 14):
        self.generator = np.random.Generator(np.random.PCG64(seed))
        self._block = block
        self._buf = self.generator.random(block).tolist()
        self._pos = 0

    def next(self) -> float:
        if self._pos == self._block:
            self._buf = self.generator.random(self._block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


@dataclass(frozen=True)
class DistributionSpec:
    """A duration distribution.

    ``kind`` is ``"exponential"`` (``rate`` > 0), ``"deterministic"`` (``value`` >= 0)
    or ``"custom"`` with a named preset.  The only custom preset is ``"ftp"``:
    file sizes with mean ``mean`` seconds of transfer time, drawn either
    exponentially (identical to the default model) or log-normally with log-scale
    spread ``sigma``.
    """

    kind: str = "exponential"
    rate: float | None = None
    value: float | None = None
    preset: str | None = None
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        kind = str(self.kind).lower()
        object.__setattr__(self, "kind", kind)
        if kind == "exponential":
            if self.rate is None or not 0 < self.rate < math.inf:
                raise ConfigError(f"rate: exponential rate must be finite and > 0, got {self.rate!r}")
        elif kind == "deterministic":
            if self.value is None or not 0 <= self.value < math.inf:
                raise ConfigError(f"value: deterministic duration must be finite and >= 0, got {self.value!r}")
        elif kind == "custom":
            if self.preset != "ftp":
                raise ConfigError(f"preset: unknown custom distribution {self.preset!r} (known: 'ftp')")
            mean = self.params.get("mean")
            if mean is None or not 0 < mean < math.inf:
                raise ConfigError(f"params.mean: ftp mean transfer time must be > 0, got {mean!r}")
            size = self.params.get("size", "exponential")
            if size not in ("exponential", "lognormal"):
                raise ConfigError(f"params.size: expected 'exponential' or 'lognormal', got {size!r}")
            if size == "lognormal" and not self.params.get("sigma", 0) > 0:
                raise ConfigError("params.sigma: lognormal ftp sizes need sigma > 0")
        else:
            raise ConfigError(f"kind: expected exponential, deterministic or custom, got {self.kind!r}")

    @classmethod
    def exponential(cls, rate: float) -> "DistributionSpec":
        return cls("exponential", rate=float(rate))

    @classmethod
    def deterministic(cls, value: float) -> "DistributionSpec":
        return cls("deterministic", value=float(value))

    @classmethod
    def ftp(cls, mean: float, size: str = "exponential", sigma: float | None = None) -> "DistributionSpec":
        params = {"mean": float(mean), "size": size}
        if sigma is not None:
            params["sigma"] = float(sigma)
        return cls("custom", preset="ftp", params=params)

    @property
    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.rate
        if self.kind == "deterministic":
            return self.value
        return self.params["mean"]


def sample(spec: DistributionSpec, rng: UniformStream) -> float:
    """Draw one duration by inverse transform from a single uniform."""
    if spec.kind == "deterministic":
        return spec.value
    u = rng.next()
    if spec.kind == "exponential":
        return -math.log1p(-u) / spec.rate
    p = spec.params
    if p.get("size", "exponential") == "exponential":
        return -math.log1p(-u) * p["mean"]
    sigma = p["sigma"]
    # log-normal with the requested mean: mu = log(mean) - sigma^2 / 2
    mu = math.log(p["mean"]) - 0.5 * sigma * sigma
    u = min(max(u, 1e-300), 1 - 1e-16)
    return math.exp(mu + sigma * _UNIT_NORMAL.inv_cdf(u))


@dataclass(frozen=True)
class SimConfig:
    scheme: SchemeConfig
    rates: RateParams
    sessions: int = 1_000_000
    seed: int = 0
    batches: int = 10
    overrides: Mapping[str, DistributionSpec] = field(default_factory=dict)
    trace: bool = False

    def __post_init__(self):
        if not isinstance(self.sessions, int) or self.sessions < 1:
            raise ConfigError(f"sessions: must be an integer >= 1, got {self.sessions!r}")
        if not isinstance(self.batches, int) or self.batches < 2:
            raise ConfigError(f"batches: must be an integer >= 2, got {self.batches!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be an integer in [0, 2**64), got {self.seed!r}")
        for key, spec in self.overrides.items():
            if key not in QUANTITIES:
                raise ConfigError(f"overrides.{key}: unknown quantity (expected one of {', '.join(QUANTITIES)})")
            if not isinstance(spec, DistributionSpec):
                raise ConfigError(f"overrides.{key}: expected a DistributionSpec")
        if self.arrival_spec("laa_arrival") is None and self.arrival_spec("wifi_arrival") is None:
            raise ConfigError("lambda_l, lambda_w: at least one arrival stream must be active")

    def arrival_spec(self, key: str) -> DistributionSpec | None:
        if key in self.overrides:
            return self.overrides[key]
        rate = getattr(self.rates, QUANTITIES[key])
        return DistributionSpec.exponential(rate) if rate > 0 else None

    def spec(self, key: str) -> DistributionSpec:
        if key in self.overrides:
            return self.overrides[key]
        return DistributionSpec.exponential(getattr(self.rates, QUANTITIES[key]))


class EventKind(enum.IntEnum):
    # value doubles as same-instant priority (lower first)
    LaaDeparture = 0
    WifiDeparture = 1
    PhaseTimerExpiry = 2
    SensingComplete = 3
    ServiceStart = 4
    LaaArrival = 5
    WifiArrival = 6


class EventRecord(NamedTuple):
    time: float
    kind: EventKind
    state: SystemState


@dataclass(frozen=True)
class SimStats:
    scheme: str
    seed: int
    sessions: int
    laa_arrivals: int
    laa_drops: int
    laa_drops_total: int
    laa_served_direct: int
    laa_buffered: int
    wifi_arrivals: int
    wifi_drops_laa_occupied: int
    wifi_drops_total: int
    p_bl_hat: float
    p_bw_hat: float
    ci95_bl: float
    ci95_bw: float
    occupancy: Mapping[SystemState, float]
    sim_time: float
    events: int
    rng: str = RNG_ALGORITHM

    @property
    def p_bw_total_hat(self) -> float:
        """Wi-Fi loss fraction including arrivals blocked by Wi-Fi itself."""
        return self.wifi_drops_total / self.wifi_arrivals if self.wifi_arrivals else 0.0


class Simulation:
    """A single run; drive it with :meth:`step` or :meth:`run_to_end`."""

    def __init__(self, config: SimConfig):
        self.config = config
        sc = config.scheme
        self.scheme = sc.scheme
        self.D, self.Q = sc.D, sc.Q
        self.qt = sc.q_theta if sc.q_theta is not None else 0
        self.rng = UniformStream(config.seed)

        self._laa_arr = config.arrival_spec("laa_arrival")
        self._wifi_arr = config.arrival_spec("wifi_arrival")
        self._laa_svc = config.spec("laa_service")
        self._wifi_svc = config.spec("wifi_service")
        self._sensing = config.spec("sensing")
        self._on = config.spec("on")
        self._off = config.spec("off")
        self._start = DistributionSpec.exponential(config.rates.mu_on_prime)

        self.time = 0.0
        self.w = int(sc.scheme.phases[0])
        self.x = self.y = self.z = 0
        self._heap: list = []
        self._seq = 0
        self._start_token = 0
        self._start_armed = False

        self.sessions_done = 0
        n_b = config.batches
        self._batch_edges = [((b + 1) * config.sessions) // n_b for b in range(n_b)]
        self._batch = 0
        self.laa_arr_b = [0] * n_b
        self.laa_drop_b = [0] * n_b
        self.wifi_arr_b = [0] * n_b
        self.wifi_drop_b = [0] * n_b
        self.laa_drops_total = 0
        self.laa_served_direct = 0
        self.laa_buffered = 0
        self.wifi_drops_total = 0
        self.events = 0
        self._occ: dict = {}
        self.trace: list[EventRecord] | None = [] if config.trace else None

        if self._laa_arr is not None:
            self._schedule(sample(self._laa_arr, self.rng), EventKind.LaaArrival)
        if self._wifi_arr is not None:
            self._schedule(sample(self._wifi_arr, self.rng), EventKind.WifiArrival)
        if self.scheme.time_division:
            self._enter_phase(self.w)

    # -- scheduling ---------------------------------------------------------
    def _schedule(self, delay: float, kind: EventKind, token: int = 0):
        self._seq += 1
        heapq.heappush(self._heap, (self.time + delay, int(kind), self._seq, token))

    def _enter_phase(self, w: int):
        self.w = w
        if w == Phase.ON:
            self._schedule(sample(self._on, self.rng), EventKind.PhaseTimerExpiry)
        elif w == Phase.SENSING:
            self._schedule(sample(self._sensing, self.rng), EventKind.SensingComplete)
        else:
            self._schedule(sample(self._off, self.rng), EventKind.PhaseTimerExpiry)

    def _refresh_service_start(self):
        # timed schemes start queued LAA service after a short delay while ON and no Wi-Fi holds a channel
        want = (self.scheme.time_division and self.w == Phase.ON and self.y == 0 and self.z > 0
                and self.x + self.y < self.D)
        if want and not self._start_armed:
            self._start_token += 1
            self._start_armed = True
            self._schedule(sample(self._start, self.rng), EventKind.ServiceStart, self._start_token)
        elif not want and self._start_armed:
            self._start_token += 1
            self._start_armed = False

    @property
    def state(self) -> SystemState:
        return SystemState(self.w, self.x, self.y, self.z)

    @property
    def finished(self) -> bool:
        return self.sessions_done >= self.config.sessions

    # -- event handlers -----------------------------------------------------
    def _laa_arrival(self):
        b = self._batch
        self.laa_arr_b[b] += 1
        free = self.D - self.x - self.y
        s = self.scheme
        if s is Scheme.UFA:
            serve = free > 0 and self.z == 0
            buffer = self.z < self.Q and free == 0
        elif s is Scheme.UFAB:
            serve = free > 0 and self.z >= self.qt
            buffer = self.z < self.Q and (free == 0 or self.z < self.qt)
        else:
            on = self.w == Phase.ON
            serve = on and free > 0 and self.z == 0
            buffer = self.z < self.Q and (free == 0 or not on)
        if serve:
            self.x += 1
            self.laa_served_direct += 1
            self._schedule(sample(self._laa_svc, self.rng), EventKind.LaaDeparture)
        elif buffer:
            self.z += 1
            self.laa_buffered += 1
        else:
            self.laa_drops_total += 1
            if self.z == self.Q:
                self.laa_drop_b[b] += 1
        self._schedule(sample(self._laa_arr, self.rng), EventKind.LaaArrival)

    def _wifi_arrival(self):
        b = self._batch
        self.wifi_arr_b[b] += 1
        free = self.D - self.x - self.y
        s = self.scheme
        if s is Scheme.UFA:
            admit = free > 0 and self.z == 0
        elif s is Scheme.UFAB:
            admit = free > 0 and self.z < self.qt
        else:
            admit = free > 0
        if admit:
            self.y += 1
            self._schedule(sample(self._wifi_svc, self.rng), EventKind.WifiDeparture)
        else:
            self.wifi_drops_total += 1
            if self.x == self.D:
                self.wifi_drop_b[b] += 1
        self._schedule(sample(self._wifi_arr, self.rng), EventKind.WifiArrival)

    def _queue_may_take_channel(self) -> bool:
        """Whether a channel released by a departure passes straight to the queue head."""
        if self.z == 0:
            return False
        s = self.scheme
        if s is Scheme.UFA:
            return True
        if s is Scheme.UFAB:
            return self.z >= self.qt
        return self.w == Phase.ON

    def _laa_departure(self):
        if self._queue_may_take_channel():
            self.z -= 1
            self._schedule(sample(self._laa_svc, self.rng), EventKind.LaaDeparture)
        else:
            self.x -= 1

    def _wifi_departure(self):
        if self._queue_may_take_channel():
            self.y -= 1
            self.x += 1
            self.z -= 1
            self._schedule(sample(self._laa_svc, self.rng), EventKind.LaaDeparture)
        else:
            self.y -= 1

    def _service_start(self):
        self._start_armed = False
        self.x += 1
        self.z -= 1
        self._schedule(sample(self._laa_svc, self.rng), EventKind.LaaDeparture)

    def _backlog_wants_channel(self) -> bool:
        return self.z > self.qt if self.scheme is Scheme.UTAB else self.z > 0

    def _backlog_gives_up(self) -> bool:
        return self.z < self.qt if self.scheme is Scheme.UTAB else self.z == 0

    def _phase_expiry(self):
        if self.w == Phase.ON:
            self._enter_phase(Phase.SENSING)
        elif self._backlog_wants_channel():
            self._enter_phase(Phase.SENSING)
        else:
            self._enter_phase(Phase.OFF)  # nothing to send yet: stay idle another period

    def _sensing_complete(self):
        idle = self.x == 0 and self.y == 0
        if idle and self._backlog_wants_channel():
            self._enter_phase(Phase.ON)
        elif (self.x == 0 and self.y > 0) or self._backlog_gives_up():
            self._enter_phase(Phase.OFF)
        else:
            self._enter_phase(Phase.SENSING)  # own transmission still draining: sense again

    _HANDLERS = {
        EventKind.LaaArrival: _laa_arrival,
        EventKind.WifiArrival: _wifi_arrival,
        EventKind.LaaDeparture: _laa_departure,
        EventKind.WifiDeparture: _wifi_departure,
        EventKind.PhaseTimerExpiry: _phase_expiry,
        EventKind.SensingComplete: _sensing_complete,
        EventKind.ServiceStart: _service_start,
    }

    # -- driving ------------------------------------------------------------
    def step(self) -> EventRecord:
        """Process exactly one (non-cancelled) event and return its record."""
        if self.finished:
            raise FinishedError(f"session target {self.config.sessions} already reached")
        heap = self._heap
        while True:
            t, kind, _, token = heapq.heappop(heap)
            if kind == EventKind.ServiceStart and token != self._start_token:
                continue
            break
        key = (self.w, self.x, self.y, self.z)
        self._occ[key] = self._occ.get(key, 0.0) + (t - self.time)
        self.time = t
        kind = EventKind(kind)
        self._HANDLERS[kind](self)
        if kind >= EventKind.LaaArrival:
            self.sessions_done += 1
            if self.sessions_done == self._batch_edges[self._batch] and self._batch + 1 < len(self._batch_edges):
                self._batch += 1
        if self.scheme.time_division:
            self._refresh_service_start()
        self.events += 1
        rec = EventRecord(t, kind, SystemState(self.w, self.x, self.y, self.z))
        if self.trace is not None:
            self.trace.append(rec)
        return rec

    def run_to_end(self) -> SimStats:
        step = self.step
        while self.sessions_done < self.config.sessions:
            step()
        return self.stats()

    def stats(self) -> SimStats:
        bl = batch_ratio(self.laa_drop_b, self.laa_arr_b)
        bw = batch_ratio(self.wifi_drop_b, self.wifi_arr_b)
        total = self.time
        if total > 0:
            occ = {SystemState(*k): v / total for k, v in sorted(self._occ.items()) if v > 0}
        else:
            occ = {self.state: 1.0}
        return SimStats(
            scheme=self.scheme.value,
            seed=self.config.seed,
            sessions=self.sessions_done,
            laa_arrivals=sum(self.laa_arr_b),
            laa_drops=sum(self.laa_drop_b),
            laa_drops_total=self.laa_drops_total,
            laa_served_direct=self.laa_served_direct,
            laa_buffered=self.laa_buffered,
            wifi_arrivals=sum(self.wifi_arr_b),
            wifi_drops_laa_occupied=sum(self.wifi_drop_b),
            wifi_drops_total=self.wifi_drops_total,
            p_bl_hat=bl.value,
            p_bw_hat=bw.value,
            ci95_bl=bl.half_width,
            ci95_bw=bw.half_width,
            occupancy=occ,
            sim_time=total,
            events=self.events,
        )


def run(config: SimConfig) -> SimStats:
    """Simulate until ``config.sessions`` arrivals (LAA plus Wi-Fi) have been processed."""
    return Simulation(config).run_to_end()


def write_trace(records, fp: IO[str]) -> None:
    """One event per line: ``time kind w x y z`` with times in round-trip precision."""
    fp.write("# time kind w x y z\n")
    for r in records:
        fp.write(f"{r.time!r} {r.kind.name} {r.state.w} {r.state.x} {r.state.y} {r.state.z}\n")
