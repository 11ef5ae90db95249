"""Event queue, clock and run loop."""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Any, Callable

from scorsim.errors import ConfigError, RegistrationError, SimulationFault
from scorsim.rng import Dist, RngStreams


class EventKind(enum.Enum):
    OrderArrival = "OrderArrival"
    BurstArrival = "BurstArrival"
    MessageDelivery = "MessageDelivery"
    ServiceEnd = "ServiceEnd"
    WorkerQuit = "WorkerQuit"
    WorkerHired = "WorkerHired"
    HorizonEnd = "HorizonEnd"

    __hash__ = object.__hash__  # members compare by identity


@dataclass(eq=False, slots=True)
class Event:
    time: float
    seq: int
    target: Any
    kind: EventKind
    payload: Any = None
    cancelled: bool = False

    def cancel(self) -> None:
        self.cancelled = True

    def trace_line(self) -> str:
        return f"{self.time!r}\t{self.seq}\t{self.target}\t{self.kind.value}"


@dataclass(frozen=True)
class RunSummary:
    dispatched: int
    final_clock: float


def check_time(value: float, what: str = "time") -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ConfigError(f"{what} must be finite and >= 0, got {value}")
    return value


class Kernel:
    """Single-threaded discrete-event kernel.

    Agents are objects with a ``handle(event, kernel)`` method, registered
    under a hashable id. Observers are callables ``(signal, time, data)``
    that receive model signals published through :meth:`publish` as well as
    the final ``HorizonEnd``.
    """

    def __init__(self, master_seed: int = 0, *, trace: bool = False):
        self.clock = 0.0
        self.rng = RngStreams(master_seed)
        self.agents: dict[Any, Any] = {}
        self.observers: list[Callable[[str, float, dict], None]] = []
        self._queue: list[tuple[float, int, Event]] = []
        self._seq = 0
        self._running = False
        self.trace: list[str] | None = [] if trace else None

    def register(self, agent_id, agent) -> None:
        self.agents[agent_id] = agent

    def add_observer(self, observer: Callable[[str, float, dict], None]) -> None:
        self.observers.append(observer)

    def publish(self, signal: str, **data) -> None:
        for obs in self.observers:
            obs(signal, self.clock, data)

    def schedule(self, delay: float, target, kind: EventKind, payload=None) -> Event:
        if not (delay >= 0 and math.isfinite(delay)):
            raise ConfigError(f"schedule delay must be finite and >= 0, got {delay}")
        if target not in self.agents:
            raise RegistrationError(f"no agent registered as {target!r}")
        ev = Event(self.clock + delay, self._seq, target, kind, payload)
        self._seq += 1
        heapq.heappush(self._queue, (ev.time, ev.seq, ev))
        return ev

    def sample(self, stream: str, dist: Dist) -> float:
        return self.rng.sample(stream, dist)

    def reseed(self, master_seed: int) -> None:
        if self._running:
            raise SimulationFault("cannot reseed while a run is in progress")
        self.rng.reseed(master_seed)

    def pending(self) -> int:
        return sum(1 for _, _, ev in self._queue if not ev.cancelled)

    def run(self, horizon: float) -> RunSummary:
        horizon = check_time(horizon, "horizon")
        if horizon <= 0:
            raise ConfigError("horizon must be > 0")
        if not self.agents:
            raise RegistrationError("run() with no registered agents")
        queue = self._queue
        agents = self.agents
        trace = self.trace
        dispatched = 0
        self._running = True
        try:
            while queue and queue[0][0] <= horizon:
                _, _, ev = heapq.heappop(queue)
                if ev.cancelled:
                    continue
                self.clock = ev.time
                if trace is not None:
                    trace.append(ev.trace_line())
                try:
                    agents[ev.target].handle(ev, self)
                except SimulationFault as exc:
                    if exc.event is None:
                        exc.event = ev
                    raise
                except (ConfigError, RegistrationError):
                    raise
                except Exception as exc:
                    raise SimulationFault(
                        f"handler for {ev.kind.value} at t={ev.time} (seq {ev.seq}) "
                        f"on {ev.target} failed: {exc!r}",
                        ev,
                    ) from exc
                dispatched += 1
            self.clock = horizon
            end = Event(horizon, self._seq, "*", EventKind.HorizonEnd)
            self._seq += 1
            if trace is not None:
                trace.append(end.trace_line())
            for obs in self.observers:
                obs("HorizonEnd", horizon, {})
        finally:
            self._running = False
        return RunSummary(dispatched, self.clock)

    def trace_text(self) -> str:
        if self.trace is None:
            raise SimulationFault("kernel was built without tracing")
        return "".join(line + "\n" for line in self.trace)
