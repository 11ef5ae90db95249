"""SCOR card accumulation.

A :class:`CardBuilder` is attached to a kernel as an observer. It keeps
time-weighted integrals of the step functions (WIP, busy workers, staffed
positions, raw stock) and tallies per unit and per order, all truncated at
the warm-up boundary, and turns them into a :class:`ScorCard` at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from scorsim.errors import ConfigError, SimulationFault


class Metric(NamedTuple):
    value: float | int | None  # None == not computed
    unit: str

    @property
    def computed(self) -> bool:
        return self.value is not None


# name -> (SCOR performance attribute, unit). Order is the card's key order.
CATALOG: dict[str, tuple[str, str]] = {
    # measurements of the Make stage
    "cycle_time": ("Measurement", "days"),
    "worker_utilization": ("Measurement", "fraction"),
    "waiting_time_in_process": ("Measurement", "days"),
    "wip_average": ("Measurement", "units"),
    "rejected_parts": ("Measurement", "count"),
    # Level-1 metrics
    "delivery_performance": ("Reliability", "fraction"),
    "fill_rate": ("Reliability", "fraction"),
    "perfect_order_fulfilment": ("Reliability", "fraction"),
    "order_fulfilment_lead_time": ("Responsiveness", "days"),
    "demand_chain_response_time": ("Responsiveness", "days"),
    "delivery_flexibility": ("Flexibility", "days"),
    "sc_management_cost": ("Cost", "currency"),
    "cost_of_goods_sold": ("Cost", "currency"),
    "value_added_productivity": ("Cost", "units/worker-day"),
    "cash_to_cash": ("Asset", "days"),
    "inventory_days_of_supply": ("Asset", "days"),
    "asset_turns": ("Asset", "ratio"),
    # diagnostics used by the queueing and Little's-law checks
    "queue_wip_average": ("Diagnostic", "units"),
    "throughput_all": ("Diagnostic", "units/day"),
    "flow_time_all": ("Diagnostic", "days"),
    "inspections": ("Diagnostic", "count"),
}

# no cost or price data exists for these; they stay empty schema slots
NOT_COMPUTED = frozenset({
    "cash_to_cash", "asset_turns", "cost_of_goods_sold",
    "sc_management_cost", "delivery_flexibility", "demand_chain_response_time",
})

COUNT_METRICS = frozenset(name for name, (_, unit) in CATALOG.items() if unit == "count")
FRACTION_METRICS = frozenset(name for name, (_, unit) in CATALOG.items() if unit == "fraction")

MEASUREMENTS = ("cycle_time", "worker_utilization", "waiting_time_in_process", "wip_average", "rejected_parts")


@dataclass(frozen=True)
class ScorCard:
    scenario: str
    seed: int
    metrics: dict[str, Metric] = field(default_factory=dict)

    def __getitem__(self, name: str):
        return self.metrics[name].value

    def value(self, name: str) -> float | None:
        return self.metrics[name].value

    def rounded(self, digits: int = 6) -> "ScorCard":
        return ScorCard(self.scenario, self.seed,
                        {k: Metric(round_sig(m.value, digits), m.unit) for k, m in self.metrics.items()})


def round_sig(value, digits: int = 6):
    if value is None or isinstance(value, int):
        return value
    if value == 0 or not math.isfinite(value):
        return float(value)
    return float(f"{value:.{digits}g}")


class TimeWeighted:
    """Integral of a step function, accruing only from ``start`` onwards."""

    __slots__ = ("value", "last", "integral", "start")

    def __init__(self, start: float, value: float = 0.0):
        self.start = start
        self.value = value
        self.last = 0.0
        self.integral = 0.0

    def accrue(self, t: float) -> None:
        lo = self.last if self.last > self.start else self.start
        if t > lo:
            self.integral += self.value * (t - lo)
        self.last = t

    def set(self, t: float, value: float) -> None:
        if value != self.value:
            self.accrue(t)
            self.value = value


class Tally:
    __slots__ = ("n", "total")

    def __init__(self):
        self.n = 0
        self.total = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        self.total += x

    def mean(self) -> float | None:
        return self.total / self.n if self.n else None


TIMESERIES_HEADER = ("time", "wip", "busy_workers", "staffed_positions", "raw_units")


class CardBuilder:
    """Kernel observer producing a :class:`ScorCard`.

    Signals understood: ``levels``, ``unit_done``, ``order_created``,
    ``order_fulfilled`` and ``HorizonEnd``. The manufacturer's first
    ``levels`` report initializes the step functions; anything else arriving
    before it is a fault.
    """

    def __init__(self, warmup: float, *, timeseries: bool = False):
        self.warmup = warmup
        self.initialized = False
        self.finished_at: float | None = None
        w = warmup
        self.wip = TimeWeighted(w)
        self.queue = TimeWeighted(w)
        self.busy = TimeWeighted(w)
        self.staffed = TimeWeighted(w)
        self.raw = TimeWeighted(w)
        self._consumed = 0
        self._consumed_at_warmup = 0
        self.cycle = Tally()
        self.waiting = Tally()
        self.flow = Tally()
        self.rejects = 0
        self.good = 0
        self.lead = Tally()
        self.on_time = 0
        self.perfect = 0
        self.rejected_orders: set[int] = set()
        self.cohort = []  # orders created after warm-up, for the fill rate
        self.timeseries: list[tuple] | None = [] if timeseries else None

    def __call__(self, signal: str, t: float, data: dict) -> None:
        if signal == "levels":
            self._levels(t, data)
            return
        if not self.initialized:
            raise SimulationFault(f"metrics signal {signal!r} before initialization")
        post = t >= self.warmup
        if signal == "unit_done":
            unit = data["unit"]
            good = unit.disposition.value == "Good"
            if not good:
                self.rejected_orders.add(unit.order_id)
            if post:
                self.flow.add(unit.completed_at - unit.released_at)
                self.waiting.add(unit.service_start - unit.released_at)
                if good:
                    self.good += 1
                    self.cycle.add(unit.completed_at - unit.released_at)
                else:
                    self.rejects += 1
        elif signal == "order_created":
            if post:
                self.cohort.append(data["order"])
        elif signal == "order_fulfilled":
            if post:
                order = data["order"]
                self.lead.add(order.fulfilled_at - order.created_at)
                on_time = order.fulfilled_at <= order.due_at
                self.on_time += on_time
                self.perfect += on_time and order.order_id not in self.rejected_orders
        elif signal == "HorizonEnd":
            for acc in (self.wip, self.queue, self.busy, self.staffed, self.raw):
                acc.accrue(t)
            self.finished_at = t

    def _levels(self, t: float, d: dict) -> None:
        if not self.initialized:
            self.initialized = True
            self.wip.value, self.queue.value = d["wip"], d["queue"]
            self.busy.value, self.staffed.value, self.raw.value = d["busy"], d["staffed"], d["raw"]
            for acc in (self.wip, self.queue, self.busy, self.staffed, self.raw):
                acc.last = t
            if self.timeseries is not None:
                self.timeseries.append((t, d["wip"], d["busy"], d["staffed"], d["raw"]))
        else:
            if self.timeseries is not None and (
                d["wip"] != self.wip.value or d["busy"] != self.busy.value
                or d["staffed"] != self.staffed.value or d["raw"] != self.raw.value
            ):
                self.timeseries.append((t, d["wip"], d["busy"], d["staffed"], d["raw"]))
            self.wip.set(t, d["wip"])
            self.queue.set(t, d["queue"])
            self.busy.set(t, d["busy"])
            self.staffed.set(t, d["staffed"])
            self.raw.set(t, d["raw"])
        if t < self.warmup:
            self._consumed_at_warmup = d["consumed"]
        self._consumed = d["consumed"]

    def finalize(self, horizon: float, scenario: str = "", seed: int = 0) -> ScorCard:
        if horizon <= self.warmup:
            raise ConfigError(f"horizon {horizon} must exceed warm-up {self.warmup}")
        if self.finished_at is None:
            raise SimulationFault("finalize() before the run reached HorizonEnd")
        span = horizon - self.warmup
        busy_days = self.busy.integral
        consumed = self._consumed - self._consumed_at_warmup

        fulfilled = self.lead.n
        due = [o for o in self.cohort if o.due_at <= horizon]
        demanded = sum(o.qty for o in due)
        filled = sum(o.qty for o in due if o.fulfilled_at is not None and o.fulfilled_at <= o.due_at)

        values = {
            "cycle_time": self.cycle.mean(),
            "worker_utilization": _ratio(busy_days, self.staffed.integral),
            "waiting_time_in_process": self.waiting.mean(),
            "wip_average": self.wip.integral / span,
            "rejected_parts": self.rejects,
            "delivery_performance": _ratio(self.on_time, fulfilled),
            "fill_rate": _ratio(filled, demanded),
            "perfect_order_fulfilment": _ratio(self.perfect, fulfilled),
            "order_fulfilment_lead_time": self.lead.mean(),
            "value_added_productivity": _ratio(self.good, busy_days),
            "inventory_days_of_supply": _ratio(self.raw.integral / span, consumed / span),
            "queue_wip_average": self.queue.integral / span,
            "throughput_all": self.flow.n / span,
            "flow_time_all": self.flow.mean(),
            "inspections": self.flow.n,
        }
        metrics = {}
        for name, (_, unit) in CATALOG.items():
            metrics[name] = Metric(None if name in NOT_COMPUTED else values[name], unit)
        return ScorCard(scenario, seed, metrics)


def _ratio(num: float, den: float) -> float | None:
    return num / den if den > 0 else None


def littles_law_residual(card: ScorCard, throughput: float | None = None) -> float | None:
    """Relative gap between time-average WIP and throughput x mean flow time.

    Uses every completed unit (good or rejected) and its release-to-completion
    time, so the identity holds for the Make stage as a whole. Returns None
    when the system was empty.
    """
    wip = card.value("wip_average")
    if not wip:
        return None
    if throughput is None:
        throughput = card.value("throughput_all")
    flow = card.value("flow_time_all")
    if flow is None or throughput is None:
        return None
    return abs(wip - throughput * flow) / wip
