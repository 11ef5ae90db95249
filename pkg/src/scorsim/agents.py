"""The four supply-chain agents and the messages they exchange.

Agents never hold references to one another; every interaction is a
:class:`Message` routed through the kernel with :func:`route_message`.
The manufacturer publishes model signals (unit completions, stock levels,
...) to kernel observers, which is how the metrics layer sees the run.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from scorsim.errors import SimulationFault
from scorsim.kernel import Event, EventKind, Kernel
from scorsim.rng import Bernoulli, Exponential, Uniform
from scorsim.scenario import ScenarioSpec


class AgentId(str, enum.Enum):
    Customer = "Customer"
    Distributor = "Distributor"
    Manufacturer = "Manufacturer"
    Supplier = "Supplier"

    __hash__ = str.__hash__  # C-level hash; consistent with str equality

    def __str__(self) -> str:
        return self.value


class MsgKind(enum.Enum):
    PurchaseOrder = "PurchaseOrder"
    MaterialOrder = "MaterialOrder"
    MaterialShipment = "MaterialShipment"
    GoodsShipment = "GoodsShipment"
    DeliveryNotice = "DeliveryNotice"
    ReturnNotice = "ReturnNotice"

    __hash__ = object.__hash__  # members compare by identity


_QTY_KINDS = {MsgKind.PurchaseOrder, MsgKind.MaterialOrder, MsgKind.MaterialShipment, MsgKind.GoodsShipment}

C, D, M, S = AgentId.Customer, AgentId.Distributor, AgentId.Manufacturer, AgentId.Supplier

LEGAL_CHANNELS: dict[tuple[AgentId, AgentId], frozenset[MsgKind]] = {
    (C, D): frozenset({MsgKind.PurchaseOrder}),
    (D, M): frozenset({MsgKind.PurchaseOrder}),
    (M, S): frozenset({MsgKind.MaterialOrder, MsgKind.ReturnNotice}),
    (S, M): frozenset({MsgKind.MaterialShipment}),
    (M, D): frozenset({MsgKind.GoodsShipment, MsgKind.DeliveryNotice}),
    (D, C): frozenset({MsgKind.GoodsShipment, MsgKind.DeliveryNotice}),
}


@dataclass(slots=True)
class Message:
    kind: MsgKind
    sender: AgentId
    recipient: AgentId
    sent_at: float = 0.0
    order_id: int | None = None
    qty: int | None = None
    unit_id: int | None = None


_LEGAL = frozenset((src, dst, kind) for (src, dst), kinds in LEGAL_CHANNELS.items() for kind in kinds)


def check_channel(msg: Message) -> None:
    if (msg.sender, msg.recipient, msg.kind) not in _LEGAL:
        raise SimulationFault(f"illegal channel: {msg.kind.value} {msg.sender} -> {msg.recipient}")
    if msg.kind in _QTY_KINDS and (msg.qty is None or msg.qty < 1):
        raise SimulationFault(f"{msg.kind.value} needs qty >= 1, got {msg.qty}")


def route_message(kernel: Kernel, msg: Message, transit: float = 0.0) -> Event:
    check_channel(msg)
    msg.sent_at = kernel.clock
    return kernel.schedule(transit, msg.recipient, EventKind.MessageDelivery, msg)


# --------------------------------------------------------------------------
# entities


@dataclass(slots=True)
class Order:
    order_id: int
    qty: int
    created_at: float
    due_at: float
    fulfilled_at: float | None = None
    burst: bool = False


class Disposition(enum.Enum):
    InQueue = "InQueue"
    InService = "InService"
    Good = "Good"
    Rejected = "Rejected"


@dataclass(slots=True)
class Unit:
    unit_id: int
    order_id: int
    released_at: float
    service_start: float | None = None
    completed_at: float | None = None
    disposition: Disposition = Disposition.InQueue


@dataclass(slots=True)
class WorkOrder:
    """Manufacturer-side view of a purchase order."""

    order_id: int
    qty: int
    good: int = 0
    first_pass: bool = True


class PositionState(enum.Enum):
    Idle = "Idle"
    Busy = "Busy"
    Vacant = "Vacant"


@dataclass(slots=True)
class Position:
    index: int
    state: PositionState = PositionState.Idle
    unit: Unit | None = None
    service_event: Event | None = None
    busy_days: float = 0.0


@dataclass
class Inventory:
    raw_units: int
    raw_on_order: int
    reorder_point: int
    order_quantity: int


# --------------------------------------------------------------------------
# agents


class Customer:
    """Demand source: Poisson orders plus optional periodic bursts."""

    def __init__(self, spec: ScenarioSpec):
        self.order_size = spec.demand.order_size
        self.interarrival = spec.interarrival_dist()
        self.quoted = spec.delivery.quoted_lead_time_days
        b = spec.demand.burst
        self.burst = (b.size, Uniform(b.interval_min_days, b.interval_max_days)) if b.enabled else None
        self.orders: dict[int, Order] = {}
        self._next_id = 1

    def start(self, kernel: Kernel) -> None:
        kernel.schedule(kernel.sample("demand_interarrival", self.interarrival), C, EventKind.OrderArrival)
        if self.burst is not None:
            kernel.schedule(kernel.sample("demand_burst", self.burst[1]), C, EventKind.BurstArrival)

    def _place(self, kernel: Kernel, qty: int, burst: bool) -> None:
        now = kernel.clock
        order = Order(self._next_id, qty, now, now + self.quoted, burst=burst)
        self._next_id += 1
        self.orders[order.order_id] = order
        kernel.publish("order_created", order=order)
        route_message(kernel, Message(MsgKind.PurchaseOrder, C, D, order_id=order.order_id, qty=qty))

    def handle(self, ev: Event, kernel: Kernel) -> None:
        if ev.kind is EventKind.OrderArrival:
            self._place(kernel, self.order_size, False)
            kernel.schedule(kernel.sample("demand_interarrival", self.interarrival), C, EventKind.OrderArrival)
        elif ev.kind is EventKind.BurstArrival:
            size, gap = self.burst
            self._place(kernel, size, True)
            kernel.schedule(kernel.sample("demand_burst", gap), C, EventKind.BurstArrival)
        elif ev.kind is EventKind.MessageDelivery and ev.payload.kind is MsgKind.DeliveryNotice:
            order = self.orders.get(ev.payload.order_id)
            if order is None or order.fulfilled_at is not None:
                raise SimulationFault(f"delivery notice for unknown or fulfilled order {ev.payload.order_id}")
            order.fulfilled_at = kernel.clock
            kernel.publish("order_fulfilled", order=order)
        else:
            raise SimulationFault(f"Customer cannot handle {_describe(ev)}")

    def demanded_units(self) -> int:
        return sum(o.qty for o in self.orders.values())

    def delivered_units(self) -> int:
        return sum(o.qty for o in self.orders.values() if o.fulfilled_at is not None)


class Distributor:
    def __init__(self, spec: ScenarioSpec):
        self.transit = spec.delivery.transit_days
        self.open: dict[int, int] = {}
        self.shipped = 0

    def handle(self, ev: Event, kernel: Kernel) -> None:
        msg = ev.payload
        if ev.kind is not EventKind.MessageDelivery:
            raise SimulationFault(f"Distributor cannot handle {_describe(ev)}")
        if msg.kind is MsgKind.PurchaseOrder and msg.sender is C:
            self.open[msg.order_id] = msg.qty
            route_message(kernel, Message(MsgKind.PurchaseOrder, D, M, order_id=msg.order_id, qty=msg.qty),
                          self.transit)
        elif msg.kind is MsgKind.GoodsShipment and msg.sender is M:
            qty = self.open.pop(msg.order_id, None)
            if qty is None:
                raise SimulationFault(f"goods shipment for unknown order {msg.order_id}")
            if qty != msg.qty:
                raise SimulationFault(f"order {msg.order_id}: shipped {msg.qty} of {qty} units")
            self.shipped += qty
            route_message(kernel, Message(MsgKind.DeliveryNotice, D, C, order_id=msg.order_id), self.transit)
        else:
            raise SimulationFault(f"Distributor cannot handle {_describe(ev)}")


class Supplier:
    def __init__(self, spec: ScenarioSpec):
        self.lead = spec.lead_time_dist()
        self.material_orders = 0
        self.shipped_units = 0
        self.returns = 0

    def handle(self, ev: Event, kernel: Kernel) -> None:
        msg = ev.payload
        if ev.kind is not EventKind.MessageDelivery:
            raise SimulationFault(f"Supplier cannot handle {_describe(ev)}")
        if msg.kind is MsgKind.MaterialOrder:
            self.material_orders += 1
            self.shipped_units += msg.qty
            lead = kernel.sample("supplier_lead", self.lead)
            route_message(kernel, Message(MsgKind.MaterialShipment, S, M, qty=msg.qty), lead)
        elif msg.kind is MsgKind.ReturnNotice:
            self.returns += 1
        else:
            raise SimulationFault(f"Supplier cannot handle {_describe(ev)}")


class Manufacturer:
    """Make-to-order plant: material gating, a worker pool, inspection.

    Units needing production wait in ``pending`` until a raw unit is
    available; releasing one consumes the raw unit and puts the unit on the
    line queue, where it waits for an idle worker. Rejected units are
    scrapped and a replacement joins the tail of ``pending``.
    """

    def __init__(self, spec: ScenarioSpec):
        m, w = spec.manufacturer, spec.workforce
        self.service = spec.service_dist()
        self.inspection = Bernoulli(m.error_probability)
        # rate 0 -> nobody ever quits
        self.tenure = Exponential(365.0 / w.annual_turnover_rate) if w.annual_turnover_rate > 0 else None
        self.recruit = Uniform(w.recruit_min_days, w.recruit_max_days)
        self.inventory = Inventory(m.initial_raw, 0, m.reorder_point, m.order_quantity)
        self.initial_raw = m.initial_raw
        self.positions = [Position(i) for i in range(m.workers)]
        self.work_orders: dict[int, WorkOrder] = {}
        self.pending: deque[WorkOrder] = deque()
        self.line: deque[Unit] = deque()
        self._next_unit = 1
        # conservation bookkeeping
        self.released = 0
        self.good = 0
        self.rejected = 0
        self.consumed = 0
        self.arrived = 0
        self.busy = 0
        self.staffed = m.workers
        self.quits = 0
        self._last_levels = None

    # -- levels reported to observers after every state change
    def _report(self, kernel: Kernel) -> None:
        levels = (self.released - self.good - self.rejected, len(self.line), self.busy, self.staffed,
                  self.inventory.raw_units, self.consumed)
        if levels == self._last_levels:
            return
        self._last_levels = levels
        wip, queue, busy, staffed, raw, consumed = levels
        kernel.publish("levels", wip=wip, queue=queue, busy=busy, staffed=staffed, raw=raw, consumed=consumed)

    def start(self, kernel: Kernel) -> None:
        if self.tenure is not None:
            for pos in self.positions:
                kernel.schedule(kernel.sample("worker_tenure", self.tenure), M, EventKind.WorkerQuit, pos.index)
        self._check_reorder(kernel)
        self._report(kernel)

    def _check_reorder(self, kernel: Kernel) -> None:
        inv = self.inventory
        if inv.raw_units + inv.raw_on_order <= inv.reorder_point:
            inv.raw_on_order += inv.order_quantity
            route_message(kernel, Message(MsgKind.MaterialOrder, M, S, qty=inv.order_quantity))

    def handle(self, ev: Event, kernel: Kernel) -> None:
        kind = ev.kind
        if kind is EventKind.ServiceEnd:
            self._service_end(ev, kernel)
        elif kind is EventKind.MessageDelivery:
            msg = ev.payload
            if msg.kind is MsgKind.PurchaseOrder:
                wo = WorkOrder(msg.order_id, msg.qty)
                self.work_orders[wo.order_id] = wo
                self.pending.extend([wo] * wo.qty)
            elif msg.kind is MsgKind.MaterialShipment:
                self.inventory.raw_units += msg.qty
                self.inventory.raw_on_order -= msg.qty
                self.arrived += msg.qty
            else:
                raise SimulationFault(f"Manufacturer cannot handle {_describe(ev)}")
        elif kind is EventKind.WorkerQuit:
            self._quit(self.positions[ev.payload], kernel)
        elif kind is EventKind.WorkerHired:
            pos = self.positions[ev.payload]
            if pos.state is not PositionState.Vacant:
                raise SimulationFault(f"hire into non-vacant position {pos.index}")
            pos.state = PositionState.Idle
            self.staffed += 1
            kernel.schedule(kernel.sample("worker_tenure", self.tenure), M, EventKind.WorkerQuit, pos.index)
        else:
            raise SimulationFault(f"Manufacturer cannot handle {_describe(ev)}")
        self.release_work_orders(kernel)
        self._report(kernel)

    def release_work_orders(self, kernel: Kernel) -> None:
        inv = self.inventory
        pending, line = self.pending, self.line
        while pending and inv.raw_units >= 1:
            wo = pending.popleft()
            inv.raw_units -= 1
            self.consumed += 1
            self.released += 1
            line.append(Unit(self._next_unit, wo.order_id, kernel.clock))
            self._next_unit += 1
            self._check_reorder(kernel)
        if not line:
            return
        for pos in self.positions:
            if pos.state is PositionState.Idle:
                unit = line.popleft()
                unit.service_start = kernel.clock
                unit.disposition = Disposition.InService
                pos.state = PositionState.Busy
                pos.unit = unit
                self.busy += 1
                pos.service_event = kernel.schedule(
                    kernel.sample("service_time", self.service), M, EventKind.ServiceEnd, pos.index
                )
                if not line:
                    return

    def _free(self, pos: Position, kernel: Kernel) -> Unit:
        unit = pos.unit
        pos.busy_days += kernel.clock - unit.service_start
        pos.unit = None
        pos.service_event = None
        pos.state = PositionState.Idle
        self.busy -= 1
        return unit

    def _service_end(self, ev: Event, kernel: Kernel) -> None:
        pos = self.positions[ev.payload]
        if pos.state is not PositionState.Busy or pos.service_event is not ev:
            raise SimulationFault(f"ServiceEnd for non-busy position {pos.index}", ev)
        unit = self._free(pos, kernel)
        unit.completed_at = kernel.clock
        wo = self.work_orders[unit.order_id]
        if kernel.sample("inspection", self.inspection):
            unit.disposition = Disposition.Rejected
            self.rejected += 1
            wo.first_pass = False
            self.pending.append(wo)
            route_message(kernel, Message(MsgKind.ReturnNotice, M, S, unit_id=unit.unit_id))
        else:
            unit.disposition = Disposition.Good
            self.good += 1
            wo.good += 1
            if wo.good == wo.qty:
                del self.work_orders[wo.order_id]
                route_message(kernel, Message(MsgKind.GoodsShipment, M, D, order_id=wo.order_id, qty=wo.qty))
        kernel.publish("unit_done", unit=unit)

    def _quit(self, pos: Position, kernel: Kernel) -> None:
        if pos.state is PositionState.Vacant:
            raise SimulationFault(f"quit from vacant position {pos.index}")
        if pos.state is PositionState.Busy:
            pos.service_event.cancel()
            unit = self._free(pos, kernel)
            unit.service_start = None
            unit.disposition = Disposition.InQueue
            self.line.appendleft(unit)
        pos.state = PositionState.Vacant
        self.staffed -= 1
        self.quits += 1
        kernel.schedule(kernel.sample("recruitment", self.recruit), M, EventKind.WorkerHired, pos.index)

    def check_conservation(self) -> None:
        inv = self.inventory
        if self.released != self.good + self.rejected + len(self.line) + self.busy:
            raise SimulationFault(
                f"unit conservation: released {self.released} != good {self.good} + rejected "
                f"{self.rejected} + queued {len(self.line)} + in service {self.busy}"
            )
        if self.initial_raw + self.arrived != inv.raw_units + self.consumed:
            raise SimulationFault(
                f"raw conservation: {self.initial_raw} + {self.arrived} != {inv.raw_units} + {self.consumed}"
            )
        busy = sum(p.state is PositionState.Busy for p in self.positions)
        staffed = sum(p.state is not PositionState.Vacant for p in self.positions)
        if busy != self.busy or staffed != self.staffed or busy > staffed:
            raise SimulationFault(f"worker pool: busy {busy}/{self.busy}, staffed {staffed}/{self.staffed}")


def _describe(ev: Event) -> str:
    if ev.kind is EventKind.MessageDelivery:
        msg = ev.payload
        return f"{msg.kind.value} from {msg.sender}"
    return ev.kind.value
