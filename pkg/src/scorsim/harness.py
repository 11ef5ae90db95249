"""Scenario runs, replications and the one-factor sensitivity suite.

Replication ``r`` of any scenario uses master seed ``spec.master_seed + r``,
so a baseline and a perturbed scenario compared replication by replication
share every random stream (common random numbers).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

from scorsim.agents import AgentId, Customer, Distributor, Manufacturer, MsgKind, Supplier
from scorsim.errors import SimulationFault
from scorsim.kernel import EventKind, Kernel
from scorsim.metrics import MEASUREMENTS, CardBuilder, ScorCard
from scorsim.scenario import (
    EnableBurst,
    ErrorDelta,
    Perturbation,
    ScenarioSpec,
    SupplierLeadTime,
    TurnoverMultiplier,
    apply_perturbation,
    validate_spec,
)

Z95 = 1.959963984540054
APPROX_ZERO_PCT = 0.01


class Simulation:
    """One world: kernel, the four agents and a card builder."""

    def __init__(self, spec: ScenarioSpec, master_seed: int | None = None, *,
                 trace: bool = False, timeseries: bool = False):
        self.spec = spec
        self.seed = spec.master_seed if master_seed is None else master_seed
        self.kernel = Kernel(self.seed, trace=trace)
        self.customer = Customer(spec)
        self.distributor = Distributor(spec)
        self.manufacturer = Manufacturer(spec)
        self.supplier = Supplier(spec)
        for agent_id, agent in ((AgentId.Customer, self.customer), (AgentId.Distributor, self.distributor),
                                (AgentId.Manufacturer, self.manufacturer), (AgentId.Supplier, self.supplier)):
            self.kernel.register(agent_id, agent)
        self.builder = CardBuilder(spec.warmup_days, timeseries=timeseries)
        self.kernel.add_observer(self.builder)
        self.summary = None

    def run(self) -> ScorCard:
        k = self.kernel
        self.manufacturer.start(k)
        self.customer.start(k)
        self.summary = k.run(self.spec.horizon_days)
        return self.builder.finalize(self.spec.horizon_days, self.spec.name, self.seed)

    def in_flight(self, recipient: AgentId, kind: MsgKind) -> int:
        """Quantity (or count, for qty-less messages) of undelivered messages."""
        total = 0
        for _, _, ev in self.kernel._queue:
            if ev.cancelled or ev.kind is not EventKind.MessageDelivery:
                continue
            msg = ev.payload
            if msg.recipient is recipient and msg.kind is kind:
                total += msg.qty if msg.qty is not None else 1
        return total

    def check_conservation(self) -> None:
        """Unit, demand and raw-material identities; raises SimulationFault."""
        self.manufacturer.check_conservation()
        cust, dist, mfr = self.customer, self.distributor, self.manufacturer
        demanded = cust.demanded_units()
        delivered = cust.delivered_units()
        orders = {o.order_id: o for o in cust.orders.values()}
        notices = sum(orders[ev.payload.order_id].qty for _, _, ev in self.kernel._queue
                      if not ev.cancelled and ev.kind is EventKind.MessageDelivery
                      and ev.payload.kind is MsgKind.DeliveryNotice)
        outstanding = (sum(dist.open.values()) + self.in_flight(AgentId.Distributor, MsgKind.PurchaseOrder) + notices)
        if demanded != delivered + outstanding:
            raise SimulationFault(f"demand conservation: demanded {demanded} != delivered {delivered} "
                                  f"+ outstanding {outstanding}")
        in_progress = sum(wo.good for wo in mfr.work_orders.values())
        shipped_goods = dist.shipped + self.in_flight(AgentId.Distributor, MsgKind.GoodsShipment)
        if mfr.good != shipped_goods + in_progress:
            raise SimulationFault(f"good units {mfr.good} != shipped {shipped_goods} + held {in_progress}")


def run_scenario(spec: ScenarioSpec, master_seed: int | None = None) -> ScorCard:
    validate_spec(spec, warn_overload=False)
    return Simulation(spec, master_seed).run()


@dataclass(frozen=True)
class MetricSummary:
    mean: float | None
    stddev: float | None
    ci_low: float | None
    ci_high: float | None
    n: int


@dataclass
class ReplicationSummary:
    scenario: str
    seeds: list[int]
    cards: list[ScorCard]
    metrics: dict[str, MetricSummary] = field(default_factory=dict)


def summarize(values: list[float | None]) -> MetricSummary:
    xs = [v for v in values if v is not None]
    if not xs:
        return MetricSummary(None, None, None, None, 0)
    mean = math.fsum(xs) / len(xs)
    if len(xs) < 2:
        return MetricSummary(mean, None, None, None, len(xs))
    sd = statistics.stdev(xs)
    half = Z95 * sd / math.sqrt(len(xs))
    return MetricSummary(mean, sd, mean - half, mean + half, len(xs))


def run_replications(spec: ScenarioSpec, replications: int | None = None, *,
                     check: bool = False) -> ReplicationSummary:
    """Run replications ``0..n-1`` with seeds ``master_seed + r``.

    With ``check=True`` the conservation identities are verified at the end
    of every replication.
    """
    n = spec.replications if replications is None else replications
    if n < 2:
        raise ValueError("run_replications needs at least 2 replications")
    validate_spec(spec, warn_overload=False)
    seeds = [spec.master_seed + r for r in range(n)]
    cards = []
    for r, seed in enumerate(seeds):
        sim = Simulation(spec, seed)
        try:
            cards.append(sim.run())
            if check:
                sim.check_conservation()
        except SimulationFault as exc:
            raise SimulationFault(f"replication {r} (seed {seed}): {exc}", exc.event) from exc
    names = cards[0].metrics.keys()
    metrics = {name: summarize([c.value(name) for c in cards]) for name in names}
    return ReplicationSummary(spec.name, seeds, cards, metrics)


def percent_delta(baseline: float | None, perturbed: float | None) -> float | None:
    """100 * (perturbed - baseline) / baseline; None when undefined."""
    if baseline is None or perturbed is None or baseline == 0:
        return None
    return 100.0 * (perturbed - baseline) / baseline


# --------------------------------------------------------------------------
# sensitivity suite


@dataclass(frozen=True)
class SuiteRow:
    attribute: str
    metric: str
    issue: str
    perturbation: Perturbation
    expected: dict[str, str]  # measurement -> "+" / "-"


TABLE_ROWS = (
    SuiteRow("Asset", "Resource turns", "Turnover (32% increased)",
             TurnoverMultiplier(1.32), {"cycle_time": "+", "waiting_time_in_process": "+"}),
    SuiteRow("Supply chain reliability", "Fill rate",
             "Demand fluctuation rate (Interruption 20 units every UNIF (10 , 15) days)",
             EnableBurst(20, 10.0, 15.0),
             {"worker_utilization": "+", "waiting_time_in_process": "+", "wip_average": "+"}),
    SuiteRow("Cost", "Value added employee productivity", "Human error (Increased 5%)",
             ErrorDelta(0.05), {"cycle_time": "+", "worker_utilization": "+", "rejected_parts": "+"}),
    SuiteRow("Responsiveness", "Order fulfillment lead time", "Supplier lead time (1day to 7 days)",
             SupplierLeadTime(7.0), {"cycle_time": "+", "wip_average": "+"}),
)

# cells with no expected direction; the measured delta is still reported
UNSIGNED_CELLS = {
    "Turnover (32% increased)": {"rejected_parts"},
    "Demand fluctuation rate (Interruption 20 units every UNIF (10 , 15) days)": {"cycle_time", "rejected_parts"},
    "Supplier lead time (1day to 7 days)": {"rejected_parts"},
}


@dataclass
class DeltaCell:
    delta: float | None          # percent, on replication means
    ci_low: float | None         # 95% CI of the paired mean difference, in percent of the baseline mean
    ci_high: float | None
    expected: str | None         # "+", "-" or None
    verdict: str                 # PASS / FAIL / N/A

    @property
    def approx_zero(self) -> bool:
        return self.delta is not None and abs(self.delta) < APPROX_ZERO_PCT


@dataclass
class ReportRow:
    attribute: str
    metric: str
    issue: str
    perturbation: str
    scenario: str
    cells: dict[str, DeltaCell]
    baseline: dict[str, MetricSummary]
    perturbed: dict[str, MetricSummary]
    notes: list[str] = field(default_factory=list)
    # measurement -> (baseline values, perturbed values), by replication
    per_replication: dict[str, tuple[list, list]] = field(default_factory=dict)


@dataclass
class SensitivityReport:
    baseline: str
    replications: int
    master_seed: int
    seeds: list[int]
    rows: list[ReportRow]

    def verdicts(self) -> dict[tuple[str, str], str]:
        return {(row.issue, m): c.verdict for row in self.rows for m, c in row.cells.items()}

    def all_pass(self) -> bool:
        return all(v != "FAIL" for v in self.verdicts().values())


def paired_delta(base: list[float | None], pert: list[float | None], expected: str | None) -> DeltaCell:
    """Percent delta of means plus a paired 95% CI and a sign verdict.

    A sign PASS needs the whole CI on the expected side of zero.
    """
    pairs = [(b, p) for b, p in zip(base, pert) if b is not None and p is not None]
    if not pairs:
        return DeltaCell(None, None, None, expected, "N/A" if expected is None else "FAIL")
    bmean = math.fsum(b for b, _ in pairs) / len(pairs)
    pmean = math.fsum(p for _, p in pairs) / len(pairs)
    delta = percent_delta(bmean, pmean)
    lo = hi = None
    if delta is not None and len(pairs) >= 2:
        diffs = [p - b for b, p in pairs]
        dmean = math.fsum(diffs) / len(diffs)
        half = Z95 * statistics.stdev(diffs) / math.sqrt(len(diffs))
        lo, hi = 100.0 * (dmean - half) / abs(bmean), 100.0 * (dmean + half) / abs(bmean)
    if expected is None:
        verdict = "N/A"
    elif lo is None:
        verdict = "FAIL"
    elif expected == "+":
        verdict = "PASS" if lo > 0 else "FAIL"
    else:
        verdict = "PASS" if hi < 0 else "FAIL"
    return DeltaCell(delta, lo, hi, expected, verdict)


def compare_scenarios(base: ReplicationSummary, pert: ReplicationSummary,
                      expected: dict[str, str] | None = None,
                      metrics: tuple[str, ...] = MEASUREMENTS) -> dict[str, DeltaCell]:
    if base.seeds != pert.seeds:
        raise ValueError("scenarios were not run on common seeds")
    expected = expected or {}
    return {m: paired_delta([c.value(m) for c in base.cards], [c.value(m) for c in pert.cards], expected.get(m))
            for m in metrics}


def sensitivity_suite(baseline: ScenarioSpec, replications: int | None = None, rows=TABLE_ROWS, *,
                      base: ReplicationSummary | None = None, check: bool = False) -> SensitivityReport:
    """Run the baseline and each one-factor perturbation on common seeds.

    ``base`` reuses baseline replications that were already run on the
    same seeds; ``check`` verifies conservation after every replication.
    """
    n = baseline.replications if replications is None else replications
    if base is None:
        base = run_replications(baseline, n, check=check)
    elif base.seeds != [baseline.master_seed + r for r in range(n)]:
        raise ValueError("precomputed baseline was run on different seeds")
    report_rows = []
    for row in rows:
        spec = apply_perturbation(baseline, row.perturbation)
        pert = run_replications(spec, n, check=check)
        cells = compare_scenarios(base, pert, row.expected)
        notes = []
        for m in sorted(UNSIGNED_CELLS.get(row.issue, ())):
            notes.append(f"{m}: no expected direction; measured delta shown for reference")
        report_rows.append(ReportRow(row.attribute, row.metric, row.issue, row.perturbation.tag, spec.name,
                                     cells, {m: base.metrics[m] for m in MEASUREMENTS},
                                     {m: pert.metrics[m] for m in MEASUREMENTS}, notes,
                                     {m: ([c.value(m) for c in base.cards], [c.value(m) for c in pert.cards])
                                      for m in MEASUREMENTS}))
    return SensitivityReport(baseline.name, n, baseline.master_seed, base.seeds, report_rows)
