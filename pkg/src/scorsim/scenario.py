"""Scenario parameterization, validation and one-factor perturbations.

A :class:`ScenarioSpec` is the complete description of one simulated world.
Specs are plain nested dataclasses; :func:`spec_from_dict` is strict about
unknown keys and fills everything missing from the defaults below.

The defaults other than the ones taken from the case study (10 workers,
bursts of 20 units every U(10, 15) days, supplier lead time of 1 day) are
implementation choices: they put the production line at roughly 80%
utilization so that every one-factor perturbation has room to show up.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

from scorsim.errors import ConfigError
from scorsim.rng import Constant, Dist, Exponential, dist_from_dict


class OverloadWarning(UserWarning):
    """Offered load meets or exceeds the line's effective capacity."""


@dataclass
class BurstConfig:
    enabled: bool = False
    size: int = 20
    interval_min_days: float = 10.0
    interval_max_days: float = 15.0


@dataclass
class DemandConfig:
    mean_interarrival_days: float = 0.1
    order_size: int = 1
    burst: BurstConfig = field(default_factory=BurstConfig)
    # None -> Exponential(mean_interarrival_days)
    interarrival_distribution: dict | None = None


@dataclass
class ManufacturerConfig:
    workers: int = 10
    service_mean_days: float = 0.75
    error_probability: float = 0.05
    reorder_point: int = 50
    order_quantity: int = 100
    initial_raw: int = 100
    # None -> Exponential(service_mean_days)
    service_distribution: dict | None = None


@dataclass
class SupplierConfig:
    lead_time_days: float = 1.0
    # None -> Constant(lead_time_days)
    lead_time_distribution: dict | None = None


@dataclass
class WorkforceConfig:
    annual_turnover_rate: float = 1.0
    recruit_min_days: float = 5.0
    recruit_max_days: float = 10.0


@dataclass
class DeliveryConfig:
    transit_days: float = 0.0
    quoted_lead_time_days: float = 3.0


@dataclass
class ScenarioSpec:
    name: str = "baseline"
    horizon_days: float = 2000.0
    warmup_days: float = 200.0
    replications: int = 20
    master_seed: int = 42
    demand: DemandConfig = field(default_factory=DemandConfig)
    manufacturer: ManufacturerConfig = field(default_factory=ManufacturerConfig)
    supplier: SupplierConfig = field(default_factory=SupplierConfig)
    workforce: WorkforceConfig = field(default_factory=WorkforceConfig)
    delivery: DeliveryConfig = field(default_factory=DeliveryConfig)

    # resolved distributions; the *_distribution dicts win over the mean fields

    def interarrival_dist(self) -> Dist:
        d = self.demand
        if d.interarrival_distribution is not None:
            return dist_from_dict(d.interarrival_distribution)
        return Exponential(d.mean_interarrival_days)

    def service_dist(self) -> Dist:
        m = self.manufacturer
        if m.service_distribution is not None:
            return dist_from_dict(m.service_distribution)
        return Exponential(m.service_mean_days)

    def lead_time_dist(self) -> Dist:
        s = self.supplier
        if s.lead_time_distribution is not None:
            return dist_from_dict(s.lead_time_distribution)
        return Constant(s.lead_time_days)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def offered_load(self) -> tuple[float, float]:
        """Expected worker-days demanded per day vs. expected staffed workers.

        Demand includes bursts and the rework inflation ``1 / (1 - p)``;
        capacity discounts the long-run vacancy fraction caused by turnover.
        """
        d, m, w = self.demand, self.manufacturer, self.workforce
        units_per_day = d.order_size / self.interarrival_dist().mean
        if d.burst.enabled:
            units_per_day += d.burst.size / (0.5 * (d.burst.interval_min_days + d.burst.interval_max_days))
        p = m.error_probability
        load = math.inf if p >= 1 else units_per_day * self.service_dist().mean / (1.0 - p)
        quits_per_day = w.annual_turnover_rate / 365.0
        recruit = 0.5 * (w.recruit_min_days + w.recruit_max_days)
        vacancy = quits_per_day * recruit / (1.0 + quits_per_day * recruit)
        return load, m.workers * (1.0 - vacancy)


# --------------------------------------------------------------------------
# strict dict -> spec conversion


def _coerce(value: Any, ftype: str, path: str) -> Any:
    if ftype == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if ftype == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if ftype == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if ftype == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if ftype == "dict | None":
        if value is not None and not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a distribution object or null, got {value!r}")
        if value is not None:
            try:
                dist_from_dict(value)
            except (ConfigError, KeyError) as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return copy.deepcopy(value)
    raise AssertionError(ftype)


def _build(cls, data: Any, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'scenario'}: expected an object, got {data!r}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key in data:
        if key not in fields:
            where = f"{prefix}.{key}" if prefix else key
            raise ConfigError(f"unknown key {where!r}")
    kwargs = {}
    for name, f in fields.items():
        if name not in data:
            continue
        path = f"{prefix}.{name}" if prefix else name
        if f.default_factory is not dataclasses.MISSING and dataclasses.is_dataclass(f.default_factory):
            kwargs[name] = _build(f.default_factory, data[name], path)
        else:
            kwargs[name] = _coerce(data[name], f.type, path)
    return cls(**kwargs)


def spec_from_dict(data: dict, *, validate: bool = True) -> ScenarioSpec:
    spec = _build(ScenarioSpec, data, "")
    if validate:
        validate_spec(spec)
    return spec


def _check(ok: bool, path: str, rule: str, value: Any) -> None:
    if not ok:
        raise ConfigError(f"{path}: {rule} (got {value!r})")


def validate_spec(spec: ScenarioSpec, *, warn_overload: bool = True) -> ScenarioSpec:
    """Raise :class:`ConfigError` naming the first violated bound."""
    s = spec
    _check(s.horizon_days > 0 and math.isfinite(s.horizon_days), "horizon_days", "horizon_days > 0", s.horizon_days)
    _check(s.warmup_days >= 0, "warmup_days", "warmup_days ≥ 0", s.warmup_days)
    _check(s.warmup_days < s.horizon_days, "warmup_days", "warmup < horizon", s.warmup_days)
    _check(s.replications >= 1, "replications", "replications ≥ 1", s.replications)
    _check(0 <= s.master_seed < 2**64, "master_seed", "0 ≤ master_seed < 2^64", s.master_seed)

    d = s.demand
    _check(d.mean_interarrival_days > 0, "demand.mean_interarrival_days", "mean_interarrival_days > 0",
           d.mean_interarrival_days)
    _check(d.order_size >= 1, "demand.order_size", "order_size ≥ 1", d.order_size)
    b = d.burst
    _check(b.size >= 1, "demand.burst.size", "size ≥ 1", b.size)
    _check(b.interval_min_days > 0, "demand.burst.interval_min_days", "interval_min > 0", b.interval_min_days)
    _check(b.interval_min_days <= b.interval_max_days, "demand.burst.interval_min_days",
           "interval_min ≤ interval_max", (b.interval_min_days, b.interval_max_days))

    m = s.manufacturer
    _check(m.workers >= 1, "manufacturer.workers", "workers ≥ 1", m.workers)
    _check(m.service_mean_days > 0, "manufacturer.service_mean_days", "service_mean_days > 0", m.service_mean_days)
    _check(0.0 <= m.error_probability <= 1.0, "manufacturer.error_probability",
           "error_probability ∈ [0, 1]", m.error_probability)
    _check(m.error_probability < 1.0, "manufacturer.error_probability",
           "error_probability < 1 (every unit would be rejected)", m.error_probability)
    _check(m.reorder_point >= 0, "manufacturer.reorder_point", "reorder_point ≥ 0", m.reorder_point)
    _check(m.order_quantity >= 1, "manufacturer.order_quantity", "order_quantity ≥ 1", m.order_quantity)
    _check(m.initial_raw >= 0, "manufacturer.initial_raw", "initial_raw ≥ 0", m.initial_raw)

    _check(s.supplier.lead_time_days >= 0, "supplier.lead_time_days", "lead_time_days ≥ 0", s.supplier.lead_time_days)

    w = s.workforce
    _check(w.annual_turnover_rate >= 0, "workforce.annual_turnover_rate", "annual_turnover_rate ≥ 0",
           w.annual_turnover_rate)
    _check(w.recruit_min_days >= 0, "workforce.recruit_min_days", "recruit_min_days ≥ 0", w.recruit_min_days)
    _check(w.recruit_min_days <= w.recruit_max_days, "workforce.recruit_min_days",
           "recruit_min ≤ recruit_max", (w.recruit_min_days, w.recruit_max_days))

    t = s.delivery
    _check(t.transit_days >= 0, "delivery.transit_days", "transit_days ≥ 0", t.transit_days)
    _check(t.quoted_lead_time_days >= 0, "delivery.quoted_lead_time_days", "quoted_lead_time_days ≥ 0",
           t.quoted_lead_time_days)

    # building the distributions re-checks their parameters
    for path, build in (("demand.interarrival_distribution", spec.interarrival_dist),
                        ("manufacturer.service_distribution", spec.service_dist),
                        ("supplier.lead_time_distribution", spec.lead_time_dist)):
        try:
            build()
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    if warn_overload:
        load, capacity = spec.offered_load()
        if load >= capacity:
            warnings.warn(
                f"scenario {spec.name!r}: offered load {load:.3f} worker-days/day "
                f">= effective capacity {capacity:.3f}; queues will grow without bound",
                OverloadWarning,
                stacklevel=2,
            )
    return spec


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``dotted.path=value`` overrides to a raw scenario dict.

    Values are parsed as JSON when possible (``3``, ``0.1``, ``true``,
    ``{"kind": "constant", "c": 2}``) and kept as strings otherwise.
    """
    data = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        keys = path.strip().split(".")
        node = data
        for k in keys[:-1]:
            nxt = node.setdefault(k, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {path!r}: {k!r} is not an object")
            node = nxt
        node[keys[-1]] = value
    return data


# --------------------------------------------------------------------------
# perturbations


@dataclass(frozen=True)
class TurnoverMultiplier:
    factor: float

    @property
    def tag(self) -> str:
        return f"turnover_x{self.factor:g}"

    def _mutate(self, spec: ScenarioSpec) -> None:
        if self.factor < 0:
            raise ConfigError(f"turnover factor must be ≥ 0, got {self.factor}")
        spec.workforce.annual_turnover_rate *= self.factor


@dataclass(frozen=True)
class EnableBurst:
    size: int = 20
    interval_min: float = 10.0
    interval_max: float = 15.0

    @property
    def tag(self) -> str:
        return f"burst_{self.size}_U({self.interval_min:g},{self.interval_max:g})"

    def _mutate(self, spec: ScenarioSpec) -> None:
        spec.demand.burst = BurstConfig(True, self.size, float(self.interval_min), float(self.interval_max))


@dataclass(frozen=True)
class ErrorDelta:
    delta: float

    @property
    def tag(self) -> str:
        return f"error{self.delta:+g}"

    def _mutate(self, spec: ScenarioSpec) -> None:
        p = spec.manufacturer.error_probability + self.delta
        if not 0.0 <= p <= 1.0:
            raise ConfigError(
                f"manufacturer.error_probability: {spec.manufacturer.error_probability} "
                f"{self.delta:+g} = {p:g} leaves [0, 1]"
            )
        spec.manufacturer.error_probability = p


@dataclass(frozen=True)
class SupplierLeadTime:
    days: float

    @property
    def tag(self) -> str:
        return f"lead_{self.days:g}d"

    def _mutate(self, spec: ScenarioSpec) -> None:
        spec.supplier.lead_time_days = float(self.days)
        spec.supplier.lead_time_distribution = None


Perturbation = TurnoverMultiplier | EnableBurst | ErrorDelta | SupplierLeadTime


def apply_perturbation(spec: ScenarioSpec, perturbation: Perturbation) -> ScenarioSpec:
    new = copy.deepcopy(spec)
    perturbation._mutate(new)
    new.name = f"{spec.name}+{perturbation.tag}"
    validate_spec(new, warn_overload=False)
    return new
