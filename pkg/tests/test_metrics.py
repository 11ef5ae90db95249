import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_spec
from scorsim.errors import SimulationFault
from scorsim.harness import Simulation
from scorsim.metrics import (
    CATALOG,
    FRACTION_METRICS,
    NOT_COMPUTED,
    CardBuilder,
    TimeWeighted,
    littles_law_residual,
)


def deterministic(interarrival, service, **more):
    return small_spec(
        manufacturer__workers=more.pop("workers", 1),
        manufacturer__error_probability=0.0,
        manufacturer__reorder_point=10**6,
        workforce__annual_turnover_rate=0.0,
        demand__interarrival_distribution={"kind": "constant", "c": interarrival},
        manufacturer__service_distribution={"kind": "constant", "c": service},
        **more,
    )


def test_zero_demand_card():
    card = Simulation(deterministic(1e9, 1.0)).run()
    assert card["cycle_time"] is None
    assert card["waiting_time_in_process"] is None
    assert card["worker_utilization"] == 0.0
    assert card["wip_average"] == 0.0
    assert card["rejected_parts"] == 0
    assert card["delivery_performance"] is None and card["fill_rate"] is None


def test_single_unit_cycle_and_waiting():
    spec = deterministic(1000.0, 2.0, horizon_days=1500.0, warmup_days=500.0)
    card = Simulation(spec).run()
    assert card["cycle_time"] == 2.0
    assert card["waiting_time_in_process"] == 0.0
    assert card["inspections"] == 1
    assert card["order_fulfilment_lead_time"] == 2.0
    assert card["delivery_performance"] == 1.0


def test_deterministic_single_server_half_busy():
    # arrivals at 1.5k, 0.75 days of work each, window spans exactly 1000 cycles
    spec = deterministic(1.5, 0.75, warmup_days=1.5, horizon_days=1501.5)
    card = Simulation(spec).run()
    assert card["worker_utilization"] == pytest.approx(0.5, abs=1e-9)
    assert card["wip_average"] == pytest.approx(0.5, abs=1e-9)
    assert card["waiting_time_in_process"] == 0.0
    assert card["queue_wip_average"] == 0.0


def test_not_computed_metrics_are_empty_slots():
    card = Simulation(small_spec()).run()
    assert set(card.metrics) == set(CATALOG)
    for name in NOT_COMPUTED:
        assert card.metrics[name].value is None and not card.metrics[name].computed
    for name in set(CATALOG) - NOT_COMPUTED:
        assert card.metrics[name].computed, name


def test_littles_law_on_default_model():
    card = Simulation(small_spec(horizon_days=1000.0, warmup_days=100.0)).run()
    assert littles_law_residual(card) < 0.02


def test_warmup_truncation_excludes_early_completions():
    spec = small_spec()
    sim = Simulation(spec)
    done = []
    sim.kernel.add_observer(lambda s, t, d: done.append(t) if s == "unit_done" else None)
    card = sim.run()
    assert card["inspections"] == sum(t >= spec.warmup_days for t in done)
    assert card["inspections"] < len(done)


def test_wip_integral_matches_timeseries():
    spec = small_spec()
    sim = Simulation(spec, timeseries=True)
    card = sim.run()
    rows = sim.builder.timeseries
    total = 0.0
    for (t0, wip, *_), (t1, *_) in zip(rows, rows[1:] + [(spec.horizon_days,)]):
        lo, hi = max(t0, spec.warmup_days), min(t1, spec.horizon_days)
        if hi > lo:
            total += wip * (hi - lo)
    assert card["wip_average"] == pytest.approx(total / (spec.horizon_days - spec.warmup_days), rel=1e-9)


def test_turnover_shrinks_utilization_denominator():
    spec = small_spec(workforce__annual_turnover_rate=20.0)
    sim = Simulation(spec)
    card = sim.run()
    span = spec.horizon_days - spec.warmup_days
    assert sim.builder.staffed.integral < 10 * span
    assert card["worker_utilization"] == pytest.approx(sim.builder.busy.integral / sim.builder.staffed.integral)


def test_fill_rate_cohort_uses_post_warmup_orders_due_in_window():
    spec = small_spec()
    sim = Simulation(spec)
    card = sim.run()
    due = [o for o in sim.customer.orders.values()
           if o.created_at >= spec.warmup_days and o.due_at <= spec.horizon_days]
    filled = sum(o.qty for o in due if o.fulfilled_at is not None and o.fulfilled_at <= o.due_at)
    assert card["fill_rate"] == pytest.approx(filled / sum(o.qty for o in due))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32), error=st.sampled_from([0.0, 0.1, 0.4]),
       burst=st.booleans(), turnover=st.sampled_from([0.0, 5.0]))
def test_fractions_within_unit_interval(seed, error, burst, turnover):
    spec = small_spec(master_seed=seed, horizon_days=120.0, manufacturer__error_probability=error,
                      demand__burst__enabled=burst, workforce__annual_turnover_rate=turnover)
    card = Simulation(spec).run()
    for name in FRACTION_METRICS:
        v = card[name]
        assert v is None or 0.0 <= v <= 1.0, (name, v)
    assert card["rejected_parts"] <= card["inspections"]


def test_signal_before_levels_is_fault():
    builder = CardBuilder(10.0)
    with pytest.raises(SimulationFault, match="before initialization"):
        builder("unit_done", 0.0, {})


@settings(max_examples=50)
@given(start=st.floats(0, 50),
       steps=st.lists(st.tuples(st.floats(0, 10), st.integers(0, 20)), min_size=1, max_size=30))
def test_time_weighted_matches_direct_integration(start, steps):
    acc = TimeWeighted(start)
    t, value, expected = 0.0, 0, 0.0
    for gap, new in steps:
        nxt = t + gap
        lo = max(t, start)
        if nxt > lo:
            expected += value * (nxt - lo)
        acc.set(nxt, new)
        t, value = nxt, new
    end = t + 1.0
    expected += value * max(0.0, end - max(t, start))
    acc.accrue(end)
    assert acc.integral == pytest.approx(expected, rel=1e-9, abs=1e-9)
