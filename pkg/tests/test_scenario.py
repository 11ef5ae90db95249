import json
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scorsim.errors import ConfigError
from scorsim.scenario import (
    EnableBurst,
    ErrorDelta,
    OverloadWarning,
    ScenarioSpec,
    SupplierLeadTime,
    TurnoverMultiplier,
    apply_overrides,
    apply_perturbation,
    spec_from_dict,
)


def test_minimal_scenario_gets_defaults():
    spec = spec_from_dict({"name": "b"})
    default = ScenarioSpec(name="b")
    assert spec == default
    assert spec.manufacturer.workers == 10
    assert spec.supplier.lead_time_days == 1.0
    assert spec.demand.burst.size == 20 and not spec.demand.burst.enabled


def test_baseline_is_near_eighty_percent_load():
    load, capacity = ScenarioSpec().offered_load()
    assert 0.75 <= load / capacity <= 0.85


@pytest.mark.parametrize("data, needle", [
    ({"manufacturer": {"workers": 0}}, "workers ≥ 1"),
    ({"demand": {"burst": {"interval_min_days": 15, "interval_max_days": 10}}}, "interval_min ≤ interval_max"),
    ({"manufacturer": {"error_probability": 1.5}}, "error_probability ∈ [0, 1]"),
    ({"manufacturer": {"error_probability": 1.0}}, "error_probability < 1"),
    ({"warmup_days": 300, "horizon_days": 200}, "warmup < horizon"),
    ({"demand": {"mean_interarrival_days": 0}}, "mean_interarrival_days > 0"),
    ({"workforce": {"recruit_min_days": 9, "recruit_max_days": 3}}, "recruit_min ≤ recruit_max"),
    ({"master_seed": -1}, "master_seed"),
])
def test_bounds_name_field_and_rule(data, needle):
    with pytest.raises(ConfigError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        spec_from_dict(data)


@pytest.mark.parametrize("data, key", [
    ({"manufaturer": {}}, "manufaturer"),
    ({"manufacturer": {"wokers": 3}}, "manufacturer.wokers"),
    ({"demand": {"burst": {"sise": 3}}}, "demand.burst.sise"),
])
def test_unknown_keys_rejected(data, key):
    with pytest.raises(ConfigError, match=f"unknown key '{key}'"):
        spec_from_dict(data)


@pytest.mark.parametrize("data", [
    {"manufacturer": {"workers": "ten"}},
    {"manufacturer": {"workers": 2.5}},
    {"demand": {"burst": {"enabled": 1}}},
    {"demand": "fast"},
    {"manufacturer": {"service_distribution": {"kind": "gamma"}}},
    {"manufacturer": {"service_distribution": {"kind": "uniform", "a": 3, "b": 1}}},
])
def test_wrong_types_rejected(data):
    with pytest.raises(ConfigError):
        spec_from_dict(data)


def test_round_trip_through_dict_is_fixed_point():
    spec = spec_from_dict({"name": "x", "demand": {"burst": {"enabled": True}},
                           "manufacturer": {"service_distribution": {"kind": "constant", "c": 0.5}}})
    again = spec_from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again == spec and again.to_dict() == spec.to_dict()


def test_overrides_parse_json_values():
    data = apply_overrides({"name": "b"}, ["manufacturer.workers=3", "demand.burst.enabled=true",
                                           "name=other", "supplier.lead_time_days=7"])
    spec = spec_from_dict(data)
    assert spec.manufacturer.workers == 3 and spec.demand.burst.enabled
    assert spec.name == "other" and spec.supplier.lead_time_days == 7.0
    with pytest.raises(ConfigError, match="key=value"):
        apply_overrides({}, ["workers"])


def test_overrides_do_not_mutate_input():
    original = {"manufacturer": {"workers": 5}}
    apply_overrides(original, ["manufacturer.workers=6"])
    assert original == {"manufacturer": {"workers": 5}}


def test_turnover_multiplier():
    spec = spec_from_dict({"workforce": {"annual_turnover_rate": 0.25}})
    pert = apply_perturbation(spec, TurnoverMultiplier(1.32))
    assert pert.workforce.annual_turnover_rate == pytest.approx(0.33)
    assert spec.workforce.annual_turnover_rate == 0.25


def test_error_delta():
    spec = spec_from_dict({"manufacturer": {"error_probability": 0.05}})
    assert apply_perturbation(spec, ErrorDelta(0.05)).manufacturer.error_probability == pytest.approx(0.10)
    high = spec_from_dict({"manufacturer": {"error_probability": 0.97}})
    with pytest.raises(ConfigError, match="leaves"):
        apply_perturbation(high, ErrorDelta(0.05))


def test_burst_and_lead_time_perturbations():
    spec = ScenarioSpec()
    burst = apply_perturbation(spec, EnableBurst(20, 10, 15))
    assert burst.demand.burst.enabled and burst.demand.burst.interval_max_days == 15.0
    lead = apply_perturbation(spec, SupplierLeadTime(7.0))
    assert lead.supplier.lead_time_days == 7.0
    assert lead.name == "baseline+lead_7d"


PERTURBATIONS = st.one_of(
    st.builds(TurnoverMultiplier, st.floats(0.0, 3.0)),
    st.builds(EnableBurst, st.integers(1, 40), st.just(5.0), st.floats(5.0, 20.0)),
    st.builds(ErrorDelta, st.floats(-0.05, 0.5)),
    st.builds(SupplierLeadTime, st.floats(0.0, 14.0)),
)


@given(PERTURBATIONS)
def test_perturbation_changes_exactly_one_group(pert):
    base = ScenarioSpec()
    new = apply_perturbation(base, pert)
    groups = ("demand", "manufacturer", "supplier", "workforce", "delivery")
    changed = [g for g in groups if getattr(new, g) != getattr(base, g)]
    assert len(changed) <= 1
    assert (new.horizon_days, new.warmup_days, new.master_seed) == (base.horizon_days, base.warmup_days,
                                                                     base.master_seed)


def test_overload_warns_but_loads():
    with pytest.warns(OverloadWarning, match="offered load"):
        spec = spec_from_dict({"manufacturer": {"workers": 1}})
    assert spec.manufacturer.workers == 1
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spec_from_dict({})
