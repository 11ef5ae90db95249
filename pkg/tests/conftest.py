from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scorsim.scenario import ScenarioSpec, spec_from_dict  # noqa: E402


def queue_spec(workers: int, arrival_rate: float, service_mean: float = 1.0, **top) -> ScenarioSpec:
    """Pure M/M/c line: no errors, no turnover, no bursts, raw never runs out."""
    data = {
        "name": f"M/M/{workers}",
        "demand": {"mean_interarrival_days": 1.0 / arrival_rate},
        "manufacturer": {"workers": workers, "service_mean_days": service_mean,
                         "error_probability": 0.0, "reorder_point": 10**6},
        "workforce": {"annual_turnover_rate": 0.0},
    }
    data.update(top)
    return spec_from_dict(data)


def small_spec(**overrides) -> ScenarioSpec:
    """Default model on a short horizon, for fast behavioural tests."""
    data = {"name": "small", "horizon_days": 200.0, "warmup_days": 20.0, "replications": 3}
    for key, value in overrides.items():
        node = data
        *parents, leaf = key.split("__")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return spec_from_dict(data)


@pytest.fixture
def baseline() -> ScenarioSpec:
    return ScenarioSpec()
