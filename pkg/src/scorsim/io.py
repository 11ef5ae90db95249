"""File formats: scenario JSON in, card/report JSON, text tables and CSV out."""

from __future__ import annotations

import csv
import io
import json
import re
from importlib import resources
from pathlib import Path

from scorsim.errors import ConfigError
from scorsim.harness import MetricSummary, ReplicationSummary, SensitivityReport, compare_scenarios
from scorsim.metrics import CATALOG, MEASUREMENTS, TIMESERIES_HEADER, Metric, ScorCard, round_sig
from scorsim.scenario import ScenarioSpec, spec_from_dict

SIG_DIGITS = 6


def load_schema(name: str) -> dict:
    """One of ``scenario``, ``scorecard``, ``report``, ``compare``."""
    text = resources.files("scorsim.schemas").joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path: str | Path, text: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# -- scenarios


def parse_scenario_text(text: str, source: str = "<string>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    return data


def read_scenario_dict(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario_text(text, str(path))


def parse_scenario_file(path: str | Path) -> ScenarioSpec:
    return spec_from_dict(read_scenario_dict(path))


def scenario_json(spec: ScenarioSpec) -> str:
    return _dumps(spec.to_dict())


# -- SCOR cards


def card_to_dict(card: ScorCard) -> dict:
    metrics = {}
    for name in CATALOG:
        m = card.metrics[name]
        metrics[name] = {"value": round_sig(m.value, SIG_DIGITS), "unit": m.unit, "computed": m.computed}
    return {"scenario": card.scenario, "seed": card.seed, "metrics": metrics}


def card_from_dict(data: dict) -> ScorCard:
    metrics = {}
    for name, entry in data["metrics"].items():
        value = entry["value"]
        if entry["computed"] != (value is not None):
            raise ConfigError(f"metric {name}: 'computed' disagrees with value {value!r}")
        metrics[name] = Metric(value, entry["unit"])
    return ScorCard(data["scenario"], data["seed"], metrics)


def card_json(card: ScorCard) -> str:
    return _dumps(card_to_dict(card))


def emit_card(card: ScorCard, path: str | Path) -> None:
    _write(path, card_json(card))


def parse_card(text: str) -> ScorCard:
    return card_from_dict(json.loads(text))


# -- sensitivity reports


def _summary(s: MetricSummary) -> dict:
    return {k: round_sig(getattr(s, k), SIG_DIGITS) for k in ("mean", "stddev", "ci_low", "ci_high")} | {"n": s.n}


def report_to_dict(report: SensitivityReport) -> dict:
    rows = []
    for row in report.rows:
        rows.append({
            "attribute": row.attribute,
            "metric": row.metric,
            "issue": row.issue,
            "perturbation": row.perturbation,
            "scenario": row.scenario,
            "deltas": {m: round_sig(c.delta, SIG_DIGITS) for m, c in row.cells.items()},
            "ci": {m: (None if c.ci_low is None else [round_sig(c.ci_low, SIG_DIGITS), round_sig(c.ci_high, SIG_DIGITS)])
                   for m, c in row.cells.items()},
            "expected": {m: c.expected for m, c in row.cells.items()},
            "verdicts": {m: c.verdict for m, c in row.cells.items()},
            "approx_zero": [m for m, c in row.cells.items() if c.approx_zero],
            "baseline": {m: _summary(s) for m, s in row.baseline.items()},
            "perturbed": {m: _summary(s) for m, s in row.perturbed.items()},
            "notes": list(row.notes),
        })
    return {
        "baseline": report.baseline,
        "metadata": {
            "replications": report.replications,
            "master_seed": report.master_seed,
            "seeds": list(report.seeds),
            "common_random_numbers": True,
        },
        "rows": rows,
    }


def report_json(report: SensitivityReport) -> str:
    return _dumps(report_to_dict(report))


def format_pct(value: float | None) -> str:
    if value is None:
        return "n/c"
    if value == 0:
        value = 0.0  # no "-0.00%"
    return f"{value:+.2f}%"


_COLUMNS = ("Performance attribute", "SCOR Level-1 Metric", "Issue",
            "Cycle time", "Worker utilization", "Waiting time", "No. WIP", "Rejected parts")


def render_table(report: SensitivityReport | dict) -> str:
    """Fixed-width text table: one row per perturbation, one column per measurement."""
    data = report if isinstance(report, dict) else report_to_dict(report)
    body = []
    for row in data["rows"]:
        cells = [row["attribute"], row["metric"], row["issue"]]
        for m in MEASUREMENTS:
            text = format_pct(row["deltas"][m])
            if m in row["approx_zero"]:
                text += " (≈0)"
            verdict = row["verdicts"][m]
            if verdict != "N/A":
                text += f" {verdict}"
            cells.append(text)
        body.append(cells)
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(_COLUMNS)]

    def line(cells):
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [line(_COLUMNS), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in body]
    meta = data["metadata"]
    out.append("")
    out.append(f"baseline: {data['baseline']}; replications: {meta['replications']}; "
               f"seeds {meta['seeds'][0]}..{meta['seeds'][-1]} shared by every scenario (common random numbers)")
    out.append("deltas are percent changes of replication means; PASS = 95% CI of the paired "
               "difference lies on the expected side of zero")
    for row in data["rows"]:
        for note in row["notes"]:
            out.append(f"note [{row['perturbation']}] {note}")
    return "\n".join(out) + "\n"


_PCT = re.compile(r"([+-]\d+\.\d{2})%")


def table_percents(text: str) -> list[float]:
    """All signed percents appearing in a rendered table, in reading order."""
    return [float(m) for m in _PCT.findall(text)]


def emit_report(report: SensitivityReport, path: str | Path, table_path: str | Path | None = None) -> None:
    _write(path, report_json(report))
    if table_path is not None:
        _write(table_path, render_table(report))


# -- two-scenario comparison


def compare_to_dict(base: ReplicationSummary, other: ReplicationSummary) -> dict:
    names = [n for n in CATALOG if base.metrics[n].mean is not None or other.metrics[n].mean is not None]
    cells = compare_scenarios(base, other, metrics=tuple(names))
    metrics = {}
    for name in names:
        c = cells[name]
        metrics[name] = {
            "unit": CATALOG[name][1],
            "baseline": round_sig(base.metrics[name].mean, SIG_DIGITS),
            "other": round_sig(other.metrics[name].mean, SIG_DIGITS),
            "delta_pct": round_sig(c.delta, SIG_DIGITS),
            "ci": None if c.ci_low is None else [round_sig(c.ci_low, SIG_DIGITS), round_sig(c.ci_high, SIG_DIGITS)],
        }
    return {"baseline": base.scenario, "other": other.scenario, "replications": len(base.seeds),
            "seeds": list(base.seeds), "metrics": metrics}


# -- time series and traces


def timeseries_csv(rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TIMESERIES_HEADER)
    for t, *levels in rows:
        writer.writerow([repr(t), *levels])
    return buf.getvalue()


def write_timeseries(rows: list[tuple], path: str | Path) -> None:
    _write(path, timeseries_csv(rows))


def write_text(text: str, path: str | Path) -> None:
    _write(path, text)
