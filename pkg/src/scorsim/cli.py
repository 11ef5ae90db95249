"""Command-line entry point.

    scorsim validate SCENARIO [--set key=value ...]
    scorsim run SCENARIO [-o DIR] [--seed N] [--emit card,timeseries,trace]
    scorsim sensitivity SCENARIO [-o DIR] [--replications N]
    scorsim compare BASELINE OTHER [-o DIR] [--replications N]

Exit status: 0 success, 1 configuration error, 2 simulation fault.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from scorsim import io as sio
from scorsim.errors import ConfigError, RegistrationError, SimulationFault
from scorsim.harness import Simulation, run_replications, sensitivity_suite
from scorsim.scenario import ScenarioSpec, apply_overrides, spec_from_dict

log = logging.getLogger("scorsim")

EMIT_CHOICES = ("card", "timeseries", "trace")


def _load(path: str, args) -> ScenarioSpec:
    data = sio.read_scenario_dict(path)
    if args.set:
        data = apply_overrides(data, args.set)
    if args.seed is not None:
        data["master_seed"] = args.seed
    if getattr(args, "replications", None) is not None:
        data["replications"] = args.replications
    return spec_from_dict(data)


def _emit_flags(text: str) -> set[str]:
    flags = {f.strip() for f in text.split(",") if f.strip()}
    bad = flags - set(EMIT_CHOICES)
    if bad:
        raise ConfigError(f"--emit: unknown output(s) {sorted(bad)}; choose from {', '.join(EMIT_CHOICES)}")
    return flags


def _out(text: str, outdir: Path | None, filename: str) -> None:
    if outdir is None:
        sys.stdout.write(text)
    else:
        sio.write_text(text, outdir / filename)
        log.info("wrote %s", outdir / filename)


def cmd_validate(args) -> int:
    spec = _load(args.scenario, args)
    sys.stdout.write(sio.scenario_json(spec))
    return 0


def cmd_run(args) -> int:
    spec = _load(args.scenario, args)
    emit = _emit_flags(args.emit)
    outdir = Path(args.output) if args.output else None
    if outdir is None and emit - {"card"}:
        raise ConfigError("--emit timeseries/trace needs an output directory (-o)")
    sim = Simulation(spec, trace="trace" in emit, timeseries="timeseries" in emit)
    card = sim.run()
    if "card" in emit:
        _out(sio.card_json(card), outdir, "card.json")
    if "timeseries" in emit:
        sio.write_timeseries(sim.builder.timeseries, outdir / "timeseries.csv")
    if "trace" in emit:
        sio.write_text(sim.kernel.trace_text(), outdir / "trace.tsv")
    return 0


def cmd_sensitivity(args) -> int:
    spec = _load(args.scenario, args)
    report = sensitivity_suite(spec)
    if args.output:
        outdir = Path(args.output)
        sio.emit_report(report, outdir / "report.json", outdir / "report.txt")
    else:
        sys.stdout.write(sio.render_table(report))
    return 0


def cmd_compare(args) -> int:
    base = _load(args.baseline, args)
    other = _load(args.other, args)
    # common random numbers: the other scenario runs on the baseline's seeds
    other.master_seed = base.master_seed
    n = base.replications
    result = sio.compare_to_dict(run_replications(base, n), run_replications(other, n))
    _out(json.dumps(result, indent=2, ensure_ascii=False) + "\n",
         Path(args.output) if args.output else None, "compare.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scorsim", description="SCOR supply chain simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, reps=True):
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scenario field by dotted path (repeatable)")
        p.add_argument("--seed", type=int, help="override master_seed")
        if reps:
            p.add_argument("--replications", type=int, help="override the replication count")

    p = sub.add_parser("validate", help="resolve defaults and print the scenario")
    p.add_argument("scenario")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="one replication -> SCOR card")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", help="output directory (default: card to stdout)")
    p.add_argument("--emit", default="card", help="comma list of card,timeseries,trace")
    common(p, reps=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sensitivity", help="baseline vs. the four one-factor perturbations")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", help="output directory for report.json and report.txt")
    common(p)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("compare", help="percent deltas between two scenarios on common seeds")
    p.add_argument("baseline")
    p.add_argument("other")
    p.add_argument("-o", "--output", help="output directory for compare.json")
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (SimulationFault, RegistrationError) as exc:
        print(f"simulation fault: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
