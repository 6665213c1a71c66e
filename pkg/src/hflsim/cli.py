"""Command line interface: validate, run, sweep, and report.

Exit codes: 0 on success, 2 for scenario parse or validation problems, 3 for
runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .cost import per_round_cost_parts
from .errors import HflSimError, ParseError, ValidationError
from .report import (
    comparison_table,
    format_table,
    write_report,
    write_run_outputs,
)
from .scenario import Scenario, load_scenario
from .simkit import COMPARISON_FIELDS, comparison_row, run_simulation

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3

SWEEP_PARAMS = ("W", "budget", "local_rounds")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hflsim",
        description=(
            "Simulate budget-aware orchestration of hierarchical federated "
            "learning pipelines."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="load a scenario and echo it")
    p_validate.add_argument("scenario", help="scenario file (YAML)")

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("scenario", help="scenario file (YAML)")
    p_run.add_argument(
        "--rva",
        choices=("on", "off", "force-revert"),
        default="on",
        help="validation mode: on, off, or force-revert (default: on)",
    )
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--out", default=None, help="output directory (default: runs/<name>-<mode>)")

    p_sweep = sub.add_parser("sweep", help="run a scenario across parameter values")
    p_sweep.add_argument("scenario", help="scenario file (YAML)")
    p_sweep.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p_sweep.add_argument("--values", nargs="+", type=float, required=True)
    p_sweep.add_argument("--out", default=None, help="write sweep.csv into this directory")

    p_report = sub.add_parser("report", help="compare runs and render figures")
    p_report.add_argument("dirs", nargs="+", help="run output directories")
    p_report.add_argument("--out", default="report", help="report directory (default: report)")
    return parser


def _apply_sweep_value(scenario: Scenario, param: str, value: float) -> Scenario:
    if param == "W":
        settings = dataclasses.replace(scenario.settings, validation_window=int(value))
        return dataclasses.replace(scenario, settings=settings)
    if param == "budget":
        settings = dataclasses.replace(scenario.settings, budget=float(value))
        return dataclasses.replace(scenario, settings=settings)
    training = dataclasses.replace(scenario.training, local_rounds=int(value))
    return dataclasses.replace(scenario, training=training)


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    from .scenario import dump_scenario

    sys.stdout.write(dump_scenario(scenario))
    print(f"# scenario {scenario.name!r} is valid", file=sys.stderr)
    return EXIT_OK


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario, seed_override=args.seed)
    run = run_simulation(
        scenario,
        rva_enabled=args.rva != "off",
        force_revert=args.rva == "force-revert",
    )
    out_dir = args.out
    if out_dir is None:
        suffix = f"-seed{args.seed}" if args.seed is not None else ""
        out_dir = Path("runs") / f"{scenario.name}-rva-{args.rva}{suffix}"
    files = write_run_outputs(run, scenario, out_dir)
    print(
        f"{scenario.name}: stop={run.stop_reason.value} "
        f"round={run.final_round} accuracy={run.final_accuracy:.4f} "
        f"cost={run.total_cost:.1f}/{run.ledger.budget:.0f} "
        f"decisions={[d.decision.value for d in run.decisions]}"
    )
    print(f"wrote {len(files)} files to {out_dir}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = load_scenario(args.scenario)
    rows = []
    for value in args.values:
        scenario = _apply_sweep_value(base, args.param, value)
        run = run_simulation(scenario)
        psi_ga, psi_la = per_round_cost_parts(
            run.configs["cfg-0"], scenario.topology, scenario.cost_params
        )
        row = {
            "param": args.param,
            "value": value,
            **comparison_row(run),
            "psi_ga_initial": psi_ga,
            "psi_la_initial": psi_la,
            "validation_rounds": ";".join(str(d.round) for d in run.decisions),
        }
        rows.append(row)
    fields = ["param", "value", *COMPARISON_FIELDS, "psi_ga_initial", "psi_la_initial", "validation_rounds"]
    print(format_table(rows, fields))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        import csv

        with open(out / "sweep.csv", "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def _cmd_report(args) -> int:
    from .report import RunRecord

    records = [RunRecord.load(d) for d in args.dirs]
    rows = comparison_table(records)
    print(format_table(rows, COMPARISON_FIELDS))
    files = write_report(args.dirs, args.out)
    print(f"wrote {', '.join(str(f) for f in files)}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "validate": _cmd_validate,
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        print("scenario validation failed:", file=sys.stderr)
        for violation in exc.violations:
            print(f"  - {violation}", file=sys.stderr)
        return EXIT_INVALID
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (HflSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
