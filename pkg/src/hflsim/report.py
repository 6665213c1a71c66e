"""Run outputs: CSV traces, JSON summaries, comparison tables, and figures.

Every simulation run is persisted as a directory of delimited files plus a
structured summary; the report path reads any number of such directories
back, prints a comparison table, and renders accuracy and cumulative-cost
figures next to the delimited output.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import ParseError
from .rva import DECISION_CSV_FIELDS, decision_csv_row, decision_report
from .scenario import Scenario, dump_scenario
from .simkit import COMPARISON_FIELDS, SimulationRun, comparison_row, compare_runs

TRACE_FIELDS = ["round", "accuracy", "config_id"]
LEDGER_FIELDS = ["round", "label", "amount", "total"]


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def write_run_outputs(run: SimulationRun, scenario: Scenario, out_dir) -> list[Path]:
    """Write trace.csv, ledger.csv, decisions.csv, run.json, and the echo."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_by_round = dict(run.round_configs)
    trace_rows = [
        {"round": r, "accuracy": acc, "config_id": config_by_round[r]}
        for r, acc in run.trace.accuracies
    ]
    _write_csv(out / "trace.csv", TRACE_FIELDS, trace_rows)

    running = 0.0
    ledger_rows = []
    for entry in run.ledger.entries:
        running += entry.amount
        ledger_rows.append(
            {
                "round": entry.round,
                "label": entry.label,
                "amount": entry.amount,
                "total": running,
            }
        )
    _write_csv(out / "ledger.csv", LEDGER_FIELDS, ledger_rows)

    _write_csv(
        out / "decisions.csv",
        DECISION_CSV_FIELDS,
        [decision_csv_row(d) for d in run.decisions],
    )

    summary = {
        "scenario": run.scenario_name,
        "seed": run.seed,
        "rva_mode": run.rva_mode,
        "stop_reason": run.stop_reason.value,
        "final_round": run.final_round,
        "final_accuracy": run.final_accuracy,
        "total_cost": run.total_cost,
        "budget": run.ledger.budget,
        "decisions": [
            {
                "round": d.round,
                "event": d.event,
                "decision": d.decision.value,
                "forced": d.forced,
            }
            for d in run.decisions
        ],
        "configurations": {
            config_id: {
                "ga": config.ga,
                "clusters": {
                    la: sorted(members) for la, members in sorted(config.clusters.items())
                },
            }
            for config_id, config in run.configs.items()
        },
    }
    (out / "run.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out / "scenario_resolved.yaml").write_text(dump_scenario(scenario), encoding="utf-8")
    (out / "decisions.txt").write_text(
        "\n\n".join(decision_report(d) for d in run.decisions) + "\n"
        if run.decisions
        else "",
        encoding="utf-8",
    )
    return sorted(out.iterdir())


@dataclass(frozen=True)
class RunRecord:
    """A persisted run read back from its output directory."""

    directory: Path
    scenario_name: str
    seed: int
    rva_mode: str
    stop_reason: str
    final_round: int
    final_accuracy: float
    total_cost: float
    budget: float
    trace_rows: tuple[dict, ...]
    ledger_rows: tuple[dict, ...]
    decisions: tuple[dict, ...]

    @property
    def label(self) -> str:
        return f"{self.directory.name} ({self.rva_mode})"

    @classmethod
    def load(cls, directory) -> "RunRecord":
        directory = Path(directory)
        summary_path = directory / "run.json"
        try:
            summary = json.loads(summary_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read {summary_path}: {exc}") from exc

        def read_rows(name: str) -> tuple[dict, ...]:
            path = directory / name
            try:
                with open(path, newline="") as handle:
                    return tuple(csv.DictReader(handle))
            except OSError as exc:
                raise ParseError(f"cannot read {path}: {exc}") from exc

        return cls(
            directory=directory,
            scenario_name=summary["scenario"],
            seed=int(summary["seed"]),
            rva_mode=summary["rva_mode"],
            stop_reason=summary["stop_reason"],
            final_round=int(summary["final_round"]),
            final_accuracy=float(summary["final_accuracy"]),
            total_cost=float(summary["total_cost"]),
            budget=float(summary["budget"]),
            trace_rows=read_rows("trace.csv"),
            ledger_rows=read_rows("ledger.csv"),
            decisions=tuple(summary.get("decisions", [])),
        )


def comparison_table(records: Sequence) -> list[dict]:
    """Comparison rows; enforces the same-scenario check for multiple runs."""
    if len(records) >= 2:
        return compare_runs(records)
    return [comparison_row(record) for record in records]


def format_table(rows: list[dict], fieldnames: Optional[list[str]] = None) -> str:
    if not rows:
        return "(no rows)"
    fields = fieldnames or list(rows[0].keys())
    formatted = [
        {k: f"{v:.6g}" if isinstance(v, float) else str(v) for k, v in row.items()}
        for row in rows
    ]
    widths = {f: max(len(f), *(len(r.get(f, "")) for r in formatted)) for f in fields}
    header = "  ".join(f.ljust(widths[f]) for f in fields)
    lines = [header, "  ".join("-" * widths[f] for f in fields)]
    for row in formatted:
        lines.append("  ".join(row.get(f, "").ljust(widths[f]) for f in fields))
    return "\n".join(lines)


def render_accuracy_figure(records: Sequence[RunRecord], path: Path) -> None:
    """Accuracy per global round, one line per run, decisions marked."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for record in records:
        rounds = [int(row["round"]) for row in record.trace_rows]
        accuracy = [float(row["accuracy"]) for row in record.trace_rows]
        ax.plot(rounds, accuracy, label=record.label, linewidth=1.2)
        for decision in record.decisions:
            ax.axvline(
                int(decision["round"]), color="grey", linestyle="--", linewidth=0.8
            )
            ax.annotate(
                decision["decision"],
                xy=(int(decision["round"]), 0.02),
                rotation=90,
                fontsize=7,
                color="grey",
                va="bottom",
            )
    ax.set_xlabel("global round")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_cost_figure(records: Sequence[RunRecord], path: Path) -> None:
    """Cumulative communication cost per round against the budget line."""
    fig, ax = plt.subplots(figsize=(7, 4))
    budget = None
    for record in records:
        rounds = [int(row["round"]) for row in record.ledger_rows]
        totals = [float(row["total"]) for row in record.ledger_rows]
        ax.plot(rounds, totals, label=record.label, linewidth=1.2)
        budget = record.budget
    if budget is not None:
        ax.axhline(budget, color="red", linestyle=":", linewidth=1.0, label="budget")
    ax.set_xlabel("global round")
    ax.set_ylabel("total cost (units)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(record_dirs: Sequence, out_dir) -> list[Path]:
    """Build the comparison report for one or more run directories.

    Writes comparison.csv plus accuracy and cost figures into ``out_dir`` and
    returns the created paths.
    """
    records = [RunRecord.load(d) for d in record_dirs]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = comparison_table(records)
    comparison_path = out / "comparison.csv"
    _write_csv(comparison_path, COMPARISON_FIELDS, rows)
    accuracy_path = out / "accuracy.png"
    cost_path = out / "cost.png"
    render_accuracy_figure(records, accuracy_path)
    render_cost_figure(records, cost_path)
    return [comparison_path, accuracy_path, cost_path]
