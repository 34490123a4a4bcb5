"""Application orchestration: load, run, persist.

Rules for this layer:
- Configuration is fully validated before anything is computed or written.
- Results are written only after the runner returns.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from config.loader import ExperimentConfig, load_experiment_config
from core.logger import info_log
from core.types import ResultRow, RunLogRecord
from lab.metrics import MetricsSummary, summarize
from lab.runner import RunOptions, run_experiment
from prod.provenance import git_revision, utc_timestamp
from prod.results_store import default_output_path, write_rows, write_sidecar


@dataclass(slots=True)
class RunOutcome:
    """Everything the CLI reports about one finished run."""

    config: ExperimentConfig
    rows: list[ResultRow]
    summary: MetricsSummary
    csv_path: Path
    sidecar_path: Path

    @property
    def passed(self) -> bool:
        return self.summary["failed"] == 0


def execute(
    config: ExperimentConfig,
    debug: bool = False,
    show_progress: bool = True,
) -> RunOutcome:
    """Run one validated experiment and write its CSV and sidecar.

    Input contract:
    - `config` came from `load_experiment_config`.

    Output contract:
    - Returns the rows, their summary and the written paths.

    Side effects:
    - Writes the CSV, the JSON sidecar and one ledger line.
    """

    info_log(f"running {config.experiment_id} ({config.command})", color="cyan")
    rows = run_experiment(config, RunOptions(debug=debug, show_progress=show_progress))
    summary = summarize(rows)
    csv_path = Path(config.output_path) if config.output_path else default_output_path(config.experiment_id)
    write_rows(rows, csv_path)
    record = RunLogRecord(
        schema_version="1.0",
        timestamp_utc=utc_timestamp(),
        git_revision=git_revision(),
        experiment_id=config.experiment_id,
        command=config.command,
        seed=config.seed,
        threads=config.threads,
        rows=summary["rows"],
        failed_rows=summary["failed"],
        config=config.raw | {"seed": config.seed, "threads": config.threads},
    )
    sidecar = write_sidecar(record, csv_path)
    color = "green" if summary["failed"] == 0 else "red"
    info_log(f"{summary['rows'] - summary['failed']}/{summary['rows']} rows passed -> {csv_path}", color=color)
    return RunOutcome(config=config, rows=rows, summary=summary, csv_path=csv_path, sidecar_path=sidecar)


def run_from_path(
    config_path: str | Path,
    seed: int | None = None,
    threads: int | None = None,
    output_path: str | None = None,
    debug: bool = False,
    show_progress: bool = True,
) -> RunOutcome:
    """Load a config (file or built-in name), apply overrides and execute it."""

    config = load_experiment_config(config_path, seed=seed, threads=threads, output_path=output_path)
    return execute(config, debug=debug, show_progress=show_progress)
