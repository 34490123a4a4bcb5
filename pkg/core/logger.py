"""Logging utilities for console output and machine-readable run records.

Logger functions are side-effect-only and must never control flow decisions.
Mathematical kernels do not log; orchestration layers do.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Any, Iterator

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from core.types import RunLogRecord

console = Console(stderr=True)


def debug_log(enabled: bool, event: str, payload: dict[str, Any]) -> None:
    """Emit a structured debug log line when enabled.

    Input contract:
    - `enabled`: toggles emission.
    - `event`: short event name.
    - `payload`: JSON-serializable details.

    Output contract:
    - No return value.

    Side effects:
    - Writes one JSON line to stderr when enabled.
    """

    if not enabled:
        return
    record = {"event": event, "payload": payload}
    console.print(json.dumps(record, sort_keys=True, default=str), style="dim", markup=False)


def info_log(
    message: str,
    payload: dict[str, Any] | None = None,
    color: str | None = None,
) -> None:
    """Emit a human-readable info line with optional JSON details."""

    style = color if color else "default"
    console.print(f"[bold {style}]{message}[/bold {style}]", style=style)
    if payload:
        console.print(json.dumps(payload, indent=2, sort_keys=True, default=str), style="dim", markup=False)


@contextmanager
def progress_bar(description: str, total: int, enabled: bool = True) -> Iterator[Any]:
    """Yield an `advance(n)` callable backed by a rich progress bar.

    The bar is suppressed when `enabled` is false (debug mode, tests).
    """

    if not enabled or total <= 0:
        yield lambda n=1: None
        return
    columns = (
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
    )
    with Progress(*columns, console=console, transient=True) as progress:
        task = progress.add_task(description, total=total)
        yield lambda n=1: progress.advance(task, n)


class RunLogger:
    """Write run provenance as a JSON sidecar and a JSONL ledger line.

    Input contract:
    - `ledger_path` is a writable file path.

    Output contract:
    - One sorted-key JSON object per run in the ledger.

    Side effects:
    - Creates parent directories and writes to filesystem.
    """

    def __init__(self, ledger_path: str | Path = "results/runs.jsonl") -> None:
        self.ledger_path = Path(ledger_path)

    def log_run(self, record: RunLogRecord, sidecar_path: str | Path) -> None:
        """Write `record` to `sidecar_path` and append it to the ledger."""

        payload = asdict(record)
        sidecar = Path(sidecar_path)
        sidecar.parent.mkdir(parents=True, exist_ok=True)
        sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self._append_jsonl(payload)

    def _append_jsonl(self, payload: dict[str, Any]) -> None:
        self.ledger_path.parent.mkdir(parents=True, exist_ok=True)
        with self.ledger_path.open("a", encoding="utf-8") as file:
            file.write(json.dumps(payload, sort_keys=True) + "\n")
