"""Command-line entrypoint.

Exit codes: 0 all rows pass, 1 some row fails or a kernel error,
2 invalid config, 3 cap exceeded, 4 I/O failure.
"""

from __future__ import annotations

import argparse
from typing import Sequence

from rich.console import Console
from rich.table import Table

from config.loader import list_builtin_experiments
from core.errors import EXIT_IO_ERROR, LabError
from core.logger import console as log_console
from prod.app import run_from_path

console = Console()
FAILED_PREVIEW = 20


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cokernel-lab",
        description="Random walks on finite groups and random cokernel experiments.",
    )
    subcommands = parser.add_subparsers(dest="action", required=True)

    run = subcommands.add_parser("run", help="Run one experiment config.")
    run.add_argument("--config", required=True, help="Config path or built-in experiment name.")
    run.add_argument("--seed", type=int, default=None, help="Override the config seed.")
    run.add_argument("--threads", type=int, default=None, help="Worker processes.")
    run.add_argument("--out", default=None, help="CSV output path.")
    run.add_argument("--debug", action="store_true", help="Enable debug mode.")

    subcommands.add_parser("list", help="List built-in experiments.")
    return parser


def _print_manifest() -> None:
    table = Table(title="built-in experiments")
    table.add_column("name", style="bold")
    table.add_column("description")
    for name, description, _ in list_builtin_experiments():
        table.add_row(name, description)
    console.print(table)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments and run the requested action.

    Input contract:
    - `argv` defaults to `sys.argv[1:]`.

    Output contract:
    - Returns the process exit code.

    Side effects:
    - Runs experiments and writes results for `run`.
    - Prints to terminal.
    """

    args = _build_parser().parse_args(argv)
    if args.action == "list":
        _print_manifest()
        return 0

    try:
        outcome = run_from_path(
            args.config,
            seed=args.seed,
            threads=args.threads,
            output_path=args.out,
            debug=args.debug,
            show_progress=not args.debug,
        )
    except OSError as exc:
        log_console.print(f"i/o error: {exc}", style="red", markup=False)
        return EXIT_IO_ERROR
    except LabError as exc:
        log_console.print(f"{type(exc).__name__}: {exc}", style="red", markup=False)
        return exc.exit_code

    if not outcome.passed:
        failed = outcome.summary["failed_statistics"]
        for name in failed[:FAILED_PREVIEW]:
            log_console.print(f"failed: {name}", style="red", markup=False)
        if len(failed) > FAILED_PREVIEW:
            log_console.print(f"... and {len(failed) - FAILED_PREVIEW} more")
    return 0 if outcome.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
