"""Run provenance: git revision and timestamps for result sidecars."""

from __future__ import annotations

import subprocess
from datetime import datetime, timezone
from pathlib import Path


def _run_git_command(cmd: list[str], cwd: Path | None = None) -> str:
    """Execute a git command and return stdout text.

    Input contract:
    - `cmd` must be a valid argument vector beginning with `git`.

    Output contract:
    - Returns decoded stdout string, empty when git is missing or fails.

    Side effects:
    - Spawns subprocess.
    """

    try:
        completed = subprocess.run(cmd, capture_output=True, text=True, check=False, cwd=cwd)
    except OSError:
        return ""
    return completed.stdout.strip() if completed.returncode == 0 else ""


def git_revision(cwd: Path | None = None) -> str | None:
    """Return `HEAD` with a `-dirty` suffix for modified trees, or `None` outside git."""

    revision = _run_git_command(["git", "rev-parse", "HEAD"], cwd)
    if not revision:
        return None
    if _run_git_command(["git", "status", "--porcelain", "--untracked-files=no"], cwd):
        return f"{revision}-dirty"
    return revision


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
