"""
Run context utilities for the spaced-module analysis pipeline.

A run is a single CLI invocation identified by a ``run_id`` derived from the
current UTC timestamp. Each run gets a directory under ``logs/runs`` holding
its manifest, log file and Markdown report; a one-line summary of every run
is appended to ``logs/notes.log``.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Tuple


def ensure_directories(base_dir: Path) -> None:
    """
    Ensure that the expected directory hierarchy exists.

    Creates ``config``, ``data/presentations``, ``data/output`` and
    ``logs/runs`` under ``base_dir`` if they do not already exist.
    """
    (base_dir / "config").mkdir(parents=True, exist_ok=True)
    (base_dir / "data" / "presentations").mkdir(parents=True, exist_ok=True)
    (base_dir / "data" / "output").mkdir(parents=True, exist_ok=True)
    (base_dir / "logs" / "runs").mkdir(parents=True, exist_ok=True)


def init_run(
    command: str,
    logs_root: Path,
    input_path: Optional[Path] = None,
    mode: Optional[str] = None,
    field: Optional[str] = None,
    seed: Optional[int] = None,
) -> Tuple[str, Path, Dict[str, Any]]:
    """
    Initialise a new run directory and manifest.

    The run directory is ``logs_root/runs/<run_id>``; ``manifest.json``
    records the command and the inputs that determine its result.

    Returns
    -------
    Tuple[str, Path, dict]
        The run_id, the run directory path and the manifest dictionary.
    """
    now = datetime.now(timezone.utc)
    run_id = now.strftime("%Y%m%d_%H%M%S_%f")
    run_dir = logs_root / "runs" / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "run_id": run_id,
        "started_at": now.isoformat(),
        "command": command,
        "input": str(input_path) if input_path is not None else None,
        "mode": mode,
        "field": field,
        "seed": seed,
    }
    manifest_path = run_dir / "manifest.json"
    try:
        with manifest_path.open("w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)
    except OSError:
        # Best effort; ignore errors
        pass
    return run_id, run_dir, manifest


def update_manifest(run_dir: Path, manifest: Dict[str, Any], **extra: Any) -> None:
    """Merge ``extra`` into the manifest and rewrite it (best effort)."""
    manifest.update(extra)
    try:
        with (run_dir / "manifest.json").open("w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)
    except OSError:
        pass


def append_notes_log(
    logs_root: Path,
    run_id: str,
    started_at: str,
    command: str,
    summary: str,
) -> None:
    """
    Append an entry to the notes log summarising a run.

    The notes log is stored at ``logs_root/notes.log``; each entry is a JSON
    object on its own line.
    """
    notes_path = logs_root / "notes.log"
    entry = {
        "run_id": run_id,
        "started_at": started_at,
        "command": command,
        "summary": summary,
    }
    logs_root.mkdir(parents=True, exist_ok=True)
    try:
        with notes_path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(entry) + "\n")
    except OSError:
        # Best effort; ignore errors
        pass
