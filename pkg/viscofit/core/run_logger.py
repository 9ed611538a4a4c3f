"""JSON-lines log of Levenberg-Marquardt iterations."""

from __future__ import annotations

import json
import logging
import socket
from datetime import UTC, datetime
from pathlib import Path
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Sequence

LOGGER = logging.getLogger(__name__)


class IterationLogger:
    """Appends one record per LM iteration to a JSON-lines file.

    Each record carries the timestamp, host, iteration number, Φ, the damping λ,
    whether the step was accepted, and the parameter vector after the step.
    """

    def __init__(self, log_file: Path | str | None = None, *, truncate: bool = False) -> None:
        """Open the log at ``log_file`` (default ``./fit_log.jsonl``); ``truncate`` drops earlier runs."""
        self.log_file = Path(log_file) if log_file is not None else Path.cwd() / "fit_log.jsonl"
        self.log_file.parent.mkdir(parents=True, exist_ok=True)
        if truncate:
            self.log_file.unlink(missing_ok=True)
        self._hostname = socket.gethostname()

    def log_iteration(
        self,
        *,
        iteration: int,
        phi: float,
        damping: float,
        accepted: bool,
        params: Sequence[float],
    ) -> None:
        """Append one record; write failures are logged and never interrupt the fit."""
        record: dict[str, Any] = {
            "timestamp": datetime.now(UTC).isoformat(),
            "hostname": self._hostname,
            "iteration": iteration,
            "phi": float(phi),
            "lambda": float(damping),
            "accepted": accepted,
            "params": [float(p) for p in params],
        }
        try:
            with self.log_file.open("a", encoding="utf-8") as f:
                f.write(json.dumps(record) + "\n")
        except OSError:
            LOGGER.exception("Failed to write iteration log")

    def records(self) -> list[dict[str, Any]]:
        """All records in the file, oldest first."""
        if not self.log_file.exists():
            return []
        with self.log_file.open(encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
