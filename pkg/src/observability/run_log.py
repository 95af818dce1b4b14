from __future__ import annotations

import json
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)


class RunEventLog:
    """Append pipeline activity to a dated JSONL file for debugging and analytics.

    Each line is ``{"timestamp", "run_id", "event", "data"}``. Stages are wrapped
    with :meth:`stage`, which records start, completion with duration, and
    errors with their type.

    Usage:
        events = RunEventLog(run_dir / "logs", run_id="dm-42")
        with events.stage("networks"):
            ...
    """

    def __init__(self, log_dir: Path, run_id: str = "default", enabled: bool = True) -> None:
        self.log_dir = log_dir
        self.run_id = run_id
        self.enabled = enabled
        if self.enabled:
            self.log_dir.mkdir(parents=True, exist_ok=True)

    def _get_log_file(self) -> Path:
        date_str = datetime.now(UTC).strftime("%Y-%m-%d")
        return self.log_dir / f"events-{date_str}.jsonl"

    def log(self, event: str, data: dict[str, Any] | None = None) -> None:
        if not self.enabled:
            return
        entry = {
            "timestamp": datetime.now(UTC).isoformat(),
            "run_id": self.run_id,
            "event": event,
            "data": data or {},
        }
        with open(self._get_log_file(), "a") as f:
            f.write(json.dumps(entry, default=str) + "\n")

    def epoch(self, epoch: int, **values: float) -> None:
        self.log("epoch", {"epoch": epoch, **values})

    @contextmanager
    def stage(self, name: str, **data: Any) -> Iterator[None]:
        start_time = datetime.now(UTC)
        self.log("stage_start", {"stage": name, **data})
        try:
            yield
        except Exception as e:
            duration_ms = (datetime.now(UTC) - start_time).total_seconds() * 1000
            self.log(
                "stage_error",
                {
                    "stage": name,
                    "duration_ms": round(duration_ms, 2),
                    "error": str(e),
                    "error_type": type(e).__name__,
                },
            )
            raise
        duration_ms = (datetime.now(UTC) - start_time).total_seconds() * 1000
        logger.info("Stage %s finished in %.0f ms", name, duration_ms)
        self.log("stage_complete", {"stage": name, "duration_ms": round(duration_ms, 2)})


class NullEventLog(RunEventLog):
    """Event log that records nothing; used when a caller passes no log."""

    def __init__(self) -> None:
        super().__init__(Path("."), run_id="null", enabled=False)
