from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

FAILED_MARKER = "FAILED"


class RunDirectory:
    """
    Manages one pipeline run's output tree.

    Structure:
    {root}/
    ├── config.json
    ├── manifest.json
    ├── cohort/
    │   ├── cohort.jsonl
    │   └── summary.json
    ├── networks/
    ├── features.csv
    ├── checkpoints/
    ├── curves/
    ├── report.json
    ├── analysis/
    ├── logs/
    └── FAILED              # only when a stage failed
    """

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self.cohort_dir = self.root / "cohort"
        self.networks_dir = self.root / "networks"
        self.checkpoints_dir = self.root / "checkpoints"
        self.curves_dir = self.root / "curves"
        self.analysis_dir = self.root / "analysis"
        self.logs_dir = self.root / "logs"

    @property
    def config_path(self) -> Path:
        return self.root / "config.json"

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    @property
    def features_path(self) -> Path:
        return self.root / "features.csv"

    @property
    def report_path(self) -> Path:
        return self.root / "report.json"

    @property
    def failed_marker(self) -> Path:
        return self.root / FAILED_MARKER

    def ensure(self) -> Path:
        """Create the directory tree if it doesn't exist; clears a stale FAILED marker."""
        for directory in (
            self.root,
            self.cohort_dir,
            self.networks_dir,
            self.checkpoints_dir,
            self.curves_dir,
            self.analysis_dir,
            self.logs_dir,
        ):
            directory.mkdir(parents=True, exist_ok=True)
        self.failed_marker.unlink(missing_ok=True)
        return self.root

    def checkpoint_path(self, seed: int, ablation: bool = False) -> Path:
        suffix = "-ablation" if ablation else ""
        return self.checkpoints_dir / f"run-{seed}{suffix}.pt"

    def curve_path(self, seed: int, ablation: bool = False) -> Path:
        suffix = "-ablation" if ablation else ""
        return self.curves_dir / f"loss-{seed}{suffix}.csv"

    def write_json(self, relative_path: str, data: Any) -> Path:
        """Write ``data`` as indented, key-sorted JSON under the run root."""
        file_path = self.root / relative_path
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return file_path

    def load_json(self, relative_path: str) -> Any | None:
        file_path = self.root / relative_path
        if not file_path.exists():
            return None
        return json.loads(file_path.read_text())

    def mark_failed(self, stage: str, error: BaseException) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        self.failed_marker.write_text(f"stage: {stage}\nerror: {type(error).__name__}: {error}\n")
        return self.failed_marker

    def is_failed(self) -> bool:
        return self.failed_marker.exists()

    def artifacts(self) -> list[Path]:
        """Every file in the run except logs, the manifest and the FAILED marker."""
        skip = {self.manifest_path, self.failed_marker}
        return sorted(
            p
            for p in self.root.rglob("*")
            if p.is_file() and p not in skip and self.logs_dir not in p.parents
        )

    def checksums(self) -> dict[str, str]:
        return {
            p.relative_to(self.root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in self.artifacts()
        }
