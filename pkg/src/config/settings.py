from __future__ import annotations

from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_LOG_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="COMORBINET_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    threads: int | None = Field(
        default=None,
        ge=1,
        description="Upper bound on torch intra-op threads and parallel training runs",
    )
    log_level: str = Field(default="INFO", description="Root log level for the CLI")
    data_path: Path = Field(
        default=Path("runs"),
        description="Base path for run directories when --out is not given",
    )
    log_events: bool = Field(
        default=True, description="Write the JSONL stage event log into each run directory"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"Invalid log level: '{v}'. Expected one of {sorted(_LOG_LEVELS)}")
        return level

    def run_path(self, name: str) -> Path:
        """Path of a named run directory under the data path."""
        return self.data_path / name


_settings: Settings | None = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    global _settings
    _settings = None
