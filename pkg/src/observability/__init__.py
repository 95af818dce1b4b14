from src.observability.run_log import NullEventLog, RunEventLog

__all__ = [
    "NullEventLog",
    "RunEventLog",
]
