from src.storage.run_directory import FAILED_MARKER, RunDirectory

__all__ = [
    "FAILED_MARKER",
    "RunDirectory",
]
