from src.config.run_config import (
    AnalysisConfig,
    CgrlConfig,
    CodeRanges,
    HyperParams,
    NetworkConfig,
    RunConfig,
    SplitConfig,
    SyntheticCohortSpec,
    Target,
)
from src.config.settings import Settings, get_settings, reset_settings

__all__ = [
    "AnalysisConfig",
    "CgrlConfig",
    "CodeRanges",
    "HyperParams",
    "NetworkConfig",
    "RunConfig",
    "Settings",
    "SplitConfig",
    "SyntheticCohortSpec",
    "Target",
    "get_settings",
    "reset_settings",
]
