"""Validated configuration for every pipeline stage.

A run is described by one JSON file parsed into :class:`RunConfig`. Each
module precondition is checked here so that a bad file fails before any
stage does work.
"""

from __future__ import annotations

import math
import re
from enum import StrEnum
from pathlib import Path
from typing import Literal, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

CODE_PATTERN = re.compile(r"^[A-Z][0-9]{2}$")


class Target(StrEnum):
    DM = "DM"
    CHD = "CHD"

    @classmethod
    def parse(cls, value: str | Target) -> Target:
        if isinstance(value, Target):
            return value
        try:
            return cls(value.strip().upper())
        except ValueError:
            raise ValueError(f"Invalid target: '{value}'. Expected 'dm' or 'chd'")


def _check_code(code: str) -> str:
    code = code.strip().upper()
    if not CODE_PATTERN.match(code):
        raise ValueError(f"Invalid ICD-10 category '{code}'. Expected letter + two digits")
    return code


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class CodeRanges(_Frozen):
    """Inclusive ICD-10 category ranges for hypertension and the two targets."""

    hypertension: tuple[str, str] = ("I10", "I15")
    dm: tuple[str, str] = ("E10", "E14")
    chd: tuple[str, str] = ("I20", "I25")

    @field_validator("hypertension", "dm", "chd")
    @classmethod
    def validate_range(cls, v: tuple[str, str]) -> tuple[str, str]:
        lo, hi = _check_code(v[0]), _check_code(v[1])
        if lo > hi:
            raise ValueError(f"Empty code range {lo}-{hi}")
        return lo, hi

    @staticmethod
    def _within(code: str, bounds: tuple[str, str]) -> bool:
        return bounds[0] <= code <= bounds[1]

    def is_hypertension(self, code: str) -> bool:
        return self._within(code, self.hypertension)

    def is_target(self, code: str, target: Target) -> bool:
        return self._within(code, self.dm if target is Target.DM else self.chd)

    @classmethod
    def from_file(cls, path: Path) -> CodeRanges:
        return cls.model_validate_json(path.read_text())


DEFAULT_PLANTED: dict[Target, tuple[str, ...]] = {
    Target.DM: ("I25", "I51", "K76"),
    Target.CHD: ("N18", "H25"),
}
DEFAULT_TARGET_CODE: dict[Target, str] = {Target.DM: "E11", Target.CHD: "I25"}
PROFILE_SIZE: dict[Target, int] = {Target.DM: 1024, Target.CHD: 1668}
PROFILE_HIDDEN: dict[Target, int] = {Target.DM: 128, Target.CHD: 8}


class SyntheticCohortSpec(_Frozen):
    target: Target = Target.DM
    n_patients: int = Field(default=1024, ge=6)
    universe_size: int = Field(default=40, ge=4)
    planted: tuple[str, ...] | None = None
    target_code: str | None = None
    p_case: float = Field(default=0.8, ge=0.0, le=1.0)
    p_base: float = Field(default=0.1, ge=0.0, le=1.0)
    background_rate: float = Field(default=0.08, ge=0.0, le=1.0)
    case_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    min_admissions: int = Field(default=2, ge=2)
    max_admissions: int = Field(default=5, ge=2)
    progression: tuple[str, ...] = ()
    progression_rate: float = Field(default=0.6, ge=0.0, le=1.0)

    @field_validator("target", mode="before")
    @classmethod
    def parse_target(cls, v: object) -> Target:
        return Target.parse(str(v))

    @field_validator("planted", "progression")
    @classmethod
    def validate_codes(cls, v: tuple[str, ...] | None) -> tuple[str, ...] | None:
        if v is None:
            return None
        return tuple(_check_code(c) for c in v)

    @field_validator("target_code")
    @classmethod
    def validate_target_code(cls, v: str | None) -> str | None:
        return None if v is None else _check_code(v)

    @model_validator(mode="after")
    def validate_admissions(self) -> Self:
        if self.max_admissions < self.min_admissions:
            raise ValueError("max_admissions must be >= min_admissions")
        if self.progression and self.max_admissions < len(self.progression) + 1:
            raise ValueError("max_admissions too small to place the progression chain")
        return self

    @property
    def planted_codes(self) -> tuple[str, ...]:
        return self.planted if self.planted is not None else DEFAULT_PLANTED[self.target]

    @property
    def resolved_target_code(self) -> str:
        return self.target_code or DEFAULT_TARGET_CODE[self.target]


class NetworkConfig(_Frozen):
    theta: int = Field(default=1, ge=1, description="Minimum shared-disease count per edge")
    beta: float = Field(default=math.sqrt(2), gt=0.0)
    min_coco: float = Field(default=0.0, ge=0.0)
    ddn_prior_fraction: float | None = Field(
        default=None,
        gt=0.0,
        lt=1.0,
        description="Carve this share of patients out as DDN prior knowledge; "
        "None builds the DDN from the training split",
    )


class SplitConfig(_Frozen):
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)

    @field_validator("ratios")
    @classmethod
    def validate_ratios(cls, v: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(r <= 0 for r in v) or not math.isclose(sum(v), 1.0, abs_tol=1e-9):
            raise ValueError(f"Split ratios must be positive and sum to 1, got {v}")
        return v


class CgrlConfig(_Frozen):
    layers: int = Field(default=2, ge=1)
    hidden: int = Field(default=128, ge=1, description="Per-head hidden width (hi)")
    heads: int = Field(default=8, ge=1, description="Attention heads (hd)")
    dropout: float = Field(default=0.06, ge=0.0, lt=1.0, description="Dropout rate (dr)")
    struct_rank: int = Field(default=8, ge=1)
    sigma_init: float = Field(default=1.0, gt=0.0)
    epsilon_init: float = Field(default=0.0, description="Pre-sigmoid epsilon init")
    struct_iters: int = Field(default=300, ge=1)
    struct_lr: float = Field(default=1e-3, gt=0.0)
    struct_optimizer: Literal["adam", "sgd"] = "adam"
    ablation: bool = Field(
        default=False, description="Force r_t = 0 and epsilon = 0 (feature attention only)"
    )


class HyperParams(_Frozen):
    lam: float = Field(default=0.01, ge=0.0, description="lambda: weight decay strength")
    eta: float = Field(default=0.02, gt=0.0, description="eta: optimizer learning rate")
    lambda_mode: Literal["weight_decay", "lr_decay"] = "weight_decay"
    max_epochs: int = Field(default=500, ge=1)
    patience: int = Field(default=50, ge=1)
    f1_average: Literal["macro", "binary"] = "macro"
    log_every: int = Field(default=50, ge=1)

    @model_validator(mode="after")
    def validate_decay(self) -> Self:
        if self.lambda_mode == "lr_decay" and self.lam >= 1.0:
            raise ValueError("lr_decay needs lambda < 1")
        return self


class AnalysisConfig(_Frozen):
    top_k: int = Field(default=10, ge=1)
    cluster_min_weight: float | None = Field(
        default=None, ge=0.0, description="None uses the 75th percentile of edge weights"
    )
    pathway_threshold: float = Field(default=0.2, ge=0.0, le=1.0)


class RunConfig(_Frozen):
    target: Target = Target.DM
    input: Path | None = None
    input_format: Literal["jsonl", "csv"] = "jsonl"
    code_ranges: CodeRanges = Field(default_factory=CodeRanges)
    synthetic: SyntheticCohortSpec | None = None
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    model: CgrlConfig = Field(default_factory=CgrlConfig)
    hyper: HyperParams = Field(default_factory=HyperParams)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    runs: int = Field(default=5, ge=1)
    seed: int = Field(default=42, ge=0)
    out: Path | None = None

    @field_validator("target", mode="before")
    @classmethod
    def parse_target(cls, v: object) -> Target:
        return Target.parse(str(v))

    @model_validator(mode="after")
    def validate_source(self) -> Self:
        if self.input is not None and self.synthetic is not None:
            raise ValueError("Give either 'input' or 'synthetic', not both")
        if self.synthetic is not None and self.synthetic.target is not self.target:
            raise ValueError("synthetic.target must match target")
        return self

    @property
    def cohort_source(self) -> SyntheticCohortSpec | Path:
        if self.input is not None:
            return self.input
        return self.synthetic or SyntheticCohortSpec(
            target=self.target, n_patients=PROFILE_SIZE[self.target]
        )

    @classmethod
    def for_target(cls, target: str | Target) -> RunConfig:
        """Profile defaults for the DM or CHD cohort."""
        resolved = Target.parse(target)
        return cls(
            target=resolved,
            synthetic=SyntheticCohortSpec(target=resolved, n_patients=PROFILE_SIZE[resolved]),
            model=CgrlConfig(hidden=PROFILE_HIDDEN[resolved]),
        )

    @classmethod
    def from_file(cls, path: Path) -> RunConfig:
        return cls.model_validate_json(path.read_text())

    def with_overrides(self, **overrides: object) -> RunConfig:
        """Apply CLI flag overrides, revalidating the result."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        if not updates:
            return self
        data = self.model_dump()
        data.update(updates)
        if "target" in updates and data.get("synthetic") is not None:
            data["synthetic"]["target"] = updates["target"]
        return RunConfig.model_validate(data)
