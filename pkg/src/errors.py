from __future__ import annotations


class ComorbinetError(Exception):
    """Base exception for cohort, network, model and pipeline errors."""

    def __init__(self, message: str, stage: str | None = None) -> None:
        self.message = message
        self.stage = stage
        super().__init__(message)


class CohortParseError(ComorbinetError):
    """Raised when a cohort input row cannot be parsed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, stage="ingest")


class DuplicatePatientIdError(ComorbinetError):
    """Raised when the same patient id appears twice in one cohort."""

    def __init__(self, patient_id: str, message: str | None = None) -> None:
        self.patient_id = patient_id
        if message is None:
            message = f"Duplicate patient id '{patient_id}'"
        super().__init__(message, stage="ingest")


class DegenerateCohortError(ComorbinetError):
    """Raised when a cohort is empty or lacks one of the two label classes."""

    pass


class EmptyPopulationError(ComorbinetError):
    """Raised when a prevalence is requested over zero patients."""

    def __init__(self, message: str = "Population is empty") -> None:
        super().__init__(message)


class UndefinedCorrelationError(ComorbinetError):
    """Raised when COCO is requested for two diseases with zero prevalence."""

    pass


class DegenerateDdnError(ComorbinetError):
    """Raised when case and control groups leave no positive differential weight."""

    pass


class PageRankDivergedError(ComorbinetError):
    """Raised when power iteration does not reach the tolerance."""

    def __init__(self, iterations: int, residual: float) -> None:
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"PageRank did not converge in {iterations} iterations (L1 residual {residual:.3e})"
        )


class EmptyPatientNetworkError(ComorbinetError):
    """Raised when a patient network without diseases is scored."""

    pass


class StructFitDivergedError(ComorbinetError):
    """Raised when the structural-intervention objective becomes non-finite."""

    def __init__(self, iteration: int, lr: float) -> None:
        self.iteration = iteration
        self.lr = lr
        super().__init__(
            f"Structural intervention fit diverged at iteration {iteration}; "
            f"try a learning rate below {lr}"
        )


class ShapeError(ComorbinetError):
    """Raised when tensor dimensions disagree."""

    pass


class NoTapeError(ComorbinetError):
    """Raised when gradients are requested before a recorded forward pass."""

    def __init__(self, message: str = "backward() called without a recorded forward pass") -> None:
        super().__init__(message)


class InsufficientClassError(ComorbinetError):
    """Raised when a label class is too small to stratify."""

    def __init__(self, label: str, size: int, minimum: int = 3) -> None:
        self.label = label
        self.size = size
        super().__init__(f"Class '{label}' has {size} members; at least {minimum} required")


class EmptyMaskError(ComorbinetError):
    """Raised when a loss or metric is computed over an empty index set."""

    def __init__(self, message: str = "Index mask is empty") -> None:
        super().__init__(message)


class TrainingDivergedError(ComorbinetError):
    """Raised when the training loss becomes non-finite."""

    def __init__(self, epoch: int, loss: float) -> None:
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"Training loss became {loss} at epoch {epoch}", stage="train")


class NoTargetReachedError(ComorbinetError):
    """Raised when no case patient carries any target code."""

    pass


class StageFailedError(ComorbinetError):
    """Raised by the pipeline when one stage fails; wraps the original error."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.cause = cause
        super().__init__(f"Stage '{stage}' failed: {cause}", stage=stage)


class ComorbinetWarning(UserWarning):
    """Base warning category."""


class NonSeparableSpecWarning(ComorbinetWarning):
    """Planted-cluster probability does not exceed the baseline probability."""


class ZeroVarianceFeatureWarning(ComorbinetWarning):
    """A network feature column is constant over the training rows."""
