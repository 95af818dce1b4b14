from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np
import pandas as pd
import torch

from src.errors import EmptyMaskError, ShapeError, TrainingDivergedError
from src.model.cgrl import CgrlModel
from src.model.structural import adjacency_tensor
from src.observability.run_log import NullEventLog, RunEventLog
from src.training.metrics import classification_metrics, cross_entropy_loss

if TYPE_CHECKING:
    from collections.abc import Sequence

    import scipy.sparse as sp

    from src.config.run_config import CgrlConfig, HyperParams
    from src.training.split import SplitPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphInputs:
    """Dense tensors the model trains on: features, adjacency mask, C and labels."""

    x: torch.Tensor
    mask: torch.Tensor
    c: torch.Tensor
    y: torch.Tensor

    def __post_init__(self) -> None:
        z = self.x.shape[0]
        if self.mask.shape != (z, z) or self.c.shape != (z, z) or self.y.shape != (z,):
            raise ShapeError(
                f"Inconsistent inputs: X {tuple(self.x.shape)}, S {tuple(self.mask.shape)}, "
                f"C {tuple(self.c.shape)}, y {tuple(self.y.shape)}"
            )

    @property
    def num_nodes(self) -> int:
        return int(self.x.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.x.shape[1])

    @classmethod
    def build(
        cls,
        features: np.ndarray,
        adjacency: sp.sparray | np.ndarray,
        c: torch.Tensor,
        labels: Sequence[int],
        dtype: torch.dtype = torch.float32,
    ) -> GraphInputs:
        return cls(
            x=torch.as_tensor(np.asarray(features), dtype=dtype),
            mask=adjacency_tensor(adjacency) != 0,
            c=c.detach().to(dtype),
            y=torch.as_tensor(list(labels), dtype=torch.long),
        )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float


@dataclass
class TrainResult:
    model: CgrlModel
    best_epoch: int
    best_val_loss: float
    history: list[EpochRecord] = field(default_factory=list)

    @property
    def epochs_run(self) -> int:
        return len(self.history)

    def loss_curve(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(r.epoch, r.train_loss, r.val_loss) for r in self.history],
            columns=["epoch", "train_loss", "val_loss"],
        )

    def write_loss_curve(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.loss_curve().to_csv(path, index=False, float_format="%.12g")
        return path


def _optimizer(
    model: CgrlModel, hyper: HyperParams
) -> tuple[torch.optim.Optimizer, torch.optim.lr_scheduler.LRScheduler | None]:
    if hyper.lambda_mode == "lr_decay":
        optimizer = torch.optim.Adam(model.parameters(), lr=hyper.eta, betas=(0.9, 0.999))
        return optimizer, torch.optim.lr_scheduler.ExponentialLR(optimizer, gamma=1.0 - hyper.lam)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=hyper.eta, betas=(0.9, 0.999), weight_decay=hyper.lam
    )
    return optimizer, None


def _index(indices: Sequence[int]) -> torch.Tensor:
    if len(indices) == 0:
        raise EmptyMaskError()
    return torch.as_tensor(list(indices), dtype=torch.long)


def train(
    inputs: GraphInputs,
    plan: SplitPlan,
    config: CgrlConfig,
    hyper: HyperParams,
    seed: int,
    event_log: RunEventLog | None = None,
) -> TrainResult:
    """Full-graph training on the train mask with early stopping on validation loss.

    The returned model holds the parameters of the best validation epoch and is
    left in eval mode.

    Raises:
        TrainingDivergedError: If a training or validation loss is not finite.
    """
    events = event_log or NullEventLog()
    train_idx = _index(plan.train_idx)
    val_idx = _index(plan.val_idx)

    model = CgrlModel(inputs.num_features, config, seed=seed, dtype=inputs.x.dtype)
    optimizer, scheduler = _optimizer(model, hyper)
    dropout_rng = torch.Generator().manual_seed(seed + 1)

    best_val = math.inf
    best_epoch = -1
    best_state = copy.deepcopy(model.state_dict())
    stale = 0
    history: list[EpochRecord] = []

    for epoch in range(hyper.max_epochs):
        model.train()
        probs = model(inputs.x, inputs.mask, inputs.c, dropout_rng)
        loss = cross_entropy_loss(probs, inputs.y, train_idx)
        train_loss = float(loss.detach())
        if not math.isfinite(train_loss):
            raise TrainingDivergedError(epoch, train_loss)
        model.backward(loss)
        optimizer.step()
        if scheduler is not None:
            scheduler.step()

        model.eval()
        with torch.no_grad():
            val_probs = model(inputs.x, inputs.mask, inputs.c)
            val_loss = float(cross_entropy_loss(val_probs, inputs.y, val_idx))
        if not math.isfinite(val_loss):
            raise TrainingDivergedError(epoch, val_loss)
        history.append(EpochRecord(epoch, train_loss, val_loss))

        if epoch % hyper.log_every == 0:
            logger.debug("epoch %d train %.6f val %.6f", epoch, train_loss, val_loss)
            events.epoch(epoch, train_loss=train_loss, val_loss=val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            stale = 0
        else:
            stale += 1
            if stale >= hyper.patience:
                break

    model.load_state_dict(best_state)
    model.eval()
    logger.info(
        "Training stopped after %d epochs; best validation loss %.6f at epoch %d",
        len(history),
        best_val,
        best_epoch,
    )
    return TrainResult(model=model, best_epoch=best_epoch, best_val_loss=best_val, history=history)


def predictions(model: CgrlModel, inputs: GraphInputs) -> torch.Tensor:
    """Argmax class per node under eval mode."""
    model.eval()
    with torch.no_grad():
        probs = model(inputs.x, inputs.mask, inputs.c)
    return probs.argmax(dim=-1)


def evaluate(
    model: CgrlModel,
    inputs: GraphInputs,
    test_idx: Sequence[int],
    average: Literal["macro", "binary"] = "macro",
) -> tuple[float, float]:
    """Accuracy and F1 of the argmax predictions on ``test_idx``."""
    index = _index(test_idx)
    predicted = predictions(model, inputs)[index].numpy()
    return classification_metrics(inputs.y[index].numpy(), predicted, average)
