from __future__ import annotations

from typing import TYPE_CHECKING, Literal

import numpy as np
import torch
from sklearn.metrics import accuracy_score, f1_score

from src.errors import EmptyMaskError

if TYPE_CHECKING:
    from collections.abc import Sequence

PROB_FLOOR = 1e-12


def _index(mask: Sequence[int] | torch.Tensor) -> torch.Tensor:
    index = torch.as_tensor(mask, dtype=torch.long)
    if index.numel() == 0:
        raise EmptyMaskError()
    return index


def cross_entropy_loss(
    probs: torch.Tensor, y: torch.Tensor, mask: Sequence[int] | torch.Tensor
) -> torch.Tensor:
    """Binary cross-entropy of the positive-class probability over ``mask``.

    Probabilities are clamped to ``[1e-12, 1 - 1e-12]`` before the log.
    """
    index = _index(mask)
    p = probs[index, 1].clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
    target = y[index].to(p.dtype)
    return -(target * torch.log(p) + (1.0 - target) * torch.log(1.0 - p)).mean()


def classification_metrics(
    y_true: Sequence[int] | np.ndarray,
    y_pred: Sequence[int] | np.ndarray,
    average: Literal["macro", "binary"] = "macro",
) -> tuple[float, float]:
    """Accuracy and F1 (macro over both classes, or positive-class)."""
    if len(y_true) == 0:
        raise EmptyMaskError()
    acc = accuracy_score(y_true, y_pred)
    labels = [0, 1] if average == "macro" else None
    f1 = f1_score(y_true, y_pred, average=average, labels=labels, zero_division=1.0)
    return float(acc), float(f1)
