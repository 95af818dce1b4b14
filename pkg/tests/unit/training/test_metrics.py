from __future__ import annotations

import math

import pytest
import torch

from src.errors import EmptyMaskError
from src.training.metrics import classification_metrics, cross_entropy_loss


def _probs(positive: list[float]) -> torch.Tensor:
    p = torch.tensor(positive, dtype=torch.float64)
    return torch.stack([1 - p, p], dim=-1)


class TestCrossEntropy:
    def test_uninformative_prediction(self) -> None:
        loss = cross_entropy_loss(_probs([0.5, 0.5, 0.5]), torch.tensor([1, 0, 1]), [0, 1, 2])
        assert float(loss) == pytest.approx(math.log(2))

    def test_only_masked_rows_count(self) -> None:
        probs = _probs([0.9, 0.01, 0.2])
        y = torch.tensor([1, 1, 0])
        loss = cross_entropy_loss(probs, y, [0, 2])
        expected = -(math.log(0.9) + math.log(0.8)) / 2
        assert float(loss) == pytest.approx(expected)

    def test_disjoint_masks_combine_by_size(self) -> None:
        generator = torch.Generator().manual_seed(0)
        probs = _probs(torch.rand(10, generator=generator, dtype=torch.float64).tolist())
        y = torch.tensor([1, 0, 0, 1, 1, 0, 1, 0, 1, 1])
        first, second = [0, 3, 4], [1, 2, 5, 6, 9]
        combined = cross_entropy_loss(probs, y, first + second)
        parts = 3 * cross_entropy_loss(probs, y, first) + 5 * cross_entropy_loss(probs, y, second)
        assert float(combined) == pytest.approx(float(parts) / 8)

    def test_certain_mistake_is_clamped(self) -> None:
        loss = cross_entropy_loss(_probs([1.0]), torch.tensor([0]), [0])
        assert math.isfinite(float(loss))
        assert float(loss) == pytest.approx(-math.log(1e-12), rel=1e-4)

    def test_empty_mask(self) -> None:
        with pytest.raises(EmptyMaskError):
            cross_entropy_loss(_probs([0.5]), torch.tensor([1]), [])


class TestClassificationMetrics:
    def test_perfect(self) -> None:
        assert classification_metrics([0, 1, 1, 0], [0, 1, 1, 0]) == (1.0, 1.0)

    def test_mixed_confusion_macro(self) -> None:
        y_true = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0]
        y_pred = [1, 1, 1, 0, 1, 1, 0, 0, 0, 0]
        acc, f1 = classification_metrics(y_true, y_pred)
        # positive class scores 6/9 and negative class 8/11
        assert acc == pytest.approx(0.7)
        assert f1 == pytest.approx((6 / 9 + 8 / 11) / 2)

    def test_binary_average(self) -> None:
        y_true = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0]
        y_pred = [1, 1, 1, 0, 1, 1, 0, 0, 0, 0]
        _, f1 = classification_metrics(y_true, y_pred, average="binary")
        assert f1 == pytest.approx(6 / 9)

    def test_single_class_truth(self) -> None:
        acc, f1 = classification_metrics([0, 0, 0], [0, 0, 0])
        assert acc == 1.0
        assert f1 == 1.0

    def test_empty(self) -> None:
        with pytest.raises(EmptyMaskError):
            classification_metrics([], [])
