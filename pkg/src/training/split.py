from __future__ import annotations

import math
from collections import defaultdict
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.errors import InsufficientClassError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from src.cohort.models import Cohort

_CLASS_NAMES = {1: "case", 0: "control"}


class SplitPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    train_idx: tuple[int, ...]
    val_idx: tuple[int, ...]
    test_idx: tuple[int, ...]
    ratios: tuple[float, float, float]
    seed: int


def _largest_remainder(total: int, ratios: Sequence[float]) -> list[int]:
    quotas = [total * r for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[: total - sum(sizes)]:
        sizes[i] += 1
    return sizes


def stratified_partition(
    labels: Sequence[int], ratios: Sequence[float], seed: int
) -> list[list[int]]:
    """Split positions into ``len(ratios)`` parts, stratified by label.

    Part sizes follow largest-remainder rounding of ``len(labels) * ratio``;
    within each class every part is within one member of its exact share.
    """
    by_class: dict[int, list[int]] = defaultdict(list)
    for position, label in enumerate(labels):
        by_class[label].append(position)
    for label, members in sorted(by_class.items()):
        if len(members) < len(ratios):
            name = _CLASS_NAMES.get(label, str(label))
            raise InsufficientClassError(name, len(members), len(ratios))

    targets = _largest_remainder(len(labels), ratios)
    plan: dict[int, list[int]] = {}
    for label, members in sorted(by_class.items()):
        quotas = [len(members) * r for r in ratios]
        plan[label] = [math.floor(q) for q in quotas]

    deficit = [targets[p] - sum(sizes[p] for sizes in plan.values()) for p in range(len(ratios))]
    # classes with more leftovers choose first so the per-class cap of one extra holds
    for label in sorted(plan, key=lambda c: (-(len(by_class[c]) - sum(plan[c])), c)):
        sizes = plan[label]
        quotas = [len(by_class[label]) * r for r in ratios]
        leftover = len(by_class[label]) - sum(sizes)
        ranked = sorted(
            range(len(ratios)), key=lambda p: (deficit[p] <= 0, -(quotas[p] - sizes[p]), p)
        )
        for p in ranked[:leftover]:
            sizes[p] += 1
            deficit[p] -= 1

    rng = np.random.default_rng(seed)
    parts: list[list[int]] = [[] for _ in ratios]
    for label, members in sorted(by_class.items()):
        shuffled = [members[i] for i in rng.permutation(len(members))]
        start = 0
        for p, size in enumerate(plan[label]):
            parts[p].extend(shuffled[start : start + size])
            start += size
    return [sorted(part) for part in parts]


def stratified_split(
    cohort: Cohort, ratios: tuple[float, float, float] = (0.6, 0.2, 0.2), seed: int = 0
) -> SplitPlan:
    """Stratified train/validation/test plan over the cohort's patient positions."""
    train, val, test = stratified_partition(cohort.labels, ratios, seed)
    return SplitPlan(
        train_idx=tuple(train), val_idx=tuple(val), test_idx=tuple(test), ratios=ratios, seed=seed
    )
