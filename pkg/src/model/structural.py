from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

import numpy as np
import torch

from src.errors import StructFitDivergedError

if TYPE_CHECKING:
    import scipy.sparse as sp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StructuralIntervention:
    """Low-rank structural scores ``C = V Vᵀ`` kept on the adjacency pattern."""

    c: torch.Tensor
    v: torch.Tensor
    history: list[float] = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.history[-1] if self.history else math.nan


def adjacency_tensor(
    S: sp.sparray | np.ndarray, dtype: torch.dtype = torch.float64
) -> torch.Tensor:
    dense = S.toarray() if hasattr(S, "toarray") else np.asarray(S)
    return torch.as_tensor(dense, dtype=dtype)


def reconstruction_objective(v: torch.Tensor, s: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Mean squared error of ``S - V Vᵀ S`` over the nonzero pattern of S."""
    residual = s - v @ (v.T @ s)
    return residual[mask].pow(2).mean()


def fit_structural_intervention(
    S: sp.sparray | np.ndarray,
    k: int,
    iters: int = 300,
    lr: float = 1e-3,
    seed: int = 0,
    optimizer: Literal["adam", "sgd"] = "adam",
    dtype: torch.dtype = torch.float64,
) -> StructuralIntervention:
    """Fit V by gradient descent on the adjacency reconstruction objective.

    V starts from a seeded normal draw (std 0.1). The objective is averaged
    over the pattern entries, which has the same minimizer as the sum but keeps
    the step size independent of graph density.

    Raises:
        StructFitDivergedError: If the objective stops being finite.
    """
    if k < 1:
        raise ValueError(f"structural rank must be >= 1, got {k}")
    s = adjacency_tensor(S, dtype)
    mask = s != 0
    generator = torch.Generator().manual_seed(seed)
    v = (0.1 * torch.randn(s.shape[0], k, generator=generator, dtype=dtype)).requires_grad_()
    opt: torch.optim.Optimizer = (
        torch.optim.Adam([v], lr=lr) if optimizer == "adam" else torch.optim.SGD([v], lr=lr)
    )

    history: list[float] = []
    for step in range(iters):
        opt.zero_grad()
        loss = reconstruction_objective(v, s, mask)
        value = float(loss.detach())
        if not math.isfinite(value):
            raise StructFitDivergedError(step, lr)
        history.append(value)
        loss.backward()
        opt.step()

    with torch.no_grad():
        final = float(reconstruction_objective(v, s, mask))
        if not math.isfinite(final):
            raise StructFitDivergedError(iters, lr)
        history.append(final)
        c = (v @ v.T).masked_fill(~mask, 0.0)
    logger.info("Structural intervention fit: objective %.6g after %d iterations", final, iters)
    return StructuralIntervention(c=c, v=v.detach(), history=history)
