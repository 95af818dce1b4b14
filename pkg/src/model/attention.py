"""Attention primitives of the conjoint layer.

All functions work on dense ``(Z, Z)`` score matrices restricted by a boolean
neighbourhood mask that includes the diagonal, so every row has at least one
admissible entry.
"""

from __future__ import annotations

import math

import torch

from src.errors import ShapeError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gaussian_affinity(
    h_a: torch.Tensor, h_b: torch.Tensor, W: torch.Tensor, sigma: torch.Tensor | float
) -> torch.Tensor:
    """Gaussian kernel between two projected node vectors.

    ``W`` maps input features to the projected space (``W @ h``).
    """
    if h_a.shape != h_b.shape or W.shape[-1] != h_a.shape[-1]:
        raise ShapeError(f"Cannot project {tuple(h_a.shape)} with W {tuple(W.shape)}")
    diff = W @ h_a - W @ h_b
    sigma = torch.as_tensor(sigma, dtype=diff.dtype)
    return _INV_SQRT_2PI / sigma * torch.exp(-(diff @ diff) / (2.0 * sigma**2))


def gaussian_kernel_matrix(wh: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
    """Pairwise kernel over projected rows.

    ``wh`` is ``(heads, Z, F)`` and ``sigma`` is ``(heads,)``.
    """
    sq = (wh * wh).sum(-1)
    dist = (sq.unsqueeze(-1) + sq.unsqueeze(-2) - 2.0 * wh @ wh.transpose(-1, -2)).clamp_min(0.0)
    s = sigma.view(-1, 1, 1)
    return _INV_SQRT_2PI / s * torch.exp(-dist / (2.0 * s**2))


def masked_softmax(scores: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Row softmax over the entries where ``mask`` is set; zero elsewhere."""
    filled = scores.masked_fill(~mask, float("-inf"))
    return torch.softmax(filled, dim=-1).masked_fill(~mask, 0.0)


def structure_attention(C: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """``t_ab = exp(C_ab) / sum_k exp(C_ak)`` over each neighbourhood."""
    return masked_softmax(C, mask)


def gate_weights(gates: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Two-logit softmax gate; ``gates[..., 0]`` is s_o and ``gates[..., 1]`` is s_t."""
    r = torch.softmax(gates, dim=-1)
    return r[..., 0], r[..., 1]


def conjoint_attention(
    o: torch.Tensor, t: torch.Tensor, r_o: torch.Tensor, r_t: torch.Tensor
) -> torch.Tensor:
    """Convex blend of feature attention ``o`` and structure attention ``t``.

    Rows of ``o`` and ``t`` are normalized and ``r_o + r_t = 1``, so rows of the
    result are normalized as well.
    """
    if r_o.dim() > 0:
        r_o = r_o.view(-1, 1, 1)
        r_t = r_t.view(-1, 1, 1)
    return r_o * o + r_t * t
