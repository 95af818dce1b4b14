"""Conjoint graph representation learning model.

Each message-passing layer blends two attentions over a patient's
neighbourhood: a Gaussian-kernel feature attention ``o`` and a structure
attention ``t`` derived from the fitted structural intervention ``C``. Two gate
logits per head weigh them, and a learnable ``epsilon`` adds a self bonus
before aggregation. Hidden layers concatenate heads; the last layer averages
them. A linear softmax head produces the class distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import torch
import torch.nn.functional as F
from torch import nn

from src.errors import NoTapeError, ShapeError
from src.model.attention import (
    conjoint_attention,
    gate_weights,
    gaussian_kernel_matrix,
    masked_softmax,
    structure_attention,
)

if TYPE_CHECKING:
    from src.config.run_config import CgrlConfig

N_CLASSES = 2


@dataclass
class LayerTrace:
    g: torch.Tensor
    o: torch.Tensor
    t: torch.Tensor
    delta: torch.Tensor
    r_o: torch.Tensor
    r_t: torch.Tensor
    epsilon: torch.Tensor
    sigma: torch.Tensor


@dataclass
class AttentionTrace:
    """Detached attention matrices per layer, each ``(heads, Z, Z)`` and zero off-pattern."""

    layers: list[LayerTrace] = field(default_factory=list)

    def to_json(self, top_k: int = 5) -> dict[str, Any]:
        """Gate values per head and each node's strongest head-averaged neighbours."""
        layers = []
        for index, trace in enumerate(self.layers):
            mean_delta = trace.delta.mean(0)
            k = min(top_k, mean_delta.shape[-1])
            values, neighbours = torch.topk(mean_delta, k, dim=-1)
            layers.append(
                {
                    "layer": index,
                    "r_o": trace.r_o.tolist(),
                    "r_t": trace.r_t.tolist(),
                    "epsilon": trace.epsilon.tolist(),
                    "sigma": trace.sigma.tolist(),
                    "top_neighbours": [
                        [
                            [int(b), round(float(w), 8)]
                            for b, w in zip(nb, val, strict=True)
                            if w > 0
                        ]
                        for nb, val in zip(neighbours.tolist(), values.tolist(), strict=True)
                    ],
                }
            )
        return {"layers": layers}


def _uniform(
    shape: tuple[int, ...], bound: float, generator: torch.Generator, dtype: torch.dtype
) -> torch.Tensor:
    return torch.empty(shape, dtype=dtype).uniform_(-bound, bound, generator=generator)


def _dropout(x: torch.Tensor, p: float, generator: torch.Generator | None) -> torch.Tensor:
    if p == 0.0:
        return x
    keep = torch.full_like(x, 1.0 - p)
    return x * torch.bernoulli(keep, generator=generator) / (1.0 - p)


class CgrlLayer(nn.Module):
    """One conjoint message-passing layer with per-head weights, gates, sigma and epsilon."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        heads: int,
        concat: bool,
        config: CgrlConfig,
        generator: torch.Generator,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.heads = heads
        self.concat = concat
        self.dropout = config.dropout
        self.ablation = config.ablation
        bound = math.sqrt(6.0 / (in_dim + out_dim))
        self.weight = nn.Parameter(_uniform((heads, in_dim, out_dim), bound, generator, dtype))
        self.gates = nn.Parameter(torch.zeros(heads, 2, dtype=dtype))
        log_sigma = math.log(config.sigma_init)
        self.log_sigma = nn.Parameter(torch.full((heads,), log_sigma, dtype=dtype))
        self.epsilon_logit = nn.Parameter(torch.full((heads,), config.epsilon_init, dtype=dtype))

    @property
    def output_dim(self) -> int:
        return self.out_dim * self.heads if self.concat else self.out_dim

    def mixing(self) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """``(r_o, r_t, epsilon)`` per head; the ablation pins them to ``(1, 0, 0)``."""
        if self.ablation:
            ones = torch.ones(self.heads, dtype=self.gates.dtype)
            zeros = torch.zeros(self.heads, dtype=self.gates.dtype)
            return ones, zeros, zeros
        r_o, r_t = gate_weights(self.gates)
        return r_o, r_t, torch.sigmoid(self.epsilon_logit)

    def forward(
        self,
        h: torch.Tensor,
        mask: torch.Tensor,
        C: torch.Tensor,
        generator: torch.Generator | None = None,
    ) -> tuple[torch.Tensor, LayerTrace]:
        if h.dim() != 2 or h.shape[1] != self.in_dim:
            raise ShapeError(f"Layer expects (Z, {self.in_dim}) input, got {tuple(h.shape)}")
        if mask.shape != (h.shape[0], h.shape[0]) or C.shape != mask.shape:
            raise ShapeError(
                f"Adjacency {tuple(mask.shape)} / C {tuple(C.shape)} "
                f"do not match {h.shape[0]} nodes"
            )
        if self.training:
            h = _dropout(h, self.dropout, generator)

        wh = torch.einsum("zi,kio->kzo", h, self.weight)
        sigma = self.log_sigma.exp()
        g = gaussian_kernel_matrix(wh, sigma)
        o = masked_softmax(g, mask)
        t = structure_attention(C, mask).expand_as(o)
        r_o, r_t, eps = self.mixing()
        delta = conjoint_attention(o, t, r_o, r_t)

        weights = _dropout(delta, self.dropout, generator) if self.training else delta
        degree = mask.sum(-1).to(h.dtype)
        self_bonus = (eps.view(-1, 1) / degree).unsqueeze(-1)
        out = weights @ wh + self_bonus * wh

        out = out.permute(1, 0, 2).reshape(h.shape[0], -1) if self.concat else out.mean(0)
        trace = LayerTrace(
            g=g.detach() * mask,
            o=o.detach(),
            t=t.detach(),
            delta=delta.detach(),
            r_o=r_o.detach(),
            r_t=r_t.detach(),
            epsilon=eps.detach(),
            sigma=sigma.detach(),
        )
        return out, trace


def predict(h: torch.Tensor, w_y: torch.Tensor, b_y: torch.Tensor) -> torch.Tensor:
    """Per-node class distribution ``softmax(h W_y + b_y)``."""
    return torch.softmax(h @ w_y + b_y, dim=-1)


class CgrlModel(nn.Module):
    """Stack of conjoint layers with ELU between them and a softmax head.

    The last layer's head average feeds the softmax head directly.
    """

    def __init__(
        self,
        in_dim: int,
        config: CgrlConfig,
        seed: int = 0,
        dtype: torch.dtype = torch.float32,
    ) -> None:
        super().__init__()
        self.config = config
        self.in_dim = in_dim
        generator = torch.Generator().manual_seed(seed)
        layers = []
        dim = in_dim
        for index in range(config.layers):
            last = index == config.layers - 1
            layer = CgrlLayer(
                dim, config.hidden, config.heads, not last, config, generator, dtype
            )
            layers.append(layer)
            dim = layer.output_dim
        self.layers = nn.ModuleList(layers)
        bound = math.sqrt(6.0 / (dim + N_CLASSES))
        self.w_y = nn.Parameter(_uniform((dim, N_CLASSES), bound, generator, dtype))
        self.b_y = nn.Parameter(torch.zeros(N_CLASSES, dtype=dtype))
        self.trace_enabled = False
        self.last_trace: AttentionTrace | None = None
        self._tape: torch.Tensor | None = None

    def forward(
        self,
        X: torch.Tensor,
        mask: torch.Tensor,
        C: torch.Tensor,
        generator: torch.Generator | None = None,
    ) -> torch.Tensor:
        """Class probabilities ``(Z, 2)``; records the tape and, if enabled, the trace."""
        h = X
        trace = AttentionTrace()
        last = len(self.layers) - 1
        for index, layer in enumerate(self.layers):
            h, layer_trace = layer(h, mask, C, generator)
            if index < last:
                h = F.elu(h)
            if self.trace_enabled:
                trace.layers.append(layer_trace)
        probs = predict(h, self.w_y, self.b_y)
        self.last_trace = trace if self.trace_enabled else None
        self._tape = probs if probs.requires_grad else None
        return probs

    def backward(self, loss: torch.Tensor) -> dict[str, torch.Tensor]:
        """Reverse-mode gradients of ``loss`` for every parameter.

        Raises:
            NoTapeError: If no differentiable forward pass has been recorded.
        """
        if self._tape is None or not loss.requires_grad:
            raise NoTapeError()
        self.zero_grad(set_to_none=True)
        loss.backward()
        self._tape = None
        return {
            name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
            for name, p in self.named_parameters()
        }
