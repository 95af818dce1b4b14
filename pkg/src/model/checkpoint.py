from __future__ import annotations

from collections import OrderedDict
from pathlib import Path
from typing import Any

import torch

from src.config.run_config import CgrlConfig, HyperParams
from src.model.cgrl import CgrlModel

FORMAT_VERSION = 1


def save_checkpoint(
    path: Path,
    model: CgrlModel,
    hyper: HyperParams,
    seed: int,
    extra: dict[str, Any] | None = None,
) -> Path:
    """Write config, hyperparameters, seed and every tensor to one torch container."""
    path.parent.mkdir(parents=True, exist_ok=True)
    state = OrderedDict((k, v.detach().cpu().contiguous()) for k, v in model.state_dict().items())
    payload = {
        "format_version": FORMAT_VERSION,
        "in_dim": model.in_dim,
        "config": model.config.model_dump(mode="json"),
        "hyper": hyper.model_dump(mode="json"),
        "seed": seed,
        "extra": extra or {},
        "state_dict": state,
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path: Path) -> tuple[CgrlModel, dict[str, Any]]:
    """Rebuild the model from a checkpoint; returns the model and the metadata."""
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"Unsupported checkpoint format {payload.get('format_version')}")
    config = CgrlConfig.model_validate(payload["config"])
    state = payload["state_dict"]
    dtype = next(iter(state.values())).dtype
    model = CgrlModel(payload["in_dim"], config, seed=payload["seed"], dtype=dtype)
    model.load_state_dict(state)
    model.eval()
    meta = {k: v for k, v in payload.items() if k != "state_dict"}
    meta["hyper"] = HyperParams.model_validate(payload["hyper"])
    return model, meta
