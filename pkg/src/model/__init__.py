from src.model.attention import (
    conjoint_attention,
    gate_weights,
    gaussian_affinity,
    gaussian_kernel_matrix,
    masked_softmax,
    structure_attention,
)
from src.model.cgrl import AttentionTrace, CgrlLayer, CgrlModel, LayerTrace, predict
from src.model.checkpoint import load_checkpoint, save_checkpoint
from src.model.structural import StructuralIntervention, fit_structural_intervention

__all__ = [
    "AttentionTrace",
    "CgrlLayer",
    "CgrlModel",
    "LayerTrace",
    "StructuralIntervention",
    "conjoint_attention",
    "fit_structural_intervention",
    "gate_weights",
    "gaussian_affinity",
    "gaussian_kernel_matrix",
    "load_checkpoint",
    "masked_softmax",
    "predict",
    "save_checkpoint",
    "structure_attention",
]
