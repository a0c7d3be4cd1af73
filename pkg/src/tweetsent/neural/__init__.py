"""From-scratch numpy implementation of the BiLSTM-attention network."""
from .checkpoint import load_checkpoint, save_checkpoint
from .init import glorot_uniform
from .model import (
    ModelConfig,
    ModelState,
    init_state,
    loss_and_grads,
    model_backward,
    model_forward,
    param_shapes,
    zero_state,
)

__all__ = [
    "ModelConfig", "ModelState", "glorot_uniform", "init_state", "load_checkpoint",
    "loss_and_grads", "model_backward", "model_forward", "param_shapes",
    "save_checkpoint", "zero_state",
]
