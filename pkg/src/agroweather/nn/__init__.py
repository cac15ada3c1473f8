"""Minimal recurrent network engine: activations, LSTM layers, model, gradients."""

from .functional import lstm_cell, sigmoid, swish, swish_grad
from .model import BiLstmModel, ModelConfig, forward, gradients, init_params, param_count

__all__ = [
    "BiLstmModel",
    "ModelConfig",
    "forward",
    "gradients",
    "init_params",
    "lstm_cell",
    "param_count",
    "sigmoid",
    "swish",
    "swish_grad",
]
