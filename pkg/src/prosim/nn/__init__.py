"""Minimal neural machinery: layers, training, gradient checks, weight files.

Everything is plain numpy with float64 parameters so that analytic gradients
can be verified against central finite differences to tight tolerances.
"""

from .core import (LayerSpec, NetworkSpec, TrainedModel, forward, init_network,
                   network_forward_batch)
from .train import TrainConfig, train
from .gradcheck import gradient_check
from .io import load_model, save_model

__all__ = [
    "LayerSpec", "NetworkSpec", "TrainedModel", "TrainConfig",
    "init_network", "forward", "network_forward_batch", "train",
    "gradient_check", "save_model", "load_model",
]
