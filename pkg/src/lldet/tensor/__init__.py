"""Float64 tensor engine with reverse-mode differentiation.

The convolution inner loops run in a compiled extension when available
(`lldet.tensor.backend.BACKEND == "ext"`) and fall back to a
bit-identical numpy implementation otherwise.
"""

from .backend import BACKEND, HAVE_EXT
from .engine import (
    Tensor,
    activation,
    backward,
    concat,
    conv2d,
    conv_out_extent,
    conv_transpose2d,
    conv_transpose_out_extent,
    instance_norm,
    l1_loss,
    leaky_relu,
    max_pool2d,
    mse_loss,
    relu,
    tanh,
    tmean,
    tsum,
)
from .optim import AdamState, adam_step

__all__ = [
    "BACKEND",
    "HAVE_EXT",
    "Tensor",
    "AdamState",
    "adam_step",
    "activation",
    "backward",
    "concat",
    "conv2d",
    "conv_out_extent",
    "conv_transpose2d",
    "conv_transpose_out_extent",
    "instance_norm",
    "l1_loss",
    "leaky_relu",
    "max_pool2d",
    "mse_loss",
    "relu",
    "tanh",
    "tmean",
    "tsum",
]
