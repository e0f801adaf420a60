"""Unpaired dark-to-bright translation: architectures, losses, training."""

from .infer import denormalize_out, normalize_in, translate
from .losses import LossBundle, cyclegan_losses
from .network import Network
from .pool import ImagePool
from .specs import (
    NetworkSpec,
    build_patchgan,
    build_resnet9_generator,
    build_unet256_generator,
    spec_fingerprint,
    spec_from_json,
    spec_to_json,
)
from .train import TrainConfig, TrainResult, build_generator, metrics_csv, train
from .weights import WeightStore, check_compatible, load_weights, save_weights

__all__ = [
    "Network",
    "NetworkSpec",
    "ImagePool",
    "LossBundle",
    "TrainConfig",
    "TrainResult",
    "WeightStore",
    "build_generator",
    "build_patchgan",
    "build_resnet9_generator",
    "build_unet256_generator",
    "check_compatible",
    "cyclegan_losses",
    "denormalize_out",
    "load_weights",
    "metrics_csv",
    "normalize_in",
    "save_weights",
    "spec_fingerprint",
    "spec_from_json",
    "spec_to_json",
    "train",
    "translate",
]
