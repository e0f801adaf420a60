"""Raster <-> tensor coupling and the translation inference path."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..pixelops import RasterImage, round_half_away
from ..tensor import Tensor
from .specs import NetworkSpec
from .weights import WeightStore, check_compatible

__all__ = ["normalize_in", "denormalize_out", "translate"]


def normalize_in(img: RasterImage) -> Tensor:
    """Map u8 samples into the generator's tanh range: v/127.5 - 1."""
    if img.channels != 3:
        raise InvalidInputError("normalize_in expects a 3-channel image")
    arr = img.to_array().astype(np.float64) / 127.5 - 1.0
    return Tensor(arr.transpose(2, 0, 1))  # (C, H, W)


def denormalize_out(t) -> RasterImage:
    """Inverse of :func:`normalize_in`, rounded half-away and clamped."""
    arr = t.data if isinstance(t, Tensor) else np.asarray(t, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] != 3:
        raise InvalidInputError(f"expected a (3, H, W) tensor, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInputError("tensor holds non-finite values")
    u8 = np.clip(round_half_away((arr + 1.0) * 127.5), 0, 255).astype(np.uint8)
    return RasterImage.from_array(u8.transpose(1, 2, 0))


def translate(store: WeightStore, spec: NetworkSpec, img: RasterImage) -> RasterImage:
    """Run one image through a generator loaded from a weight store.

    The store's fingerprint must match ``spec``, and the image extent
    must be compatible with the architecture (output extent equals input
    extent).
    """
    check_compatible(store, spec)
    shape_in = (3, img.height, img.width)
    shape_out = spec.infer_shape(shape_in)
    if shape_out != shape_in:
        raise InvalidInputError(
            f"extent {img.width}x{img.height} is not preserved by this architecture"
        )
    net = store.to_network()
    x = normalize_in(img)
    y = net(Tensor(x.data[None, :, :, :]))
    return denormalize_out(y.data[0])
