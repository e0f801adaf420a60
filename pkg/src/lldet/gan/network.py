"""Parameter storage and the forward-pass executor for NetworkSpecs."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidShapeError
from ..tensor import (
    Tensor,
    activation,
    concat,
    conv2d,
    conv_transpose2d,
    instance_norm,
    max_pool2d,
    relu,
)
from .specs import (
    ConvSpec,
    ConvTransposeSpec,
    MaxPoolSpec,
    NetworkSpec,
    ResBlockSpec,
    SkipConcatSpec,
    SkipSaveSpec,
)

__all__ = ["Network", "WEIGHT_INIT_STD"]

WEIGHT_INIT_STD = 0.02


class Network:
    """A NetworkSpec bound to concrete parameters.

    Calling the network on an (N, C, H, W) tensor builds the
    differentiation graph for one forward pass.
    """

    def __init__(self, spec: NetworkSpec, params: dict[str, Tensor]):
        expected = spec.param_specs()
        expected_paths = [path for path, _, _ in expected]
        if list(params.keys()) != expected_paths:
            raise InvalidShapeError(
                "parameter set does not match the spec "
                f"(got {len(params)} entries, expected {len(expected_paths)})"
            )
        for path, shape, _ in expected:
            if params[path].data.shape != shape:
                raise InvalidShapeError(
                    f"parameter {path!r} has shape {params[path].data.shape}, expected {shape}"
                )
        self.spec = spec
        self.params = params

    @classmethod
    def initialized(cls, spec: NetworkSpec, rng: np.random.Generator) -> "Network":
        """Fresh parameters: conv weights ~ N(0, 0.02), biases/shifts zero,
        norm scales one.  Only conv weights consume random draws, in
        layer order."""
        params: dict[str, Tensor] = {}
        for path, shape, init in spec.param_specs():
            if init == "normal":
                data = rng.normal(0.0, WEIGHT_INIT_STD, size=shape)
            elif init == "ones":
                data = np.ones(shape)
            else:
                data = np.zeros(shape)
            params[path] = Tensor(data)
        return cls(spec, params)

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def __call__(self, x: Tensor) -> Tensor:
        p = self.params
        saved: dict[str, Tensor] = {}
        for i, layer in enumerate(self.spec.layers):
            prefix = f"{i:02d}"
            if isinstance(layer, ConvSpec):
                x = conv2d(
                    x,
                    p[f"{prefix}.conv.w"],
                    p[f"{prefix}.conv.b"],
                    stride=layer.stride,
                    pad=layer.pad,
                    pad_mode=layer.pad_mode,
                )
                if layer.norm:
                    x = instance_norm(x, p[f"{prefix}.norm.gamma"], p[f"{prefix}.norm.beta"])
                if layer.act:
                    x = activation(x, layer.act)
            elif isinstance(layer, ConvTransposeSpec):
                x = conv_transpose2d(
                    x,
                    p[f"{prefix}.convt.w"],
                    p[f"{prefix}.convt.b"],
                    stride=layer.stride,
                    pad=layer.pad,
                )
                if layer.norm:
                    x = instance_norm(x, p[f"{prefix}.norm.gamma"], p[f"{prefix}.norm.beta"])
                if layer.act:
                    x = activation(x, layer.act)
            elif isinstance(layer, ResBlockSpec):
                pad = (layer.kernel - 1) // 2
                t = conv2d(
                    x,
                    p[f"{prefix}.conv1.w"],
                    p[f"{prefix}.conv1.b"],
                    stride=1,
                    pad=pad,
                    pad_mode=layer.pad_mode,
                )
                t = instance_norm(t, p[f"{prefix}.conv1.gamma"], p[f"{prefix}.conv1.beta"])
                t = relu(t)
                t = conv2d(
                    t,
                    p[f"{prefix}.conv2.w"],
                    p[f"{prefix}.conv2.b"],
                    stride=1,
                    pad=pad,
                    pad_mode=layer.pad_mode,
                )
                t = instance_norm(t, p[f"{prefix}.conv2.gamma"], p[f"{prefix}.conv2.beta"])
                x = x + t
            elif isinstance(layer, MaxPoolSpec):
                x = max_pool2d(x, layer.kernel, layer.stride)
            elif isinstance(layer, SkipSaveSpec):
                saved[layer.tag] = x
            elif isinstance(layer, SkipConcatSpec):
                x = concat([x, saved.pop(layer.tag)], axis=1)
        return x
