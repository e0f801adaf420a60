"""Declarative network descriptions for the translation GAN.

A :class:`NetworkSpec` is an ordered stack of layer descriptors plus the
architecture fingerprint used to pair weight files with the network that
produced them.  Shape inference walks the descriptors symbolically, so
output extents can be checked without allocating parameters.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from ..errors import InvalidConfigError, InvalidShapeError
from ..tensor import conv_out_extent, conv_transpose_out_extent

__all__ = [
    "ConvSpec",
    "ConvTransposeSpec",
    "ResBlockSpec",
    "MaxPoolSpec",
    "SkipSaveSpec",
    "SkipConcatSpec",
    "NetworkSpec",
    "build_resnet9_generator",
    "build_unet256_generator",
    "build_patchgan",
    "spec_fingerprint",
    "spec_to_json",
    "spec_from_json",
]


@dataclass(frozen=True)
class ConvSpec:
    in_ch: int
    out_ch: int
    kernel: int
    stride: int = 1
    pad: int = 0
    pad_mode: str = "zero"
    norm: bool = False
    act: str | None = None
    kind: str = "conv"


@dataclass(frozen=True)
class ConvTransposeSpec:
    in_ch: int
    out_ch: int
    kernel: int
    stride: int = 1
    pad: int = 0
    norm: bool = False
    act: str | None = None
    kind: str = "conv_transpose"


@dataclass(frozen=True)
class ResBlockSpec:
    """Two 3x3 convs with instance norm and an additive skip."""

    channels: int
    kernel: int = 3
    pad_mode: str = "reflect"
    kind: str = "resblock"


@dataclass(frozen=True)
class MaxPoolSpec:
    kernel: int
    stride: int
    kind: str = "maxpool"


@dataclass(frozen=True)
class SkipSaveSpec:
    tag: str
    kind: str = "skip_save"


@dataclass(frozen=True)
class SkipConcatSpec:
    tag: str
    kind: str = "skip_concat"


_LAYER_TYPES = {
    "conv": ConvSpec,
    "conv_transpose": ConvTransposeSpec,
    "resblock": ResBlockSpec,
    "maxpool": MaxPoolSpec,
    "skip_save": SkipSaveSpec,
    "skip_concat": SkipConcatSpec,
}


@dataclass(frozen=True)
class NetworkSpec:
    """An ordered layer stack with input channel count and provenance tag."""

    arch: str  # "resnet9" | "unet256" | "patchgan"
    in_ch: int
    layers: tuple
    spatial_divisor: int  # input extents must be divisible by this

    def __post_init__(self):
        chans = self.in_ch
        open_tags: dict[str, int] = {}
        for i, layer in enumerate(self.layers):
            if isinstance(layer, (ConvSpec, ConvTransposeSpec)):
                if layer.in_ch != chans:
                    raise InvalidConfigError(
                        f"layer {i} expects {layer.in_ch} channels, gets {chans}"
                    )
                chans = layer.out_ch
            elif isinstance(layer, ResBlockSpec):
                if layer.channels != chans:
                    raise InvalidConfigError(
                        f"residual block {i} expects {layer.channels} channels, gets {chans}"
                    )
            elif isinstance(layer, SkipSaveSpec):
                if layer.tag in open_tags:
                    raise InvalidConfigError(f"duplicate skip tag {layer.tag!r}")
                open_tags[layer.tag] = chans
            elif isinstance(layer, SkipConcatSpec):
                if layer.tag not in open_tags:
                    raise InvalidConfigError(f"skip tag {layer.tag!r} never saved")
                chans += open_tags.pop(layer.tag)

    def out_channels(self) -> int:
        chans = self.in_ch
        saved: dict[str, int] = {}
        for layer in self.layers:
            if isinstance(layer, (ConvSpec, ConvTransposeSpec)):
                chans = layer.out_ch
            elif isinstance(layer, SkipSaveSpec):
                saved[layer.tag] = chans
            elif isinstance(layer, SkipConcatSpec):
                chans += saved.pop(layer.tag)
        return chans

    def infer_shape(self, shape: tuple[int, int, int]) -> tuple[int, int, int]:
        """Symbolic output shape for a (C, H, W) input.

        Raises when the input channel count mismatches, an extent is not
        divisible by the architecture's downsampling factor, or any
        intermediate extent collapses below one pixel.
        """
        c, h, w = shape
        if c != self.in_ch:
            raise InvalidShapeError(f"expected {self.in_ch} input channels, got {c}")
        if h < 1 or w < 1:
            raise InvalidShapeError(f"empty input extent {h}x{w}")
        if h % self.spatial_divisor or w % self.spatial_divisor:
            raise InvalidConfigError(
                f"input extent {h}x{w} not divisible by {self.spatial_divisor}"
            )
        saved: dict[str, tuple[int, int, int]] = {}
        for i, layer in enumerate(self.layers):
            if isinstance(layer, ConvSpec):
                if layer.pad_mode == "reflect" and (
                    layer.pad >= h or layer.pad >= w
                ):
                    raise InvalidShapeError(
                        f"layer {i}: reflect pad {layer.pad} needs extent > pad, got {h}x{w}"
                    )
                h2 = conv_out_extent(h, layer.kernel, layer.stride, layer.pad)
                w2 = conv_out_extent(w, layer.kernel, layer.stride, layer.pad)
                c, h, w = layer.out_ch, h2, w2
            elif isinstance(layer, ConvTransposeSpec):
                h = conv_transpose_out_extent(h, layer.kernel, layer.stride, layer.pad)
                w = conv_transpose_out_extent(w, layer.kernel, layer.stride, layer.pad)
                c = layer.out_ch
            elif isinstance(layer, ResBlockSpec):
                pad = (layer.kernel - 1) // 2
                if layer.pad_mode == "reflect" and (pad >= h or pad >= w):
                    raise InvalidShapeError(
                        f"layer {i}: reflect pad {pad} needs extent > pad, got {h}x{w}"
                    )
            elif isinstance(layer, MaxPoolSpec):
                if layer.kernel > h or layer.kernel > w:
                    raise InvalidShapeError(
                        f"layer {i}: pool window {layer.kernel} exceeds {h}x{w}"
                    )
                h = (h - layer.kernel) // layer.stride + 1
                w = (w - layer.kernel) // layer.stride + 1
            elif isinstance(layer, SkipSaveSpec):
                saved[layer.tag] = (c, h, w)
            elif isinstance(layer, SkipConcatSpec):
                sc, sh, sw = saved.pop(layer.tag)
                if (sh, sw) != (h, w):
                    raise InvalidShapeError(
                        f"layer {i}: skip extent {sh}x{sw} != current {h}x{w}"
                    )
                c += sc
            if h < 1 or w < 1:
                raise InvalidShapeError(f"layer {i} collapses the extent to {h}x{w}")
        return (c, h, w)

    def receptive_field(self) -> int:
        """One-sided receptive-field extent of a purely convolutional stack."""
        rf = 1
        jump = 1
        for layer in self.layers:
            if isinstance(layer, (ConvSpec, MaxPoolSpec)):
                rf += (layer.kernel - 1) * jump
                jump *= layer.stride
            elif isinstance(layer, (ConvTransposeSpec, ResBlockSpec, SkipSaveSpec, SkipConcatSpec)):
                raise InvalidConfigError(
                    "receptive_field is defined for plain conv/pool stacks only"
                )
        return rf

    def param_specs(self) -> list[tuple[str, tuple[int, ...], str]]:
        """Ordered (path, shape, init kind) for every parameter.

        Init kinds: ``normal`` (conv weights), ``zeros`` (biases and norm
        shifts), ``ones`` (norm scales).
        """
        out: list[tuple[str, tuple[int, ...], str]] = []
        for i, layer in enumerate(self.layers):
            prefix = f"{i:02d}"
            if isinstance(layer, ConvSpec):
                out.append((f"{prefix}.conv.w", (layer.out_ch, layer.in_ch, layer.kernel, layer.kernel), "normal"))
                out.append((f"{prefix}.conv.b", (layer.out_ch,), "zeros"))
                if layer.norm:
                    out.append((f"{prefix}.norm.gamma", (layer.out_ch,), "ones"))
                    out.append((f"{prefix}.norm.beta", (layer.out_ch,), "zeros"))
            elif isinstance(layer, ConvTransposeSpec):
                out.append((f"{prefix}.convt.w", (layer.in_ch, layer.out_ch, layer.kernel, layer.kernel), "normal"))
                out.append((f"{prefix}.convt.b", (layer.out_ch,), "zeros"))
                if layer.norm:
                    out.append((f"{prefix}.norm.gamma", (layer.out_ch,), "ones"))
                    out.append((f"{prefix}.norm.beta", (layer.out_ch,), "zeros"))
            elif isinstance(layer, ResBlockSpec):
                ch, kk = layer.channels, layer.kernel
                for sub in ("conv1", "conv2"):
                    out.append((f"{prefix}.{sub}.w", (ch, ch, kk, kk), "normal"))
                    out.append((f"{prefix}.{sub}.b", (ch,), "zeros"))
                    out.append((f"{prefix}.{sub}.gamma", (ch,), "ones"))
                    out.append((f"{prefix}.{sub}.beta", (ch,), "zeros"))
        return out


def spec_to_json(spec: NetworkSpec) -> str:
    """Canonical JSON encoding; the source text for the fingerprint."""
    payload = {
        "format": 1,
        "arch": spec.arch,
        "in_ch": spec.in_ch,
        "spatial_divisor": spec.spatial_divisor,
        "layers": [asdict(layer) for layer in spec.layers],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def spec_from_json(text: str) -> NetworkSpec:
    payload = json.loads(text)
    layers = []
    for entry in payload["layers"]:
        entry = dict(entry)
        cls = _LAYER_TYPES[entry.pop("kind")]
        layers.append(cls(**entry))
    return NetworkSpec(
        arch=payload["arch"],
        in_ch=payload["in_ch"],
        layers=tuple(layers),
        spatial_divisor=payload["spatial_divisor"],
    )


def spec_fingerprint(spec: NetworkSpec) -> bytes:
    """SHA-256 of the canonical spec JSON."""
    return hashlib.sha256(spec_to_json(spec).encode("utf-8")).digest()


def build_resnet9_generator(in_ch: int, base: int, n_blocks: int) -> NetworkSpec:
    """Residual-trunk generator: 7x7 stem, two downsamplings, n residual
    blocks, two upsamplings, 7x7 head with tanh."""
    if n_blocks < 1:
        raise InvalidConfigError(f"n_blocks must be >= 1, got {n_blocks}")
    if in_ch < 1 or base < 1:
        raise InvalidConfigError("channel counts must be positive")
    layers: list = [
        ConvSpec(in_ch, base, 7, 1, 3, "reflect", norm=True, act="relu"),
        ConvSpec(base, 2 * base, 3, 2, 1, "zero", norm=True, act="relu"),
        ConvSpec(2 * base, 4 * base, 3, 2, 1, "zero", norm=True, act="relu"),
    ]
    layers.extend(ResBlockSpec(4 * base) for _ in range(n_blocks))
    layers.extend(
        [
            ConvTransposeSpec(4 * base, 2 * base, 4, 2, 1, norm=True, act="relu"),
            ConvTransposeSpec(2 * base, base, 4, 2, 1, norm=True, act="relu"),
            ConvSpec(base, in_ch, 7, 1, 3, "reflect", norm=False, act="tanh"),
        ]
    )
    return NetworkSpec("resnet9", in_ch, tuple(layers), spatial_divisor=4)


def build_unet256_generator(in_ch: int, base: int, depth: int) -> NetworkSpec:
    """Encoder-decoder generator with pooling, transposed-conv upsampling
    and channel-concatenation skips between same-level layers.

    Input extents must be divisible by 2**depth.
    """
    if depth < 1:
        raise InvalidConfigError(f"depth must be >= 1, got {depth}")
    if in_ch < 1 or base < 1:
        raise InvalidConfigError("channel counts must be positive")
    layers: list = []
    chans = in_ch
    for level in range(depth):
        out_ch = base * 2**level
        layers.append(ConvSpec(chans, out_ch, 3, 1, 1, "zero", norm=True, act="leaky_relu"))
        layers.append(SkipSaveSpec(tag=f"level{level}"))
        layers.append(MaxPoolSpec(2, 2))
        chans = out_ch
    bottleneck = base * 2**depth
    layers.append(ConvSpec(chans, bottleneck, 3, 1, 1, "zero", norm=True, act="leaky_relu"))
    chans = bottleneck
    for level in reversed(range(depth)):
        out_ch = base * 2**level
        layers.append(ConvTransposeSpec(chans, out_ch, 4, 2, 1, norm=True, act="relu"))
        layers.append(SkipConcatSpec(tag=f"level{level}"))
        layers.append(ConvSpec(2 * out_ch, out_ch, 3, 1, 1, "zero", norm=True, act="relu"))
        chans = out_ch
    layers.append(ConvSpec(chans, in_ch, 1, 1, 0, "zero", norm=False, act="tanh"))
    return NetworkSpec("unet256", in_ch, tuple(layers), spatial_divisor=2**depth)


def build_patchgan(in_ch: int, base: int, n_layers: int = 3) -> NetworkSpec:
    """Patch discriminator emitting a raw score map.

    The default three stride-2 stages give the classic five-conv stack
    with a 70x70 receptive field; smaller ``n_layers`` shrink it for toy
    image sizes.
    """
    if in_ch < 1 or base < 1:
        raise InvalidConfigError("channel counts must be positive")
    if n_layers < 1:
        raise InvalidConfigError(f"n_layers must be >= 1, got {n_layers}")
    layers: list = [ConvSpec(in_ch, base, 4, 2, 1, "zero", norm=False, act="leaky_relu")]
    chans = base
    for i in range(1, n_layers):
        out_ch = base * 2**i
        layers.append(ConvSpec(chans, out_ch, 4, 2, 1, "zero", norm=True, act="leaky_relu"))
        chans = out_ch
    out_ch = base * 2**n_layers
    layers.append(ConvSpec(chans, out_ch, 4, 1, 1, "zero", norm=True, act="leaky_relu"))
    layers.append(ConvSpec(out_ch, 1, 4, 1, 1, "zero", norm=False, act=None))
    return NetworkSpec("patchgan", in_ch, tuple(layers), spatial_divisor=1)
