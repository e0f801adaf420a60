"""Color-space conversion and luma histogram equalization.

The enhancement path here is deliberately classical: convert RGB to
YCbCr (BT.601 full range, the JPEG flavor), equalize the Y plane against
its cumulative histogram, leave chroma untouched, convert back.  All
arithmetic is pinned to exact integer-testable rules: half-away-from-zero
rounding and clamping to [0, 255].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "RasterImage",
    "Histogram",
    "rgb_to_yuv",
    "yuv_to_rgb",
    "luma_histogram",
    "equalize_channel",
    "enhance_he",
    "histogram_report",
    "histogram_csv",
]


def round_half_away(x):
    """Round to nearest integer, halves away from zero (unlike np.round)."""
    x = np.asarray(x, dtype=np.float64)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


@dataclass(frozen=True)
class RasterImage:
    """8-bit raster, row-major, channel-interleaved when channels == 3."""

    width: int
    height: int
    channels: int
    data: np.ndarray  # uint8, flat, length width*height*channels

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidInputError(
                f"image extent must be positive, got {self.width}x{self.height}"
            )
        if self.channels not in (1, 3):
            raise InvalidInputError(f"channels must be 1 or 3, got {self.channels}")
        arr = np.asarray(self.data, dtype=np.uint8).reshape(-1).copy()
        expected = self.width * self.height * self.channels
        if arr.size != expected:
            raise InvalidInputError(
                f"data length {arr.size} != width*height*channels = {expected}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr) -> "RasterImage":
        """Build from an (H, W) or (H, W, C) array-like of uint8 values."""
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.ndim == 2:
            h, w = arr.shape
            return cls(w, h, 1, arr.reshape(-1))
        if arr.ndim == 3:
            h, w, c = arr.shape
            return cls(w, h, c, arr.reshape(-1))
        raise InvalidInputError(f"expected 2 or 3 dimensions, got {arr.ndim}")

    def to_array(self) -> np.ndarray:
        """Read-only (H, W, C) view of the samples."""
        return self.data.reshape(self.height, self.width, self.channels)

    def plane(self, i: int) -> np.ndarray:
        """Read-only (H, W) view of channel i."""
        return self.to_array()[:, :, i]


@dataclass(frozen=True)
class Histogram:
    """256-bin sample-value histogram with its running sum."""

    bins: np.ndarray  # (256,) int64 counts

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=np.int64).copy()
        if arr.shape != (256,):
            raise InvalidInputError(f"histogram needs 256 bins, got {arr.shape}")
        if (arr < 0).any():
            raise InvalidInputError("histogram counts must be nonnegative")
        arr.flags.writeable = False
        object.__setattr__(self, "bins", arr)

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    @property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.bins)


# BT.601 full-range (JPEG) coefficients, chroma offset +128.
_FWD_Y = (0.299, 0.587, 0.114)
_FWD_CB = (-0.168736, -0.331264, 0.5)
_FWD_CR = (0.5, -0.418688, -0.081312)
_INV_R_CR = 1.402
_INV_G_CB = -0.344136
_INV_G_CR = -0.714136
_INV_B_CB = 1.772


def _require_3ch(img: RasterImage, op: str):
    if img.channels != 3:
        raise InvalidInputError(f"{op} requires a 3-channel image, got {img.channels}")


def _quantize(x: np.ndarray) -> np.ndarray:
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


def rgb_to_yuv(img: RasterImage) -> RasterImage:
    """Convert interleaved RGB to interleaved Y/Cb/Cr, rounded and clamped."""
    _require_3ch(img, "rgb_to_yuv")
    rgb = img.to_array().astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    y = _FWD_Y[0] * r + _FWD_Y[1] * g + _FWD_Y[2] * b
    cb = _FWD_CB[0] * r + _FWD_CB[1] * g + _FWD_CB[2] * b + 128.0
    cr = _FWD_CR[0] * r + _FWD_CR[1] * g + _FWD_CR[2] * b + 128.0
    out = np.stack([_quantize(y), _quantize(cb), _quantize(cr)], axis=2)
    return RasterImage.from_array(out)


def yuv_to_rgb(img: RasterImage) -> RasterImage:
    """Inverse of :func:`rgb_to_yuv` (BT.601 full range), rounded and clamped."""
    _require_3ch(img, "yuv_to_rgb")
    yuv = img.to_array().astype(np.float64)
    y = yuv[:, :, 0]
    cb = yuv[:, :, 1] - 128.0
    cr = yuv[:, :, 2] - 128.0
    r = y + _INV_R_CR * cr
    g = y + _INV_G_CB * cb + _INV_G_CR * cr
    b = y + _INV_B_CB * cb
    out = np.stack([_quantize(r), _quantize(g), _quantize(b)], axis=2)
    return RasterImage.from_array(out)


def luma_histogram(img: RasterImage) -> Histogram:
    """Histogram of a single-plane image (a Y plane in the enhancement path)."""
    if img.channels != 1:
        raise InvalidInputError(
            "luma_histogram takes a 1-channel plane; extract Y first"
        )
    bins = np.bincount(img.data, minlength=256).astype(np.int64)
    return Histogram(bins)


def equalize_channel(channel: RasterImage) -> RasterImage:
    """Stretch a single plane via the classical CDF lookup.

    The darkest occupied bin maps to 0 and the brightest to 255:
    v -> round((cdf(v) - cdf_min) / (N - cdf_min) * 255), with cdf_min the
    smallest nonzero CDF value.  A constant plane is returned unchanged.
    """
    if channel.channels != 1:
        raise InvalidInputError("equalize_channel takes a 1-channel plane")
    hist = luma_histogram(channel)
    cdf = hist.cdf
    total = hist.total
    occupied = np.nonzero(hist.bins)[0]
    cdf_min = int(cdf[occupied[0]])
    if total == cdf_min:  # constant image, 0/0 mapping is undefined
        return channel
    lut = round_half_away((cdf - cdf_min) / float(total - cdf_min) * 255.0)
    lut = np.clip(lut, 0, 255).astype(np.uint8)
    return RasterImage(channel.width, channel.height, 1, lut[channel.data])


def enhance_he(img: RasterImage) -> RasterImage:
    """Equalize the luma plane of an RGB image, chroma untouched."""
    _require_3ch(img, "enhance_he")
    yuv = rgb_to_yuv(img)
    y_plane = RasterImage(img.width, img.height, 1, yuv.plane(0).reshape(-1))
    y_eq = equalize_channel(y_plane)
    stacked = np.stack(
        [y_eq.plane(0), yuv.plane(1), yuv.plane(2)], axis=2
    )
    return yuv_to_rgb(RasterImage.from_array(stacked))


def histogram_report(img: RasterImage) -> list[tuple[int, int]]:
    """256 (bin, count) rows over the image's luma.

    Single-plane images are histogrammed directly; RGB images are reduced
    to their Y plane first.
    """
    if img.channels == 3:
        plane = RasterImage(img.width, img.height, 1, rgb_to_yuv(img).plane(0).reshape(-1))
    else:
        plane = img
    hist = luma_histogram(plane)
    return [(v, int(c)) for v, c in enumerate(hist.bins)]


def histogram_csv(rows: list[tuple[int, int]]) -> str:
    """Serialize histogram rows as ``bin,count`` CSV."""
    lines = ["bin,count"]
    lines.extend(f"{v},{c}" for v, c in rows)
    return "\n".join(lines) + "\n"
