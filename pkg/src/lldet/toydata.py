"""Synthetic dark/bright image pairs for desk-scale experiments.

Each sample is a flat background with one bright square, rendered twice:
a dark exposure (domain A) and a regular exposure of the same pattern
family (domain B).  The squares double as ground-truth boxes for the
toy detection check, so the generators make bright-domain detectors
work on dark scenes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evalmap import BoundingBox
from .pixelops import RasterImage

__all__ = ["ToyScene", "make_scene", "make_domains", "scene_images"]

DARK_GAIN = 0.22
BRIGHT_FLOOR = 0.28
BRIGHT_GAIN = 0.68


@dataclass(frozen=True)
class ToyScene:
    """One synthetic pattern with its dark and bright renderings."""

    dark: RasterImage
    bright: RasterImage
    box: BoundingBox


def _render(pattern: np.ndarray) -> RasterImage:
    u8 = np.clip(np.floor(pattern * 255.0 + 0.5), 0, 255).astype(np.uint8)
    return RasterImage.from_array(np.repeat(u8[:, :, None], 3, axis=2))


def make_scene(size: int, rng: np.random.Generator) -> ToyScene:
    """Sample one scene: background in [0, 0.22], square in [0.72, 0.98]."""
    bg = rng.uniform(0.0, 0.22)
    fg = rng.uniform(0.72, 0.98)
    side = int(rng.integers(size // 4, size // 2 + 1))
    top = int(rng.integers(0, size - side + 1))
    left = int(rng.integers(0, size - side + 1))
    pattern = np.full((size, size), bg)
    pattern[top : top + side, left : left + side] = fg
    dark = _render(pattern * DARK_GAIN)
    bright = _render(BRIGHT_FLOOR + pattern * BRIGHT_GAIN)
    return ToyScene(dark=dark, bright=bright, box=BoundingBox(left, top, side, side))


def make_domains(
    n_per_domain: int, size: int, rng: np.random.Generator
) -> tuple[list[RasterImage], list[RasterImage]]:
    """Unpaired training sets: dark renderings of one batch of scenes and
    bright renderings of another."""
    domain_a = [make_scene(size, rng).dark for _ in range(n_per_domain)]
    domain_b = [make_scene(size, rng).bright for _ in range(n_per_domain)]
    return domain_a, domain_b


def scene_images(n: int, size: int, rng: np.random.Generator) -> list[ToyScene]:
    """Held-out scenes with ground-truth boxes for the detection check."""
    return [make_scene(size, rng) for _ in range(n)]
