"""History buffer of generated images for discriminator training."""

from __future__ import annotations

import numpy as np


class ImagePool:
    """Mixes fresh fakes with randomly recalled older ones.

    Per image, in batch order: while below capacity the image is stored
    and returned as-is.  At capacity one uniform draw ``u`` decides:
    u < 0.5 returns the fresh image untouched, otherwise a second draw
    picks a stored slot uniformly, whose occupant is returned and
    replaced by the fresh image.  Draw order is fixed, so a seeded
    generator reproduces the swap/keep sequence exactly.
    """

    def __init__(self, capacity: int, rng: np.random.Generator):
        if capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {capacity}")
        self.capacity = capacity
        self.rng = rng
        self.images: list[np.ndarray] = []

    def query(self, batch: np.ndarray) -> np.ndarray:
        """Route an (N, C, H, W) batch of fakes through the pool."""
        if self.capacity == 0:
            return batch
        out = []
        for img in batch:
            if len(self.images) < self.capacity:
                self.images.append(img.copy())
                out.append(img)
            elif self.rng.random() < 0.5:
                out.append(img)
            else:
                slot = int(self.rng.integers(0, self.capacity))
                recalled = self.images[slot]
                self.images[slot] = img.copy()
                out.append(recalled)
        return np.stack(out, axis=0)
