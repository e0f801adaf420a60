"""Central finite-difference gradient checking for the tensor engine."""

import numpy as np

from lldet.tensor import Tensor

H_STEP = 1e-5
TOLERANCE = 1e-4


def rel_error(analytic, numeric):
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def max_gradcheck_error(build_loss, inputs, h=H_STEP):
    """Compare autodiff gradients against central differences.

    ``build_loss`` maps a list of Tensors (rebuilt each call from the raw
    arrays) to a scalar Tensor.  Returns the worst relative error over
    every element of every input.
    """
    tensors = [Tensor(arr.copy()) for arr in inputs]
    loss = build_loss(tensors)
    loss.backward()
    analytic = [
        t.grad if t.grad is not None else np.zeros_like(t.data) for t in tensors
    ]

    worst = 0.0
    for which, arr in enumerate(inputs):
        numeric = np.zeros_like(arr)
        flat = numeric.reshape(-1)
        for pos in range(arr.size):
            bumped = [a.copy() for a in inputs]
            bumped[which].reshape(-1)[pos] += h
            up = build_loss([Tensor(a) for a in bumped]).item()
            bumped = [a.copy() for a in inputs]
            bumped[which].reshape(-1)[pos] -= h
            down = build_loss([Tensor(a) for a in bumped]).item()
            flat[pos] = (up - down) / (2.0 * h)
        worst = max(worst, rel_error(analytic[which], numeric))
    return worst


def away_from_kinks(arr, margin=5e-3):
    """Push values away from zero so relu-style kinks stay out of FD reach."""
    shifted = np.where(np.abs(arr) < margin, arr + np.sign(arr) * margin + (arr == 0) * margin, arr)
    return shifted
