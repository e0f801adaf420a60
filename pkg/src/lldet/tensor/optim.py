"""Adam with bias correction, keyed by parameter name."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidShapeError
from .engine import Tensor


@dataclass
class AdamState:
    """First/second moment buffers plus the shared step counter."""

    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> tuple[dict[str, Tensor], AdamState]:
    """One in-place update over ``params`` in insertion order.

    Parameters missing from ``grads`` are treated as zero-gradient.
    Returns the mutated inputs for call-chaining.
    """
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p.data)
        elif g.shape != p.data.shape:
            raise InvalidShapeError(
                f"gradient shape {g.shape} != parameter shape {p.data.shape} for {name!r}"
            )
        m = state.m.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            state.m[name] = m
            state.v[name] = np.zeros_like(p.data)
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / (1.0 - b1**state.t)
        v_hat = v / (1.0 - b2**state.t)
        p.data -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state
