"""Loss composition for the two-generator translation setup.

Least-squares adversarial terms (real target 1, fake target 0, generator
targets 1) plus L1 cycle consistency in both directions, and an optional
identity term.  Discriminator losses average their real and pooled-fake
halves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidShapeError
from ..tensor import Tensor, l1_loss, mse_loss
from .pool import ImagePool

__all__ = ["LossBundle", "cyclegan_losses"]


@dataclass
class LossBundle:
    loss_g: Tensor
    loss_d_a: Tensor
    loss_d_b: Tensor
    metrics: dict[str, float]


def _adv_target(pred: Tensor, value: float) -> Tensor:
    return mse_loss(pred, Tensor(np.full(pred.data.shape, value)))


def cyclegan_losses(
    g_ab,
    g_ba,
    d_a,
    d_b,
    real_a: Tensor,
    real_b: Tensor,
    cfg,
    pool_a: ImagePool | None = None,
    pool_b: ImagePool | None = None,
) -> LossBundle:
    """Build the generator and discriminator loss graphs for one batch.

    ``cfg`` supplies ``lambda_cyc`` and ``lambda_idt``.  Generator loss:
    adversarial(A->B) + adversarial(B->A) + lambda_cyc * cycle
    (+ lambda_idt * lambda_cyc * identity when lambda_idt > 0).
    Discriminators see detached fakes, routed through the image pools
    when given (pool for domain A first, then domain B).
    """
    if real_a.data.ndim != 4 or real_b.data.ndim != 4:
        raise InvalidShapeError("batches must be 4-D (N,C,H,W)")
    if real_a.data.shape[1:] != real_b.data.shape[1:]:
        raise InvalidShapeError(
            f"domain image shapes differ: {real_a.data.shape[1:]} vs {real_b.data.shape[1:]}"
        )
    if real_a.data.shape[0] == 0 or real_b.data.shape[0] == 0:
        raise InvalidShapeError("batches must be nonempty")

    fake_b = g_ab(real_a)
    rec_a = g_ba(fake_b)
    fake_a = g_ba(real_b)
    rec_b = g_ab(fake_a)

    adv_ab = _adv_target(d_b(fake_b), 1.0)
    adv_ba = _adv_target(d_a(fake_a), 1.0)
    cycle = l1_loss(rec_a, real_a) + l1_loss(rec_b, real_b)
    loss_g = adv_ab + adv_ba + cfg.lambda_cyc * cycle
    idt_value = 0.0
    if cfg.lambda_idt > 0:
        idt = l1_loss(g_ab(real_b), real_b) + l1_loss(g_ba(real_a), real_a)
        loss_g = loss_g + (cfg.lambda_idt * cfg.lambda_cyc) * idt
        idt_value = idt.item()

    fake_a_for_d = fake_a.detach().data
    fake_b_for_d = fake_b.detach().data
    if pool_a is not None:
        fake_a_for_d = pool_a.query(fake_a_for_d)
    if pool_b is not None:
        fake_b_for_d = pool_b.query(fake_b_for_d)

    loss_d_a = 0.5 * (
        _adv_target(d_a(real_a), 1.0) + _adv_target(d_a(Tensor(fake_a_for_d)), 0.0)
    )
    loss_d_b = 0.5 * (
        _adv_target(d_b(real_b), 1.0) + _adv_target(d_b(Tensor(fake_b_for_d)), 0.0)
    )

    metrics = {
        "loss_G": loss_g.item(),
        "loss_D_A": loss_d_a.item(),
        "loss_D_B": loss_d_b.item(),
        "adv": adv_ab.item() + adv_ba.item(),
        "cycle": cycle.item(),
        "idt": idt_value,
    }
    return LossBundle(loss_g, loss_d_a, loss_d_b, metrics)
