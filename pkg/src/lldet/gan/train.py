"""Toy-scale training loop for the two-generator translation setup.

One step samples a batch from each domain, updates both generators
(discriminators frozen), then updates each discriminator on its real
batch and pooled fakes.  Everything is driven by a single seeded
generator with a documented draw order, so runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InvalidConfigError, InvalidInputError
from ..pixelops import RasterImage
from ..tensor import AdamState, Tensor, adam_step, backward
from .infer import normalize_in
from .losses import cyclegan_losses
from .network import Network
from .pool import ImagePool
from .specs import (
    NetworkSpec,
    build_patchgan,
    build_resnet9_generator,
    build_unet256_generator,
)
from .weights import WeightStore

__all__ = ["TrainConfig", "TrainResult", "train", "metrics_csv", "pick_disc_layers"]

METRIC_FIELDS = ("step", "loss_G", "loss_D_A", "loss_D_B", "cycle", "idt")


@dataclass
class TrainConfig:
    """Hyperparameters for one training run."""

    epochs: int = 1
    batch_size: int = 1
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    lambda_cyc: float = 10.0
    lambda_idt: float = 0.0
    pool_size: int = 50
    seed: int = 0
    image_size: int = 16
    steps: int | None = None  # overrides epochs * steps_per_epoch when set
    disc_layers: int | None = None  # None picks the largest that fits image_size

    def __post_init__(self):
        checks = [
            ("epochs", self.epochs >= 0),
            ("batch_size", self.batch_size >= 1),
            ("lr", self.lr >= 0),
            ("lambda_cyc", self.lambda_cyc >= 0),
            ("lambda_idt", self.lambda_idt >= 0),
            ("pool_size", self.pool_size >= 0),
            ("image_size", self.image_size >= 1),
            ("steps", self.steps is None or self.steps >= 0),
            ("disc_layers", self.disc_layers is None or self.disc_layers >= 1),
        ]
        for field_name, ok in checks:
            if not ok:
                raise InvalidConfigError(f"invalid value for {field_name!r}")


@dataclass
class TrainResult:
    g_ab: WeightStore
    g_ba: WeightStore
    d_a: WeightStore
    d_b: WeightStore
    metrics: list[dict[str, float]]
    generator_spec: NetworkSpec


def pick_disc_layers(image_size: int) -> int:
    """Largest patch-discriminator depth whose score map is nonempty."""
    for n_layers in (3, 2, 1):
        spec = build_patchgan(3, 1, n_layers)
        try:
            spec.infer_shape((3, image_size, image_size))
        except Exception:
            continue
        return n_layers
    raise InvalidConfigError(f"no discriminator fits image size {image_size}")


def build_generator(arch: str, in_ch: int = 3, **opts) -> NetworkSpec:
    """Build a generator spec by architecture name."""
    if arch == "resnet9":
        return build_resnet9_generator(
            in_ch, opts.get("base", 64), opts.get("n_blocks", 9)
        )
    if arch == "unet256":
        return build_unet256_generator(
            in_ch, opts.get("base", 64), opts.get("depth", 8)
        )
    raise InvalidConfigError(f"unknown generator architecture {arch!r}")


def _domain_array(images: Sequence[RasterImage], cfg: TrainConfig, name: str) -> np.ndarray:
    if not images:
        raise InvalidInputError(f"domain {name} holds no images")
    arrays = []
    for img in images:
        if img.width != cfg.image_size or img.height != cfg.image_size:
            raise InvalidInputError(
                f"domain {name}: image extent {img.width}x{img.height} "
                f"!= configured image_size {cfg.image_size}"
            )
        arrays.append(normalize_in(img).data)
    return np.stack(arrays, axis=0)


def train(
    cfg: TrainConfig,
    domain_a: Sequence[RasterImage],
    domain_b: Sequence[RasterImage],
    arch: str = "resnet9",
    **arch_opts,
) -> TrainResult:
    """Train the translation pair on two unpaired image sets.

    RNG draw order per run: generator weights for g_ab, g_ba, d_a, d_b
    (layer order within each), then per step the domain-A batch indices,
    the domain-B batch indices, and the two pools' decisions (A first).
    """
    arr_a = _domain_array(domain_a, cfg, "A")
    arr_b = _domain_array(domain_b, cfg, "B")

    gen_spec = build_generator(arch, 3, **arch_opts)
    gen_spec.infer_shape((3, cfg.image_size, cfg.image_size))
    n_layers = cfg.disc_layers or pick_disc_layers(cfg.image_size)
    disc_spec = build_patchgan(3, arch_opts.get("disc_base", 8), n_layers)
    disc_spec.infer_shape((3, cfg.image_size, cfg.image_size))

    rng = np.random.default_rng(cfg.seed)
    g_ab = Network.initialized(gen_spec, rng)
    g_ba = Network.initialized(gen_spec, rng)
    d_a = Network.initialized(disc_spec, rng)
    d_b = Network.initialized(disc_spec, rng)

    pool_a = ImagePool(cfg.pool_size, rng)
    pool_b = ImagePool(cfg.pool_size, rng)

    gen_params = {f"g_ab.{k}": v for k, v in g_ab.params.items()}
    gen_params.update({f"g_ba.{k}": v for k, v in g_ba.params.items()})
    opt_g = AdamState(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2)
    opt_d_a = AdamState(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2)
    opt_d_b = AdamState(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2)

    steps_per_epoch = -(-max(len(arr_a), len(arr_b)) // cfg.batch_size)
    total_steps = cfg.steps if cfg.steps is not None else cfg.epochs * steps_per_epoch

    all_nets = (g_ab, g_ba, d_a, d_b)
    metrics: list[dict[str, float]] = []
    for step in range(1, total_steps + 1):
        idx_a = rng.integers(0, len(arr_a), size=cfg.batch_size)
        idx_b = rng.integers(0, len(arr_b), size=cfg.batch_size)
        real_a = Tensor(arr_a[idx_a])
        real_b = Tensor(arr_b[idx_b])

        bundle = cyclegan_losses(
            g_ab, g_ba, d_a, d_b, real_a, real_b, cfg, pool_a, pool_b
        )

        for net in all_nets:
            net.zero_grad()
        backward(bundle.loss_g, gen_params)
        adam_step(gen_params, {k: p.grad for k, p in gen_params.items()}, opt_g)

        for net in all_nets:
            net.zero_grad()
        backward(bundle.loss_d_a, d_a.params)
        adam_step(d_a.params, {k: p.grad for k, p in d_a.params.items()}, opt_d_a)

        for net in all_nets:
            net.zero_grad()
        backward(bundle.loss_d_b, d_b.params)
        adam_step(d_b.params, {k: p.grad for k, p in d_b.params.items()}, opt_d_b)

        row = {"step": float(step)}
        row.update(
            {k: bundle.metrics[k] for k in ("loss_G", "loss_D_A", "loss_D_B", "cycle", "idt")}
        )
        metrics.append(row)

    return TrainResult(
        g_ab=WeightStore.from_network(g_ab),
        g_ba=WeightStore.from_network(g_ba),
        d_a=WeightStore.from_network(d_a),
        d_b=WeightStore.from_network(d_b),
        metrics=metrics,
        generator_spec=gen_spec,
    )


def metrics_csv(rows: list[dict[str, float]]) -> str:
    """Serialize metric rows as ``step,loss_G,loss_D_A,loss_D_B,cycle,idt``."""
    lines = [",".join(METRIC_FIELDS)]
    for row in rows:
        lines.append(
            ",".join(
                str(int(row[f])) if f == "step" else repr(row[f]) for f in METRIC_FIELDS
            )
        )
    return "\n".join(lines) + "\n"
