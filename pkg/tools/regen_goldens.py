#!/usr/bin/env python3
"""Regenerate the checked-in golden fixtures under tests/data/.

Run from the repository root after an intentional behavior change:

    python tools/regen_goldens.py

Covers the equalization goldens (4x4 fixture image, enhanced output,
before/after histogram CSVs) and the translation goldens (a tiny trained
generator weight file plus one translated image).
"""

from pathlib import Path

import numpy as np

from lldet.datasets import read_ppm, write_ppm
from lldet.gan import save_weights, train, translate
from lldet.gan.train import TrainConfig
from lldet.pixelops import RasterImage, enhance_he, histogram_csv, histogram_report
from lldet.toydata import make_domains

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def regen_he():
    rng = np.random.default_rng(20240817)
    arr = rng.integers(0, 160, size=(4, 4, 3), dtype=np.uint8)  # biased dark
    img = RasterImage.from_array(arr)
    (DATA / "he_input_4x4.ppm").write_bytes(write_ppm(img))
    enhanced = enhance_he(img)
    (DATA / "he_golden_4x4.ppm").write_bytes(write_ppm(enhanced))
    (DATA / "he_hist_before.csv").write_text(histogram_csv(histogram_report(img)))
    (DATA / "he_hist_after.csv").write_text(histogram_csv(histogram_report(enhanced)))
    print("wrote HE goldens")


def regen_translate():
    rng = np.random.default_rng(555)
    domain_a, domain_b = make_domains(8, 8, rng)
    cfg = TrainConfig(batch_size=2, steps=30, seed=11, image_size=8, pool_size=4)
    result = train(cfg, domain_a, domain_b, "resnet9", base=4, n_blocks=1)
    (DATA / "toy_resnet_g_ab.weights").write_bytes(save_weights(result.g_ab))
    sample = make_domains(1, 8, np.random.default_rng(777))[0][0]
    (DATA / "translate_input_8x8.ppm").write_bytes(write_ppm(sample))
    out = translate(result.g_ab, result.generator_spec, sample)
    (DATA / "translate_golden_8x8.ppm").write_bytes(write_ppm(out))
    print("wrote translation goldens")


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    regen_he()
    regen_translate()
    # sanity: the checked-in goldens must decode
    read_ppm((DATA / "he_golden_4x4.ppm").read_bytes())
    read_ppm((DATA / "translate_golden_8x8.ppm").read_bytes())
