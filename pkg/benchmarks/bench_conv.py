#!/usr/bin/env python3
"""Benchmark the compiled convolution kernels against the numpy fallback.

Usage: python benchmarks/bench_conv.py [--repeat N]

Times the three raw kernels on training- and inference-flavored shapes,
plus one full generator forward pass, and prints the speedup.  Results
are also sanity-checked for bit-identity while benchmarking.
"""

import argparse
import time

import numpy as np

from lldet.tensor import backend, kernels_numpy


def time_call(fn, *args, repeat=5):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_kernels(repeat):
    cases = [
        ("corr2d 4x8x16x16 k3", "corr2d",
         (np.random.default_rng(0).normal(size=(4, 8, 18, 18)),
          np.random.default_rng(1).normal(size=(16, 8, 3, 3)), 1)),
        ("corr2d 1x64x128x128 k3", "corr2d",
         (np.random.default_rng(2).normal(size=(1, 64, 130, 130)),
          np.random.default_rng(3).normal(size=(64, 64, 3, 3)), 1)),
        ("scatter2d 4x32x8x8 k4 s2", "scatter2d",
         (np.random.default_rng(4).normal(size=(4, 32, 8, 8)),
          np.random.default_rng(5).normal(size=(32, 16, 4, 4)), 2, 18, 18)),
        ("corr2d_k 4x8x18x18 k3", "corr2d_k",
         (np.random.default_rng(6).normal(size=(4, 8, 18, 18)),
          np.random.default_rng(7).normal(size=(4, 16, 16, 16)), 3, 3, 1)),
    ]
    print(f"{'kernel case':<28} {'ext':>10} {'numpy':>10} {'speedup':>8}")
    for label, name, args in cases:
        args = tuple(np.ascontiguousarray(a) if isinstance(a, np.ndarray) else a for a in args)
        t_np, out_np = time_call(getattr(kernels_numpy, name), *args, repeat=repeat)
        if backend.HAVE_EXT:
            from lldet.tensor import _convkernels

            t_ext, out_ext = time_call(getattr(_convkernels, name), *args, repeat=repeat)
            assert np.array_equal(out_np, out_ext), f"{label}: backends disagree"
            print(f"{label:<28} {t_ext*1e3:>8.2f}ms {t_np*1e3:>8.2f}ms {t_np/t_ext:>7.1f}x")
        else:
            print(f"{label:<28} {'n/a':>10} {t_np*1e3:>8.2f}ms {'':>8}")


def bench_generator(repeat):
    from lldet.gan import Network, build_resnet9_generator
    from lldet.tensor import Tensor

    spec = build_resnet9_generator(3, 8, 2)
    net = Network.initialized(spec, np.random.default_rng(8))
    x = Tensor(np.random.default_rng(9).normal(size=(4, 3, 16, 16)))

    def forward_with(impl):
        saved = (backend.corr2d, backend.scatter2d, backend.corr2d_k)
        backend.corr2d, backend.scatter2d, backend.corr2d_k = (
            impl.corr2d, impl.scatter2d, impl.corr2d_k,
        )
        try:
            return time_call(lambda: net(x).data, repeat=repeat)
        finally:
            backend.corr2d, backend.scatter2d, backend.corr2d_k = saved

    t_np, out_np = forward_with(kernels_numpy)
    line = f"{'resnet9 fwd 4x3x16x16':<28}"
    if backend.HAVE_EXT:
        from lldet.tensor import _convkernels

        t_ext, out_ext = forward_with(_convkernels)
        assert np.array_equal(out_np, out_ext)
        line += f" {t_ext*1e3:>8.2f}ms {t_np*1e3:>8.2f}ms {t_np/t_ext:>7.1f}x"
    else:
        line += f" {'n/a':>10} {t_np*1e3:>8.2f}ms"
    print(line)


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"compiled extension available: {backend.HAVE_EXT}")
    bench_kernels(args.repeat)
    bench_generator(args.repeat)
