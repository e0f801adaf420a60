"""Numpy fallback for the three convolution kernels.

The accumulation order per output element is pinned to exactly the order
the compiled extension uses (corr: ci, u, v; scatter: c1, u, v; weight
grad: n, i, j) so both backends produce bit-identical float64 results.
Each loop iteration applies one multiply followed by one add per element,
never a fused or reassociated form.
"""

import numpy as np


def corr2d(xp, k, stride):
    """Valid-mode strided cross-correlation.

    out[n, co, i, j] = sum_{ci,u,v} xp[n, ci, i*s+u, j*s+v] * k[co, ci, u, v]
    """
    n, ci, hp, wp = xp.shape
    co, _, kh, kw = k.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    out = np.zeros((n, co, ho, wo), dtype=np.float64)
    for c in range(ci):
        for u in range(kh):
            for v in range(kw):
                patch = xp[:, c, u : u + ho * stride : stride, v : v + wo * stride : stride]
                out += patch[:, None, :, :] * k[:, c, u, v][None, :, None, None]
    return out


def scatter2d(x, k, stride, out_h, out_w):
    """Adjoint of :func:`corr2d`: scatter x through k onto a larger grid.

    out[n, c2, i*s+u, j*s+v] += x[n, c1, i, j] * k[c1, c2, u, v]
    Requires out_h >= (H-1)*stride + kh and likewise for width.
    """
    n, c1, h, w = x.shape
    _, c2, kh, kw = k.shape
    out = np.zeros((n, c2, out_h, out_w), dtype=np.float64)
    for c in range(c1):
        for u in range(kh):
            for v in range(kw):
                target = out[:, :, u : u + h * stride : stride, v : v + w * stride : stride]
                target += x[:, c, None, :, :] * k[c, :, u, v][None, :, None, None]
    return out


def corr2d_k(xp, gy, kh, kw, stride):
    """Weight gradient of :func:`corr2d`.

    gk[co, ci, u, v] = sum_{n,i,j} xp[n, ci, i*s+u, j*s+v] * gy[n, co, i, j]
    """
    n, ci, hp, wp = xp.shape
    co, ho, wo = gy.shape[1], gy.shape[2], gy.shape[3]
    gk = np.zeros((co, ci, kh, kw), dtype=np.float64)
    for b in range(n):
        for i in range(ho):
            for j in range(wo):
                window = xp[b, :, i * stride : i * stride + kh, j * stride : j * stride + kw]
                gk += gy[b, :, i, j][:, None, None, None] * window[None, :, :, :]
    return gk
