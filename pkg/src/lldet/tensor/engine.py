"""Dense float64 tensors with reverse-mode differentiation.

A :class:`Tensor` is both the value carrier and the graph node: it holds
the forward result, the accumulated gradient, its parents and a closure
that pushes an incoming gradient to those parents.  Graphs are built
eagerly by the op functions below and walked once, in reverse
topological order, by :meth:`Tensor.backward`.

Everything runs in float64 with fixed reduction orders, so a forward or
backward pass is bit-deterministic for given input bits.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError, InvalidShapeError
from . import backend

__all__ = [
    "Tensor",
    "conv2d",
    "conv_transpose2d",
    "instance_norm",
    "activation",
    "relu",
    "leaky_relu",
    "tanh",
    "max_pool2d",
    "l1_loss",
    "mse_loss",
    "concat",
    "tsum",
    "tmean",
    "backward",
    "conv_out_extent",
    "conv_transpose_out_extent",
]

LEAKY_SLOPE = 0.2


def conv_out_extent(extent: int, kernel: int, stride: int, pad: int) -> int:
    """Spatial shape rule for conv2d (floor division)."""
    return (extent + 2 * pad - kernel) // stride + 1


def conv_transpose_out_extent(extent: int, kernel: int, stride: int, pad: int) -> int:
    """Spatial shape rule for conv_transpose2d."""
    return (extent - 1) * stride - 2 * pad + kernel


class Tensor:
    """A float64 array plus its place in the differentiation graph."""

    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, _parents=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = tuple(_parents)
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def detach(self) -> "Tensor":
        """A new leaf sharing this tensor's buffer, cut from the graph."""
        return Tensor(self.data)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        """Reverse-mode sweep from a scalar node."""
        if self.data.size != 1:
            raise InvalidInputError(
                f"backward requires a scalar loss, got shape {self.data.shape}"
            )
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # Elementwise arithmetic on same-shape tensors or python scalars.

    def _coerce(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            if other.data.shape != self.data.shape and other.data.size != 1:
                raise InvalidShapeError(
                    f"shape mismatch: {self.data.shape} vs {other.data.shape}"
                )
            return other
        return Tensor(np.float64(other))

    def __add__(self, other):
        other = self._coerce(other)
        out = Tensor(self.data + other.data, (self, other))

        def bw(g):
            self.accumulate(g if self.data.shape == g.shape else g.sum())
            other.accumulate(g if other.data.shape == g.shape else g.sum())

        out._backward = bw
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, (self,))
        out._backward = lambda g: self.accumulate(-g)
        return out

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        out = Tensor(self.data * other.data, (self, other))

        def bw(g):
            ga = g * other.data
            gb = g * self.data
            self.accumulate(ga if self.data.shape == ga.shape else ga.sum())
            other.accumulate(gb if other.data.shape == gb.shape else gb.sum())

        out._backward = bw
        return out

    __rmul__ = __mul__

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def tsum(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(x.data.sum(), (x,))
    out._backward = lambda g: x.accumulate(np.full_like(x.data, float(g)))
    return out


def tmean(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(x.data.mean(), (x,))
    out._backward = lambda g: x.accumulate(np.full_like(x.data, float(g) / x.data.size))
    return out


def relu(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(np.maximum(x.data, 0.0), (x,))
    out._backward = lambda g: x.accumulate(g * (x.data > 0))
    return out


def leaky_relu(x: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    x = _as_tensor(x)
    out = Tensor(np.where(x.data > 0, x.data, slope * x.data), (x,))
    out._backward = lambda g: x.accumulate(g * np.where(x.data > 0, 1.0, slope))
    return out


def tanh(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    y = np.tanh(x.data)
    out = Tensor(y, (x,))
    out._backward = lambda g: x.accumulate(g * (1.0 - y * y))
    return out


_ACTIVATIONS = {
    "relu": relu,
    "leaky_relu": leaky_relu,
    "tanh": tanh,
}


def activation(x: Tensor, kind: str) -> Tensor:
    """Elementwise map by name: relu, leaky_relu (slope 0.2) or tanh."""
    try:
        fn = _ACTIVATIONS[kind]
    except KeyError:
        raise InvalidInputError(f"unknown activation kind {kind!r}") from None
    return fn(x)


def _check_4d(name, t: Tensor):
    if t.data.ndim != 4:
        raise InvalidShapeError(f"{name} must be 4-D (N,C,H,W), got {t.data.shape}")


def _pad_input(arr: np.ndarray, pad: int, mode: str) -> np.ndarray:
    if pad == 0:
        return np.ascontiguousarray(arr)
    if mode == "zero":
        return np.pad(arr, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    if mode == "reflect":
        if pad >= arr.shape[2] or pad >= arr.shape[3]:
            raise InvalidShapeError(
                f"reflect pad {pad} needs spatial extents > pad, got {arr.shape[2:]}"
            )
        return np.pad(arr, ((0, 0), (0, 0), (pad, pad), (pad, pad)), mode="reflect")
    raise InvalidInputError(f"unknown pad mode {mode!r}")


def _unpad_adjoint(gxp: np.ndarray, pad: int, mode: str) -> np.ndarray:
    """Adjoint of _pad_input: fold padded-area gradients back inside."""
    if pad == 0:
        return gxp
    n, c, hp, wp = gxp.shape
    h, w = hp - 2 * pad, wp - 2 * pad
    if mode == "zero":
        return gxp[:, :, pad : pad + h, pad : pad + w].copy()
    # reflect: route each padded cell's gradient to its source cell
    idx_h = _reflect_indices(h, pad)
    idx_w = _reflect_indices(w, pad)
    flat = gxp.reshape(n * c, hp, wp)
    gx = np.zeros((n * c, h, w), dtype=np.float64)
    np.add.at(
        gx,
        (
            np.arange(n * c)[:, None, None],
            idx_h[None, :, None],
            idx_w[None, None, :],
        ),
        flat,
    )
    return gx.reshape(n, c, h, w)


def _reflect_indices(extent: int, pad: int) -> np.ndarray:
    src = np.arange(-pad, extent + pad)
    return np.abs(src) * (src < extent) + (2 * extent - 2 - src) * (src >= extent)


def conv2d(
    x: Tensor,
    k: Tensor,
    bias: Tensor,
    stride: int = 1,
    pad: int = 0,
    pad_mode: str = "zero",
) -> Tensor:
    """Direct cross-correlation, H' = floor((H + 2p - kh)/s) + 1."""
    _check_4d("conv2d input", x)
    _check_4d("conv2d kernel", k)
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    n, ci, h, w = x.data.shape
    co, kci, kh, kw = k.data.shape
    if kci != ci:
        raise InvalidShapeError(f"kernel expects {kci} input channels, input has {ci}")
    if bias.data.shape != (co,):
        raise InvalidShapeError(f"bias shape {bias.data.shape} != ({co},)")
    hp, wp = h + 2 * pad, w + 2 * pad
    if kh > hp or kw > wp:
        raise InvalidShapeError(
            f"kernel {kh}x{kw} exceeds padded input {hp}x{wp}"
        )
    xp = _pad_input(x.data, pad, pad_mode)
    kd = np.ascontiguousarray(k.data)
    y = backend.corr2d(xp, kd, stride)
    y += bias.data[None, :, None, None]
    out = Tensor(y, (x, k, bias))

    def bw(g):
        g = np.ascontiguousarray(g)
        bias.accumulate(g.sum(axis=(0, 2, 3)))
        k.accumulate(backend.corr2d_k(xp, g, kh, kw, stride))
        gxp = backend.scatter2d(g, kd, stride, hp, wp)
        x.accumulate(_unpad_adjoint(gxp, pad, pad_mode))

    out._backward = bw
    return out


def conv_transpose2d(
    x: Tensor, k: Tensor, bias: Tensor, stride: int = 1, pad: int = 0
) -> Tensor:
    """Adjoint of conv2d's linear map; kernel layout is (Cin, Cout, kh, kw)."""
    _check_4d("conv_transpose2d input", x)
    _check_4d("conv_transpose2d kernel", k)
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    n, c1, h, w = x.data.shape
    kc1, c2, kh, kw = k.data.shape
    if kc1 != c1:
        raise InvalidShapeError(f"kernel expects {kc1} input channels, input has {c1}")
    if bias.data.shape != (c2,):
        raise InvalidShapeError(f"bias shape {bias.data.shape} != ({c2},)")
    ho = conv_transpose_out_extent(h, kh, stride, pad)
    wo = conv_transpose_out_extent(w, kw, stride, pad)
    if ho < 1 or wo < 1:
        raise InvalidShapeError(f"output extent {ho}x{wo} is empty")
    full_h = (h - 1) * stride + kh
    full_w = (w - 1) * stride + kw
    xd = np.ascontiguousarray(x.data)
    kd = np.ascontiguousarray(k.data)
    full = backend.scatter2d(xd, kd, stride, full_h, full_w)
    y = full[:, :, pad : pad + ho, pad : pad + wo].copy()
    y += bias.data[None, :, None, None]
    out = Tensor(y, (x, k, bias))

    def bw(g):
        bias.accumulate(g.sum(axis=(0, 2, 3)))
        gfull = np.zeros((n, c2, full_h, full_w), dtype=np.float64)
        gfull[:, :, pad : pad + ho, pad : pad + wo] = g
        x.accumulate(backend.corr2d(gfull, kd, stride))
        k.accumulate(backend.corr2d_k(gfull, xd, kh, kw, stride))

    out._backward = bw
    return out


def instance_norm(
    x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5
) -> Tensor:
    """Normalize each (sample, channel) plane to zero mean, unit variance.

    Uses the biased (population) variance; gamma and beta are per
    channel.
    """
    _check_4d("instance_norm input", x)
    c = x.data.shape[1]
    if gamma.data.shape != (c,) or beta.data.shape != (c,):
        raise InvalidShapeError(
            f"gamma/beta must have shape ({c},), got {gamma.data.shape}/{beta.data.shape}"
        )
    mu = x.data.mean(axis=(2, 3), keepdims=True)
    var = x.data.var(axis=(2, 3), keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    y = xhat * gamma.data[None, :, None, None] + beta.data[None, :, None, None]
    out = Tensor(y, (x, gamma, beta))

    def bw(g):
        beta.accumulate(g.sum(axis=(0, 2, 3)))
        gamma.accumulate((g * xhat).sum(axis=(0, 2, 3)))
        gs = g * gamma.data[None, :, None, None]
        gx = inv * (
            gs
            - gs.mean(axis=(2, 3), keepdims=True)
            - xhat * (gs * xhat).mean(axis=(2, 3), keepdims=True)
        )
        x.accumulate(gx)

    out._backward = bw
    return out


def max_pool2d(x: Tensor, k: int, stride: int) -> Tensor:
    """Window maximum; the gradient routes to the first max per window."""
    _check_4d("max_pool2d input", x)
    n, c, h, w = x.data.shape
    if k > h or k > w:
        raise InvalidShapeError(f"pool window {k} exceeds spatial extents {h}x{w}")
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    ho = (h - k) // stride + 1
    wo = (w - k) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(x.data, (k, k), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]  # (N,C,Ho,Wo,k,k)
    flat = windows.reshape(n, c, ho, wo, k * k)
    arg = flat.argmax(axis=-1)  # first occurrence on ties, row-major window order
    y = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]
    out = Tensor(y, (x,))

    def bw(g):
        rows = (np.arange(ho) * stride)[None, None, :, None] + (arg // k)
        cols = (np.arange(wo) * stride)[None, None, None, :] + (arg % k)
        nc = np.arange(n * c)
        base = nc[:, None, None] * (h * w)
        idx = (base + (rows * w + cols).reshape(n * c, ho, wo)).reshape(-1)
        gx = np.zeros(n * c * h * w, dtype=np.float64)
        np.add.at(gx, idx, g.reshape(-1))
        x.accumulate(gx.reshape(n, c, h, w))

    out._backward = bw
    return out


def _check_same_shape(a: Tensor, b: Tensor, op: str):
    if a.data.shape != b.data.shape:
        raise InvalidShapeError(
            f"{op} needs equal shapes, got {a.data.shape} vs {b.data.shape}"
        )


def l1_loss(a: Tensor, b: Tensor) -> Tensor:
    """Mean absolute difference."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape(a, b, "l1_loss")
    diff = a.data - b.data
    out = Tensor(np.abs(diff).mean(), (a, b))

    def bw(g):
        gd = float(g) * np.sign(diff) / diff.size
        a.accumulate(gd)
        b.accumulate(-gd)

    out._backward = bw
    return out


def mse_loss(a: Tensor, b: Tensor) -> Tensor:
    """Mean squared difference."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape(a, b, "mse_loss")
    diff = a.data - b.data
    out = Tensor((diff * diff).mean(), (a, b))

    def bw(g):
        gd = float(g) * 2.0 * diff / diff.size
        a.accumulate(gd)
        b.accumulate(-gd)

    out._backward = bw
    return out


def concat(tensors: list[Tensor], axis: int = 1) -> Tensor:
    """Concatenate along an axis (channel axis by default)."""
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise InvalidInputError("concat needs at least one tensor")
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            t.accumulate(g[tuple(sl)])

    out._backward = bw
    return out


def backward(loss: Tensor, params: dict[str, Tensor] | None = None):
    """Run the reverse sweep; unreachable parameters get zero gradients."""
    loss.backward()
    if params:
        for p in params.values():
            if p.grad is None:
                p.grad = np.zeros_like(p.data)
