"""Forward semantics of the tensor primitives against naive references."""

import numpy as np
import pytest

from lldet.errors import InvalidInputError, InvalidShapeError
from lldet.tensor import (
    Tensor,
    activation,
    concat,
    conv2d,
    conv_out_extent,
    conv_transpose2d,
    conv_transpose_out_extent,
    instance_norm,
    l1_loss,
    max_pool2d,
    mse_loss,
    relu,
    tanh,
    tsum,
)
from naive_ops import naive_conv2d, naive_conv_transpose2d


def t(arr):
    return Tensor(np.asarray(arr, dtype=np.float64))


class TestConv2d:
    def test_all_ones_three_by_three(self):
        y = conv2d(t(np.ones((1, 1, 3, 3))), t(np.ones((1, 1, 3, 3))), t(np.zeros(1)))
        assert y.data.shape == (1, 1, 1, 1)
        assert y.data[0, 0, 0, 0] == 9.0

    def test_one_by_one_identity_kernel(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(2, 3, 4, 5))
        k = np.zeros((3, 3, 1, 1))
        for c in range(3):
            k[c, c, 0, 0] = 1.0
        y = conv2d(t(x), t(k), t(np.zeros(3)))
        assert np.array_equal(y.data, x)

    @pytest.mark.parametrize("stride,pad,pad_mode", [
        (1, 0, "zero"), (2, 1, "zero"), (1, 2, "reflect"), (2, 1, "reflect"),
    ])
    def test_matches_naive_loops(self, stride, pad, pad_mode):
        rng = np.random.default_rng(42)
        x = rng.normal(size=(1, 2, 5, 5))
        k = rng.normal(size=(3, 2, 3, 3))
        b = rng.normal(size=3)
        y = conv2d(t(x), t(k), t(b), stride=stride, pad=pad, pad_mode=pad_mode)
        expected = naive_conv2d(x, k, b, stride, pad, pad_mode)
        assert np.max(np.abs(y.data - expected)) < 1e-12

    def test_shape_rule(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(1, 1, 11, 7))
        k = rng.normal(size=(2, 1, 3, 3))
        y = conv2d(t(x), t(k), t(np.zeros(2)), stride=2, pad=1)
        assert y.data.shape == (
            1, 2, conv_out_extent(11, 3, 2, 1), conv_out_extent(7, 3, 2, 1)
        )

    def test_channel_mismatch_rejected(self):
        with pytest.raises(InvalidShapeError):
            conv2d(t(np.ones((1, 2, 4, 4))), t(np.ones((1, 3, 3, 3))), t(np.zeros(1)))

    def test_kernel_larger_than_padded_input_rejected(self):
        with pytest.raises(InvalidShapeError):
            conv2d(t(np.ones((1, 1, 2, 2))), t(np.ones((1, 1, 5, 5))), t(np.zeros(1)))


class TestConvTranspose2d:
    def test_shape_rule_doubles(self):
        x = t(np.ones((1, 1, 2, 2)))
        k = t(np.ones((1, 1, 2, 2)))
        y = conv_transpose2d(x, k, t(np.zeros(1)), stride=2, pad=0)
        assert y.data.shape == (1, 1, 4, 4)
        assert conv_transpose_out_extent(2, 2, 2, 0) == 4

    def test_matches_naive_scatter(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(2, 3, 4, 4))
        k = rng.normal(size=(3, 2, 3, 3))
        b = rng.normal(size=2)
        y = conv_transpose2d(t(x), t(k), t(b), stride=2, pad=1)
        expected = naive_conv_transpose2d(x, k, b, 2, 1)
        assert np.max(np.abs(y.data - expected)) < 1e-12

    def test_adjoint_identity(self):
        # <conv2d(u, k), v> == <u, conv_transpose2d(v, k)> on the transpose's
        # natural geometry: u extent (H-1)*s - 2p + kh, v extent H
        rng = np.random.default_rng(3)
        for stride, pad in [(1, 0), (2, 1), (2, 0), (1, 2)]:
            h = 6
            kh = 3
            t_extent = conv_transpose_out_extent(h, kh, stride, pad)
            u = rng.normal(size=(2, 3, t_extent, t_extent))
            v = rng.normal(size=(2, 4, h, h))
            k = rng.normal(size=(4, 3, kh, kh))
            fwd = conv2d(t(u), t(k), t(np.zeros(4)), stride=stride, pad=pad)
            assert fwd.data.shape == v.shape
            bwd = conv_transpose2d(t(v), t(k), t(np.zeros(3)), stride=stride, pad=pad)
            assert bwd.data.shape == u.shape
            lhs = float(np.sum(fwd.data * v))
            rhs = float(np.sum(u * bwd.data))
            assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))

    def test_zero_input_gives_bias(self):
        b = np.array([0.5, -1.5])
        y = conv_transpose2d(
            t(np.zeros((1, 3, 2, 2))), t(np.ones((3, 2, 2, 2))), t(b), stride=2
        )
        assert np.allclose(y.data[0, 0], 0.5) and np.allclose(y.data[0, 1], -1.5)


class TestInstanceNorm:
    def test_constant_plane_zeroed(self):
        x = t(np.full((1, 2, 4, 4), 3.25))
        y = instance_norm(x, t(np.ones(2)), t(np.zeros(2)))
        assert np.max(np.abs(y.data)) < 1e-3

    def test_beta_shift(self):
        x = t(np.full((1, 1, 3, 3), 7.0))
        y = instance_norm(x, t(np.ones(1)), t(np.array([0.5])))
        assert np.allclose(y.data, 0.5)

    def test_moments_match_gamma_beta(self):
        rng = np.random.default_rng(11)
        x = rng.normal(2.0, 3.0, size=(2, 3, 16, 16))
        gamma = np.array([1.0, 2.0, 0.5])
        beta = np.array([0.0, -1.0, 4.0])
        y = instance_norm(t(x), t(gamma), t(beta)).data
        for n in range(2):
            for c in range(3):
                plane = y[n, c]
                assert abs(plane.mean() - beta[c]) < 1e-6
                assert abs(plane.std() - gamma[c]) < 1e-3 * max(1, gamma[c])


class TestActivationsAndPool:
    def test_relu_values(self):
        y = activation(t(np.array([[-1.0, 2.0]])), "relu")
        assert y.data.tolist() == [[0.0, 2.0]]

    def test_leaky_slope(self):
        y = activation(t(np.array([-1.0])), "leaky_relu")
        assert y.data[0] == pytest.approx(-0.2)

    def test_tanh_zero(self):
        assert activation(t(np.array([0.0])), "tanh").data[0] == 0.0

    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            activation(t(np.array([0.0])), "gelu")

    def test_max_pool_window(self):
        x = t(np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(1, 1, 2, 2))
        y = max_pool2d(x, 2, 2)
        assert y.data.reshape(-1).tolist() == [4.0]

    def test_max_pool_constant(self):
        x = t(np.full((1, 2, 4, 4), 3.0))
        assert np.all(max_pool2d(x, 2, 2).data == 3.0)

    def test_max_pool_gradient_one_per_window(self):
        rng = np.random.default_rng(5)
        x = t(rng.normal(size=(1, 1, 4, 4)))
        y = max_pool2d(x, 2, 2)
        tsum(y).backward()
        grid = x.grad.reshape(2, 2, 2, 2)  # window blocks
        assert x.grad.sum() == 4.0
        for i in range(2):
            for j in range(2):
                assert x.grad[0, 0, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2].sum() == 1.0
        assert set(np.unique(grid)) <= {0.0, 1.0}

    def test_max_pool_tie_routes_to_first(self):
        x = t(np.full((1, 1, 2, 2), 5.0))
        y = max_pool2d(x, 2, 2)
        tsum(y).backward()
        assert x.grad.reshape(-1).tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_window_too_large(self):
        with pytest.raises(InvalidShapeError):
            max_pool2d(t(np.ones((1, 1, 2, 2))), 3, 1)


class TestLosses:
    def test_identical_zero(self):
        a = t(np.array([1.0, 2.0, 3.0]))
        assert l1_loss(a, t(np.array([1.0, 2.0, 3.0]))).item() == 0.0
        assert mse_loss(a, t(np.array([1.0, 2.0, 3.0]))).item() == 0.0

    def test_hand_arithmetic(self):
        a = t(np.array([0.0, 0.0]))
        b = t(np.array([1.0, 3.0]))
        assert l1_loss(a, b).item() == 2.0
        assert mse_loss(a, b).item() == 5.0

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        a = t(rng.normal(size=10))
        b = t(rng.normal(size=10))
        assert l1_loss(a, b).item() >= 0.0

    def test_shape_mismatch(self):
        with pytest.raises(InvalidShapeError):
            l1_loss(t(np.zeros(3)), t(np.zeros(4)))
        with pytest.raises(InvalidShapeError):
            mse_loss(t(np.zeros((1, 2))), t(np.zeros((2, 1))))


class TestGraph:
    def test_sum_of_squares_gradient(self):
        x = t(np.array([1.0, -2.0, 3.0]))
        loss = tsum(x * x)
        loss.backward()
        assert np.allclose(x.grad, 2.0 * x.data)

    def test_l1_gradient_levels(self):
        x = t(np.array([1.0, 2.0, 3.0, 4.0]))
        const = t(np.array([1.0, 0.0, 5.0, 4.0]))
        l1_loss(x, const).backward()
        assert np.allclose(x.grad, np.array([0.0, 0.25, -0.25, 0.0]))

    def test_backward_requires_scalar(self):
        x = t(np.ones(3))
        with pytest.raises(InvalidInputError):
            (x * 2.0).backward()

    def test_shared_node_accumulates(self):
        x = t(np.array([3.0]))
        y = x * x + x * 2.0
        y.backward()
        assert x.grad[0] == pytest.approx(8.0)

    def test_concat_splits_gradient(self):
        a = t(np.ones((1, 2, 2, 2)))
        b = t(np.ones((1, 3, 2, 2)))
        y = concat([a, b], axis=1)
        assert y.data.shape == (1, 5, 2, 2)
        tsum(y * y).backward()
        assert a.grad.shape == a.data.shape
        assert b.grad.shape == b.data.shape

    def test_detach_cuts_graph(self):
        x = t(np.array([2.0]))
        y = (x * 3.0).detach()
        loss = tsum(y * y)
        loss.backward()
        assert x.grad is None

    def test_forward_bit_determinism(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(1, 3, 6, 6))
        k = rng.normal(size=(4, 3, 3, 3))
        b = rng.normal(size=4)
        r1 = conv2d(t(x), t(k), t(b), stride=1, pad=1)
        r2 = conv2d(t(x), t(k), t(b), stride=1, pad=1)
        assert np.array_equal(r1.data, r2.data)
        s1, s2 = relu(r1), relu(r2)
        tsum(s1 * s1).backward()
        tsum(s2 * s2).backward()
        assert r1._parents[0].grad is not None
