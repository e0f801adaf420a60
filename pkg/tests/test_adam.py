"""Adam update rule tests."""

import numpy as np
import pytest

from lldet.errors import InvalidShapeError
from lldet.tensor import AdamState, Tensor, adam_step


def test_zero_gradient_keeps_parameters():
    p = Tensor(np.array([1.5, -2.0]))
    state = AdamState(lr=1e-3, beta1=0.9, beta2=0.999)
    before = p.data.copy()
    adam_step({"p": p}, {"p": np.zeros(2)}, state)
    assert np.array_equal(p.data, before)
    assert state.t == 1


def test_single_step_hand_computed():
    # m_hat = 1, v_hat = 1 after one unit-gradient step, so the update is
    # lr / (1 + eps), within 1e-6 of lr
    p = Tensor(np.array([0.0]))
    state = AdamState(lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8)
    adam_step({"p": p}, {"p": np.array([1.0])}, state)
    assert abs(p.data[0] + 1e-3) < 1e-6


def test_two_identical_runs_bit_identical():
    def run():
        rng = np.random.default_rng(4)
        p = Tensor(rng.normal(size=(3, 3)))
        state = AdamState(lr=1e-2, beta1=0.5, beta2=0.9)
        for _ in range(20):
            g = rng.normal(size=(3, 3))
            adam_step({"p": p}, {"p": g}, state)
        return p.data

    assert np.array_equal(run(), run())


def test_missing_gradient_means_zero():
    p = Tensor(np.array([4.0]))
    state = AdamState()
    adam_step({"p": p}, {}, state)
    assert p.data[0] == 4.0


def test_shape_mismatch_rejected():
    p = Tensor(np.zeros(3))
    with pytest.raises(InvalidShapeError):
        adam_step({"p": p}, {"p": np.zeros(4)}, AdamState())


def test_moments_track_parameter_shapes():
    p = Tensor(np.zeros((2, 2)))
    state = AdamState()
    adam_step({"p": p}, {"p": np.ones((2, 2))}, state)
    assert state.m["p"].shape == (2, 2)
    assert state.v["p"].shape == (2, 2)
