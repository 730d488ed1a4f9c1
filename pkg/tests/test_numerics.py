import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from revrate.numerics import (Adam, AdamHyper, AdamState, NonFiniteError, adam_step, grad_check,
                              mse_loss, numeric_gradient, sigmoid, softmax)

finite = st.floats(-50, 50, allow_nan=False)


def test_softmax_examples():
    np.testing.assert_allclose(softmax(np.zeros(5)), [0.2] * 5, rtol=0, atol=1e-12)
    np.testing.assert_allclose(softmax([math.log(2), 0.0]), [2 / 3, 1 / 3], rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        softmax([])


def test_softmax_large_logits_are_stable():
    p = softmax([1000.0, 0.0, -1000.0])
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0)


@given(arrays(np.float64, st.integers(1, 8), elements=finite), st.floats(-100, 100))
def test_softmax_simplex_and_shift(z, c):
    p = softmax(z)
    assert np.all(p > 0)
    assert abs(p.sum() - 1.0) <= 1e-12
    q = softmax(z + c)
    np.testing.assert_allclose(q, p, rtol=0, atol=1e-12)
    assert np.argmax(q) == np.argmax(p)


def test_mse_examples():
    assert mse_loss([1, 2, 3], [1, 2, 3]) == 0.0
    assert mse_loss([4, 4], [2, 4]) == 2.0
    assert mse_loss([1], [5]) == 16.0
    with pytest.raises(ValueError):
        mse_loss([1, 2], [1])
    with pytest.raises(ValueError):
        mse_loss([], [])


# multiples of 1/8 keep squared differences exact (no underflow to 0)
eighths = st.integers(-400, 400).map(lambda k: k / 8)


@given(st.lists(st.tuples(eighths, eighths), min_size=1, max_size=10))
def test_mse_properties(pairs):
    p = np.array([a for a, _ in pairs])
    t = np.array([b for _, b in pairs])
    assert mse_loss(p, t) >= 0
    assert mse_loss(p, t) == mse_loss(t, p)
    assert (mse_loss(p, t) == 0) == bool(np.all(p == t))


def test_sigmoid_extremes():
    s = sigmoid(np.array([-800.0, 0.0, 800.0]))
    assert s.tolist() == [0.0, 0.5, 1.0]


def test_adam_defaults():
    h = AdamHyper()
    assert (h.learning_rate, h.beta1, h.beta2, h.epsilon) == (0.01, 0.9, 0.999, 1e-8)


def test_adam_first_step_is_lr_times_sign():
    p = np.array([1.0, -2.0, 0.3])
    g = np.array([0.5, -3.0, 1e-3])
    new, state = adam_step(p, g, AdamState.zeros_like(p))
    np.testing.assert_allclose(new - p, -0.01 * np.sign(g), rtol=1e-2)
    assert state.t == 1


def test_adam_scalar_first_step():
    new, _ = adam_step(np.array(0.0), np.array(0.5), AdamState.zeros_like(np.array(0.0)))
    assert new == pytest.approx(-0.01, rel=1e-6)


def test_adam_zero_gradient_fixed_point():
    p = np.array([[1.0, 2.0], [3.0, 4.0]])
    state = AdamState.zeros_like(p)
    for _ in range(3):
        new, state = adam_step(p, np.zeros_like(p), state)
        np.testing.assert_array_equal(new, p)
    assert state.t == 3


def test_adam_matches_hand_computed_second_step():
    hyper = AdamHyper(learning_rate=0.1)
    p0 = np.array([0.0])
    p1, s1 = adam_step(p0, np.array([1.0]), AdamState.zeros_like(p0), hyper)
    p2, s2 = adam_step(p1, np.array([-2.0]), s1, hyper)
    m = 0.9 * 0.1 + 0.1 * -2.0
    v = 0.999 * 0.001 + 0.001 * 4.0
    expected = p1 - 0.1 * (m / (1 - 0.81)) / (math.sqrt(v / (1 - 0.999 ** 2)) + 1e-8)
    np.testing.assert_allclose(p2, expected, rtol=1e-14)
    assert s2.t == 2 and np.all(s2.v >= 0)


def test_adam_shape_mismatch():
    p = np.zeros(3)
    with pytest.raises(ValueError):
        adam_step(p, np.zeros(2), AdamState.zeros_like(p))


def test_adam_does_not_mutate_inputs():
    p = np.ones(2)
    state = AdamState.zeros_like(p)
    adam_step(p, np.ones(2), state)
    assert p.tolist() == [1.0, 1.0] and state.t == 0 and state.m.tolist() == [0.0, 0.0]


def test_adam_dict_wrapper_updates_in_place():
    params = {"w": np.array([1.0, 1.0])}
    view = params["w"]
    Adam().step(params, {"w": np.array([1.0, -1.0])})
    np.testing.assert_allclose(view, [0.99, 1.01], rtol=1e-6)


def test_grad_check_square():
    err = grad_check(lambda w: (float(w[0] ** 2), 2 * w), np.array([3.0]))
    assert err < 1e-6


def test_grad_check_linear_is_exact():
    a = np.array([0.3, -1.7, 2.5])
    err = grad_check(lambda w: (float(a @ w), a.copy()), np.array([1.0, 2.0, -3.0]))
    assert err < 1e-9


def test_grad_check_detects_wrong_gradient():
    err = grad_check(lambda w: (float(w[0] ** 2), 3 * w), np.array([3.0]))
    assert err > 0.1


def test_grad_check_non_finite():
    with pytest.raises(NonFiniteError), np.errstate(divide="ignore"):
        grad_check(lambda w: (float(np.log(w[0])), 1 / w), np.array([0.0]))


def test_numeric_gradient_shape():
    g = numeric_gradient(lambda w: float(np.sum(w ** 3)), np.ones((2, 3)))
    np.testing.assert_allclose(g, 3 * np.ones((2, 3)), rtol=1e-8)
