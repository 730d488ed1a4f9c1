import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from revrate.dnn import (Batch, DnnArch, DnnModel, DnnTrainConfig, LstmParams, clamp_rating, collate,
                         dnn_forward, dnn_predict, embed_backward, embed_lookup, loss_and_grads,
                         lstm_forward, train_dnn)
from revrate.features import EncodedExample, onehot_category
from revrate.numerics import grad_check


def sig(x):
    return 1 / (1 + math.exp(-x))


def example(tokens=(2, 3, 0), genre="Jazz", time=0.5, reviewer=1, item=1, target=4):
    return EncodedExample(np.array(tokens), onehot_category(genre), time, reviewer, item, 2, 3, target)


def small_arch(**kw):
    base = dict(vocab_size=6, n_reviewers=3, n_items=3, embed_dim=4, hidden=5, id_embed_dim=3)
    base.update(kw)
    return DnnArch(**base)


def random_batch(arch, rng, B=3, L=5):
    return Batch(rng.integers(0, arch.vocab_size, (B, L)), np.eye(5)[rng.integers(0, 5, B)],
                 rng.random(B), rng.integers(0, arch.n_reviewers, B), rng.integers(0, arch.n_items, B),
                 rng.integers(0, 5, (B, 2)).astype(float), rng.integers(1, 6, B).astype(float))


def test_embed_lookup():
    table = np.array([[9.0, 9.0], [0.0, 1.0], [1.0, 0.0]])
    assert embed_lookup(table, 2).tolist() == [1.0, 0.0]
    assert embed_lookup(table, 0).tolist() == [9.0, 9.0]
    with pytest.raises(IndexError):
        embed_lookup(table, 3)
    with pytest.raises(IndexError):
        embed_lookup(table, -1)


def test_embed_gradient_is_sparse():
    grad = embed_backward((5, 2), np.array([1, 3, 1]), np.ones((3, 2)))
    assert grad.tolist() == [[0, 0], [2, 2], [0, 0], [1, 1], [0, 0]]


def test_lstm_zero_params_give_zero_state():
    p = LstmParams(np.zeros((3, 8)), np.zeros((2, 8)), np.zeros(8))
    h = lstm_forward(np.random.default_rng(0).normal(size=(7, 3)), p)
    assert h.tolist() == [0.0, 0.0]


def test_scalar_lstm_one_step_by_hand():
    # gates i, f, g, o with E = H = 1
    wx = np.array([[0.5, -0.3, 0.8, 0.2]])
    wh = np.array([[0.1, 0.4, -0.6, 0.7]])
    b = np.array([0.1, 0.2, -0.1, 0.05])
    x = 1.5
    i = sig(0.5 * x + 0.1)
    g = math.tanh(0.8 * x - 0.1)
    o = sig(0.2 * x + 0.05)
    c = i * g  # forget gate multiplies c0 = 0
    h = o * math.tanh(c)
    out = lstm_forward(np.array([[x]]), LstmParams(wx, wh, b))
    assert out[0] == pytest.approx(h, abs=1e-15)


def test_scalar_lstm_two_steps_by_hand():
    wx = np.array([[0.5, -0.3, 0.8, 0.2]])
    wh = np.array([[0.1, 0.4, -0.6, 0.7]])
    b = np.array([0.1, 0.2, -0.1, 0.05])
    h, c = 0.0, 0.0
    for x in (1.5, -0.7):
        i = sig(0.5 * x + 0.1 * h + 0.1)
        f = sig(-0.3 * x + 0.4 * h + 0.2)
        g = math.tanh(0.8 * x - 0.6 * h - 0.1)
        o = sig(0.2 * x + 0.7 * h + 0.05)
        c = f * c + i * g
        h = o * math.tanh(c)
    assert lstm_forward(np.array([[1.5], [-0.7]]), LstmParams(wx, wh, b))[0] == pytest.approx(h, abs=1e-15)


def test_lstm_shape_errors():
    p = LstmParams(np.zeros((3, 8)), np.zeros((2, 8)), np.zeros(8))
    with pytest.raises(ValueError):
        lstm_forward(np.zeros((4, 2)), p)
    with pytest.raises(ValueError):
        lstm_forward(np.zeros((0, 3)), p)


def test_default_head_width_is_146():
    arch = DnnArch(vocab_size=10, n_reviewers=4, n_items=4)
    assert arch.head_width == 146
    assert DnnModel.init(arch).head_weights.shape == (1, 146)
    assert DnnArch(10, 4, 4, count_scale=(3, 2)).head_width == 148


def test_zero_network_outputs_zero():
    model = DnnModel.zeros(small_arch())
    rng = np.random.default_rng(0)
    batch = random_batch(model.arch, rng)
    from revrate.dnn import forward_batch
    assert forward_batch(model, batch).tolist() == [0.0, 0.0, 0.0]
    assert dnn_forward(example(), model) == 0.0


def test_category_flip_changes_output_by_head_weight_difference():
    arch = small_arch()
    model = DnnModel.init(arch, seed=3, scale=0.3)
    jazz, pop = example(genre="Jazz"), example(genre="Pop")
    H = arch.hidden
    w = model.head_weights[0]
    expected = w[H + 4] - w[H + 3]  # Pop is position 4, Jazz position 3
    assert dnn_forward(pop, model) - dnn_forward(jazz, model) == pytest.approx(expected, abs=1e-14)


def test_forward_rejects_out_of_range_indices():
    model = DnnModel.init(small_arch())
    with pytest.raises(IndexError):
        dnn_forward(example(tokens=(2, 99)), model)
    with pytest.raises(IndexError):
        dnn_forward(example(reviewer=7), model)


def test_predict_clamps():
    model = DnnModel.zeros(small_arch())
    for bias, expected in ((-3.0, 1.0), (4.2, 4.2), (9.0, 5.0)):
        model.head_bias[0] = bias
        assert dnn_forward(example(), model) == pytest.approx(bias)
        assert dnn_predict(model, example()) == pytest.approx(expected)


@given(st.floats(-100, 100), st.floats(1, 5))
def test_clamp_never_increases_error(raw, target):
    clamped = float(clamp_rating(raw))
    assert 1.0 <= clamped <= 5.0
    assert (clamped - target) ** 2 <= (raw - target) ** 2


@pytest.mark.parametrize("counts", [None, (4, 3)])
def test_every_parameter_group_passes_grad_check(counts):
    arch = small_arch(hidden=6, count_scale=counts)
    model = DnnModel.init(arch, seed=11, scale=0.5)
    batch = random_batch(arch, np.random.default_rng(2))
    for name, value in model.parameters().items():
        def f(x, name=name):
            params = dict(model.parameters(), **{name: x})
            loss, grads = loss_and_grads(DnnModel.from_parameters(arch, params), batch)
            return loss, grads[name]
        assert grad_check(f, value.copy()) < 1e-4, name


def test_unused_embedding_rows_get_zero_gradient():
    arch = small_arch(n_reviewers=5)
    model = DnnModel.init(arch, seed=1)
    batch = collate([example(reviewer=1), example(reviewer=3)])
    _, grads = loss_and_grads(model, batch)
    g = grads["reviewer_embedding"]
    assert np.all(g[[0, 2, 4]] == 0) and np.any(g[1] != 0) and np.any(g[3] != 0)


def test_train_config_defaults():
    cfg = DnnTrainConfig()
    assert cfg.learning_rate == 0.01 and cfg.epochs == 100
    for bad in (dict(learning_rate=0), dict(epochs=0), dict(batch_size=0)):
        with pytest.raises(ValueError):
            DnnTrainConfig(**bad)


def _toy_examples(n=24, seed=0):
    rng = np.random.default_rng(seed)
    genres = ["Pop", "Jazz", "Classical"]
    return [example(tokens=rng.integers(0, 6, 4), genre=genres[i % 3], time=float(rng.random()),
                    reviewer=int(rng.integers(0, 3)), item=int(rng.integers(0, 3)), target=1 + i % 5)
            for i in range(n)]


def test_train_curve_length_and_determinism():
    train, val = _toy_examples(24, 0), _toy_examples(8, 1)
    cfg = DnnTrainConfig(epochs=4, batch_size=8, seed=5)
    m1, c1 = train_dnn(train, val, cfg, small_arch())
    m2, c2 = train_dnn(train, val, cfg, small_arch())
    assert len(c1) == 4 and len(c1.validation_mse) == 4
    assert all(v >= 0 for v in c1.train_mse + c1.validation_mse)
    assert c1.train_mse == c2.train_mse and c1.validation_mse == c2.validation_mse
    for name, p in m1.parameters().items():
        np.testing.assert_array_equal(p, m2.parameters()[name])
    assert c1.to_csv().splitlines()[0] == "epoch,train_mse,validation_mse"


def test_train_reduces_loss():
    train = _toy_examples(24, 0)
    _, curve = train_dnn(train, None, DnnTrainConfig(epochs=30, batch_size=24, seed=1), small_arch())
    assert curve.train_mse[-1] < curve.train_mse[0]
    assert curve.validation_mse == []


def test_train_rejects_empty():
    with pytest.raises(ValueError):
        train_dnn([], None, DnnTrainConfig(epochs=1), small_arch())
