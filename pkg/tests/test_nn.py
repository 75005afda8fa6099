import math

import numpy as np
import pytest

from prosim.errors import NetworkSpecError, TrainingError
from prosim.nn import (LayerSpec, NetworkSpec, TrainConfig, forward,
                       gradient_check, init_network, load_model, save_model,
                       train)
from prosim.nn.core import parameter_count


def dense_spec(d_in=3, out=2):
    return NetworkSpec((LayerSpec("dense", 4, "tanh"),
                        LayerSpec("dense", out, "linear")),
                       input_dim=d_in, output_dim=out)


def test_parameter_counts():
    dense = NetworkSpec((LayerSpec("dense", 3, "linear"),),
                        input_dim=2, output_dim=3)
    assert parameter_count(dense) == 9  # 6 weights + 3 biases
    gru = NetworkSpec((LayerSpec("gru", 7, "tanh"),
                       LayerSpec("dense", 1, "linear")),
                      input_dim=4, output_dim=1)
    assert parameter_count(gru) == 3 * (4 * 7 + 49 + 7) + (7 + 1)
    lstm = NetworkSpec((LayerSpec("lstm", 5, "tanh"),
                        LayerSpec("dense", 1, "linear")),
                       input_dim=3, output_dim=1)
    assert parameter_count(lstm) == 4 * (3 * 5 + 25 + 5) + (5 + 1)
    emb = NetworkSpec((LayerSpec("embedding", 4, vocab_size=11),
                       LayerSpec("dense", 4, "linear")),
                      input_dim=4, output_dim=4)
    assert parameter_count(emb) == 44 + (16 + 4)


def test_init_deterministic_and_biases_zero():
    spec = dense_spec()
    m1 = init_network(spec, 42)
    m2 = init_network(spec, 42)
    assert np.array_equal(m1.params, m2.params)
    assert not np.array_equal(m1.params, init_network(spec, 43).params)
    views = m1.layer_params()
    assert np.all(views[0]["b"] == 0) and np.all(views[1]["b"] == 0)


def test_forward_zero_weights_linear_is_zero():
    spec = NetworkSpec((LayerSpec("gru", 3, "tanh"),
                        LayerSpec("dense", 2, "linear")),
                       input_dim=2, output_dim=2)
    model = init_network(spec, 0)
    model.params[:] = 0.0
    out = forward(model, np.ones((4, 2)))
    assert np.array_equal(out, np.zeros(2))


def test_gru_single_unit_matches_hand_arithmetic():
    # One GRU unit, one step, weights set by hand; gate order is z, r, c.
    spec = NetworkSpec((LayerSpec("gru", 1, "tanh"),
                        LayerSpec("dense", 1, "linear")),
                       input_dim=1, output_dim=1)
    model = init_network(spec, 0)
    gru, dense = model.layer_params()
    gru["W"][0, :] = [0.5, -0.3, 0.8]   # W_z, W_r, W_c
    gru["U"][0, :] = [0.2, 0.4, -0.6]   # U_z, U_r, U_c (h0 = 0, unused)
    gru["b"][:] = [0.1, -0.2, 0.05]
    dense["W"][0, 0] = 2.0
    dense["b"][0] = 0.25

    x = 0.7
    z = 1 / (1 + math.exp(-(0.5 * x + 0.1)))
    c = math.tanh(0.8 * x + 0.05)  # r gates h0=0, so r drops out
    h = (1 - z) * 0.0 + z * c
    expected = 2.0 * h + 0.25
    out = forward(model, np.array([[x]]))
    assert out[0] == pytest.approx(expected, rel=1e-12)


def test_lstm_single_unit_matches_hand_arithmetic():
    spec = NetworkSpec((LayerSpec("lstm", 1, "tanh"),
                        LayerSpec("dense", 1, "linear")),
                       input_dim=1, output_dim=1)
    model = init_network(spec, 0)
    lstm, dense = model.layer_params()
    lstm["W"][0, :] = [0.5, -0.4, 0.9, 0.3]  # i, f, g, o
    lstm["b"][:] = [0.1, 0.2, -0.1, 0.0]
    dense["W"][0, 0] = 1.0

    x = -0.6
    sig = lambda v: 1 / (1 + math.exp(-v))
    i = sig(0.5 * x + 0.1)
    g = math.tanh(0.9 * x - 0.1)
    o = sig(0.3 * x)
    c = i * g  # f gates c0 = 0
    h = o * math.tanh(c)
    out = forward(model, np.array([[x]]))
    assert out[0] == pytest.approx(h, rel=1e-12)


def test_spec_validation_errors():
    with pytest.raises(NetworkSpecError):
        LayerSpec("conv", 3)
    with pytest.raises(NetworkSpecError):
        LayerSpec("dense", 0)
    with pytest.raises(NetworkSpecError):
        LayerSpec("embedding", 3)  # no vocab
    with pytest.raises(NetworkSpecError):
        NetworkSpec((LayerSpec("dense", 3, "linear"),
                     LayerSpec("gru", 2)), input_dim=2, output_dim=2)
    with pytest.raises(NetworkSpecError):
        NetworkSpec((LayerSpec("dense", 3, "linear"),),
                    input_dim=2, output_dim=5)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradient_checks_all_layer_kinds(seed):
    rng = np.random.default_rng(seed + 100)
    target = np.array([0.37, -0.61])
    window = rng.random((5, 4))

    dense = init_network(dense_spec(4, 2), seed)
    assert gradient_check(dense, (window, target)) < 1e-6

    gru = init_network(NetworkSpec(
        (LayerSpec("gru", 5, "tanh"), LayerSpec("dense", 2, "linear")),
        input_dim=4, output_dim=2), seed)
    assert gradient_check(gru, (window, target)) < 1e-4

    lstm = init_network(NetworkSpec(
        (LayerSpec("lstm", 5, "selu"), LayerSpec("dense", 2, "linear")),
        input_dim=4, output_dim=2), seed)
    assert gradient_check(lstm, (window, target)) < 1e-4

    emb = init_network(NetworkSpec(
        (LayerSpec("embedding", 3, vocab_size=6),
         LayerSpec("gru", 4, "tanh"), LayerSpec("dense", 2, "linear")),
        input_dim=3, output_dim=2), seed)
    ids = np.array([0, 2, 5, 1])
    assert gradient_check(emb, (ids, target)) < 1e-4


def test_gradient_check_dead_unit_defined():
    model = init_network(dense_spec(), 0)
    model.params[:] = 0.0  # every gradient beyond the last layer dies
    window = np.ones((2, 3))
    err = gradient_check(model, (window, np.array([0.5, 0.5])))
    assert math.isfinite(err)
    assert err < 1e-4


def test_gradient_check_epsilon_bounds():
    model = init_network(dense_spec(), 0)
    with pytest.raises(ValueError):
        gradient_check(model, (np.ones((2, 3)), np.zeros(2)), epsilon=1e-2)


def test_overfit_single_sample():
    spec = NetworkSpec((LayerSpec("gru", 8, "tanh"),
                        LayerSpec("dense", 1, "linear")),
                       input_dim=2, output_dim=1)
    model = init_network(spec, 5)
    window = np.random.default_rng(3).random((5, 2))
    pairs = [(window, np.array([0.3]))] * 20
    cfg = TrainConfig(epochs=200, batch_size=2, patience=200, seed=0)
    trained = train(model, pairs, cfg, validation=pairs[:2])
    assert trained.train_history["train"][-1] < 0.01


def test_early_stopping_patience_one():
    spec = dense_spec()
    model = init_network(spec, 1)
    rng = np.random.default_rng(0)
    pairs = [(rng.random((2, 3)), rng.random(2)) for _ in range(8)]
    # Constant validation loss: all-zero weights and targets equal outputs.
    val = [(np.zeros((2, 3)), np.zeros(2))]
    cfg = TrainConfig(epochs=50, batch_size=4, patience=1, seed=0,
                      learning_rate=1e-9)
    trained = train(model, pairs, cfg, validation=val)
    assert len(trained.train_history["val"]) == 2


def test_training_determinism():
    spec = dense_spec()
    rng = np.random.default_rng(1)
    pairs = [(rng.random((2, 3)), rng.random(2)) for _ in range(10)]
    cfg = TrainConfig(epochs=10, batch_size=4, patience=10, seed=7)
    t1 = train(init_network(spec, 2), pairs, cfg, validation=pairs[:2])
    t2 = train(init_network(spec, 2), pairs, cfg, validation=pairs[:2])
    assert np.array_equal(t1.params, t2.params)


def test_convex_toy_loss_decreases():
    spec = NetworkSpec((LayerSpec("dense", 1, "linear"),),
                       input_dim=2, output_dim=1)
    model = init_network(spec, 3)
    rng = np.random.default_rng(5)
    X = rng.random((64, 1, 2))
    Y = (X[:, 0, :1] * 2.0 + 0.5)
    cfg = TrainConfig(epochs=40, batch_size=8, patience=40, seed=0)
    trained = train(model, (X, Y), cfg)
    assert trained.train_history["train"][-1] <= trained.train_history["train"][0]


def test_nan_loss_raises_with_location():
    model = init_network(dense_spec(), 0)
    X = np.full((4, 2, 3), np.nan)
    Y = np.zeros((4, 2))
    with pytest.raises(TrainingError, match="epoch 0, batch 0"):
        train(model, (X, Y), TrainConfig(epochs=2, patience=1, seed=0))


def test_serialization_round_trip(tmp_path):
    spec = NetworkSpec((LayerSpec("lstm", 4, "selu", dropout_rate=0.1),
                        LayerSpec("dense", 2, "linear")),
                       input_dim=3, output_dim=2)
    model = init_network(spec, 9)
    window = np.random.default_rng(2).random((6, 3))
    before = forward(model, window)
    path = tmp_path / "net.bin"
    save_model(model, path, meta={"note": "test"})
    loaded, meta = load_model(path)
    assert meta == {"note": "test"}
    after = forward(loaded, window)
    assert np.array_equal(before, after)


def test_dropout_changes_training_but_not_inference():
    spec = NetworkSpec((LayerSpec("gru", 6, "tanh", dropout_rate=0.5),
                        LayerSpec("dense", 1, "linear")),
                       input_dim=2, output_dim=1)
    model = init_network(spec, 0)
    window = np.ones((3, 2))
    a = forward(model, window)
    b = forward(model, window)
    assert np.array_equal(a, b)
