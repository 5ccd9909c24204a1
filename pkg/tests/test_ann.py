import numpy as np
import pytest

from concrete_mm import ann, data


def neuron_by_neuron(params, x):
    """Straight-line evaluation of each neuron: O_lk = V(b_lk + sum_i W_{l-1,i,k} O_{l-1,i})."""
    prev = list(x)
    n_layers = len(params.weights)
    for l in range(n_layers):
        W, b = params.weights[l], params.biases[l]
        out = []
        for k in range(W.shape[1]):
            a = b[k]
            for i in range(W.shape[0]):
                a += W[i, k] * prev[i]
            out.append(a if l == n_layers - 1 else max(a, 0.0))
        prev = out
    return prev[0]


def numeric_grads(params, Z, y, l2, h=1e-5):
    gW, gb = [], []
    for group, out in ((params.weights, gW), (params.biases, gb)):
        for T in group:
            G = np.zeros_like(T)
            for idx in np.ndindex(T.shape):
                old = T[idx]
                T[idx] = old + h
                up = ann.ann_loss(params, Z, y, l2)
                T[idx] = old - h
                down = ann.ann_loss(params, Z, y, l2)
                T[idx] = old
                G[idx] = (up - down) / (2 * h)
            out.append(G)
    return gW, gb


def max_rel_error(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-7)))


def test_architecture():
    assert ann.ARCHITECTURE == (8, 64, 64, 32, 16, 16, 1)
    p = ann.ann_init(seed=0)
    assert p.widths == ann.ARCHITECTURE
    assert [W.shape for W in p.weights][0] == (8, 64)


def test_init_deterministic_and_seed_dependent():
    a, b, c = ann.ann_init(seed=1), ann.ann_init(seed=1), ann.ann_init(seed=2)
    for Wa, Wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(Wa, Wb)
    assert not np.array_equal(a.weights[0], c.weights[0])


def test_init_biases_zero_and_variance():
    p = ann.ann_init(seed=0)
    assert all(np.all(b == 0) for b in p.biases)
    # uniform(-a, a) with a = sqrt(6 / fan_in) has variance 2 / fan_in
    W = p.weights[1]
    assert W.var() == pytest.approx(2 / 64, rel=0.1)
    assert np.abs(W).max() <= np.sqrt(6 / 64)


def test_zero_network_outputs_zero():
    p = ann.ann_init(seed=0)
    for T in p.weights + p.biases:
        T[...] = 0
    assert ann.ann_forward(p, np.ones(8)) == 0.0


def test_output_bias_passes_through():
    p = ann.ann_init(seed=0)
    for T in p.weights + p.biases:
        T[...] = 0
    p.biases[-1][0] = 3.25
    np.testing.assert_array_equal(ann.ann_forward(p, np.random.default_rng(0).normal(size=(5, 8))), 3.25)


def test_forward_matches_neuron_oracle():
    rng = np.random.default_rng(4)
    p = ann.ann_init((8, 6, 5, 1), seed=4)
    for b in p.biases:
        b[...] = rng.normal(scale=0.3, size=b.shape)
    for x in rng.normal(size=(5, 8)):
        assert ann.ann_forward(p, x) == pytest.approx(neuron_by_neuron(p, x), abs=1e-12)


def test_forward_full_architecture_matches_oracle():
    p = ann.ann_init(seed=9)
    x = np.random.default_rng(9).normal(size=8)
    assert ann.ann_forward(p, x) == pytest.approx(neuron_by_neuron(p, x), abs=1e-12)


def test_forward_rejects_bad_input():
    p = ann.ann_init(seed=0)
    with pytest.raises(ValueError):
        ann.ann_forward(p, np.full(8, np.nan))
    with pytest.raises(ValueError):
        ann.ann_forward(p, np.ones(7))


def test_piecewise_linear_along_a_line():
    p = ann.ann_init(seed=5)
    rng = np.random.default_rng(5)
    x0, d = rng.normal(size=8), rng.normal(size=8)
    ts = np.array([0.0, 5e-4, 1e-3])
    Z = x0 + ts[:, None] * d
    patterns = [tuple(np.concatenate([(a > 0).ravel() for a in ann._forward(p, z[None])[1:-1]])) for z in Z]
    assert len(set(patterns)) == 1, "probes crossed an activation boundary"
    f = ann.ann_forward(p, Z)
    assert f[1] == pytest.approx((f[0] + f[2]) / 2, abs=1e-10)


def test_loss_values():
    p = ann.ann_init(seed=0)
    for T in p.weights + p.biases:
        T[...] = 0
    assert ann.ann_loss(p, np.zeros((1, 8)), [2.0], l2=0.0) == 4.0
    # perfect predictor with gamma = 0
    p.biases[-1][0] = 2.0
    assert ann.ann_loss(p, np.zeros((3, 8)), [2.0, 2.0, 2.0], l2=0.0) == 0.0


def test_loss_penalty_counts_weights_only():
    p = ann.ann_init((8, 4, 1), seed=1)
    p.biases[0][...] = 7.0  # biases never enter the penalty
    Z = np.zeros((2, 8))
    y = ann.ann_forward(p, Z)
    penalty = sum(float(np.sum(W**2)) for W in p.weights)
    assert ann.ann_loss(p, Z, y, l2=0.5) == pytest.approx(0.5 * penalty, rel=1e-15)


def test_empty_batch():
    with pytest.raises(ValueError):
        ann.ann_loss(ann.ann_init(seed=0), np.zeros((0, 8)), [], 0.0)


def test_gradient_check_small_network():
    rng = np.random.default_rng(21)
    p = ann.ann_init((8, 7, 5, 1), seed=21)
    for b in p.biases:
        b[...] = rng.normal(scale=0.2, size=b.shape)
    Z = rng.normal(size=(3, 8))
    y = rng.normal(10, 3, size=3)
    _, gW, gb = ann.ann_gradients(p, Z, y, l2=1e-2)
    nW, nb = numeric_grads(p, Z, y, l2=1e-2)
    for a, n in zip(gW + gb, nW + nb):
        assert max_rel_error(a, n) < 1e-4


def test_gradient_loss_matches_ann_loss():
    p = ann.ann_init((8, 4, 1), seed=2)
    Z = np.random.default_rng(2).normal(size=(4, 8))
    y = np.arange(4.0)
    loss, _, _ = ann.ann_gradients(p, Z, y, 1e-4)
    assert loss == ann.ann_loss(p, Z, y, 1e-4)


def _small_train():
    ds = data.load_default()
    return data.split(ds, 64 / len(ds), seed=0).train


def test_training_is_deterministic():
    train = _small_train()
    sc = data.fit_scaler(train)
    cfg = ann.TrainConfig(epochs=5, seed=3)
    p1, h1 = ann.ann_train(train, sc, cfg)
    p2, h2 = ann.ann_train(train, sc, cfg)
    np.testing.assert_array_equal(h1, h2)
    for a, b in zip(p1.weights, p2.weights):
        np.testing.assert_array_equal(a, b)
    assert len(h1) == 5


def test_divergence_is_reported():
    train = _small_train()
    sc = data.fit_scaler(train)
    with pytest.raises(ann.DivergenceError, match="diverged"):
        ann.ann_train(train, sc, ann.TrainConfig(epochs=50, learning_rate=10.0))


def test_real_training_reduces_loss(trained):
    history = trained.model.models[0].history
    assert len(history) == 1000
    assert history[-1] < history[0]


def test_parameters_round_trip():
    p = ann.ann_init(seed=3)
    q = ann.AnnParameters.from_dict(p.to_dict())
    x = np.random.default_rng(3).normal(size=(4, 8))
    np.testing.assert_array_equal(ann.ann_forward(p, x), ann.ann_forward(q, x))


def test_shape_validation():
    with pytest.raises(ValueError):
        ann.AnnParameters([np.zeros((8, 3)), np.zeros((4, 1))], [np.zeros(3), np.zeros(1)])
