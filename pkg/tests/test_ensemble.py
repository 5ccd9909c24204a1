import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from concrete_mm import ensemble as en
import oracles


class Const:
    def __init__(self, value):
        self.value = value

    def predict(self, X):
        return np.full(len(np.atleast_2d(X)), float(self.value))


def random_instance(seed, n=50):
    rng = np.random.default_rng(seed)
    P = rng.normal(30, 10, size=(n, 3))
    y = P @ np.array([0.5, 0.3, 0.2]) + rng.normal(0, 3, size=n)
    return en.PredictionMatrix(P, y)


def test_constant_predictors_matrix():
    pm = en.build_prediction_matrix([Const(1), Const(2), Const(3)], np.zeros((4, 8)), np.zeros(4))
    np.testing.assert_array_equal(pm.P, [[1, 2, 3]] * 4)
    np.testing.assert_array_equal(pm.column_sums, [4, 8, 12])


def test_single_sample_matrix():
    pm = en.build_prediction_matrix([Const(1), Const(2), Const(3)], np.zeros(8), [5.0])
    assert pm.P.shape == (1, 3) and pm.target_sum == 5.0


def test_nonfinite_prediction_names_model_and_row():
    class Bad:
        def predict(self, X):
            out = np.zeros(len(X))
            out[2] = np.nan
            return out

    with pytest.raises(en.NonFinitePredictionError, match="model PR .* row 2"):
        en.build_prediction_matrix([Const(1), Const(2), Bad()], np.zeros((4, 8)), np.zeros(4), names=en.MODEL_NAMES)


def test_real_matrix_rows_match_individual_queries(trained):
    X = trained.split.train.X[:25]
    pm = en.build_prediction_matrix(trained.model.models, X, trained.split.train.y[:25])
    for m, model in enumerate(trained.model.models):
        for n in (0, 11, 24):
            assert pm.P[n, m] == pytest.approx(model.predict(X[n])[0], rel=1e-12)


class TestMseOnly:
    def test_exact_column(self):
        rng = np.random.default_rng(1)
        P = rng.normal(size=(20, 3))
        pm = en.PredictionMatrix(P, P[:, 0].copy())
        w = en.solve_weights_mse(pm)
        assert pm.mse(w.beta) <= 1e-16

    def test_orthonormal_columns(self):
        Q, _ = np.linalg.qr(np.random.default_rng(2).normal(size=(10, 3)))
        y = np.random.default_rng(3).normal(size=10)
        w = en.solve_weights_mse(en.PredictionMatrix(Q, y))
        np.testing.assert_allclose(w.beta, Q.T @ y, atol=1e-12)

    def test_matches_grid_search(self):
        P, y = oracles.qp_instance(4)
        pm = en.PredictionMatrix(P, y)
        w = en.solve_weights_mse(pm)
        best, best_val = oracles.grid_argmin_3d(P, y)
        np.testing.assert_allclose(w.beta, best, atol=oracles.GRID_STEP)
        assert pm.sse(w.beta) <= best_val + 1e-9

    def test_kkt_residual(self):
        pm = random_instance(5)
        beta = en.solve_weights_mse(pm).as_array()
        b = pm.P.T @ pm.y
        assert np.max(np.abs(pm.P.T @ pm.P @ beta - b)) < 1e-8 * np.max(np.abs(b))

    def test_collinear_predictions_rejected(self):
        P = np.tile(np.arange(1.0, 11.0)[:, None], (1, 3))
        with pytest.raises(en.DegenerateBlendError, match="collinear"):
            en.solve_weights_mse(en.PredictionMatrix(P, np.arange(10.0)))


class TestUnbiased:
    def test_exact_column(self):
        rng = np.random.default_rng(6)
        P = rng.normal(10, 2, size=(20, 3))
        pm = en.PredictionMatrix(P, P[:, 0].copy())
        w = en.solve_weights_unbiased(pm)
        np.testing.assert_allclose(w.beta, [1, 0, 0], atol=1e-9)
        assert pm.sse(w.beta) < 1e-16 * pm.y @ pm.y

    def test_matches_constrained_grid(self):
        P, y = oracles.qp_instance(7)
        pm = en.PredictionMatrix(P, y)
        w = en.solve_weights_unbiased(pm)
        best, best_val = oracles.plane_grid_argmin(P, y)
        np.testing.assert_allclose(w.beta, best, atol=oracles.GRID_STEP)
        assert pm.sse(w.beta) <= best_val + 1e-9

    def test_kkt_residual_and_constraint(self):
        pm = random_instance(8)
        w = en.solve_weights_unbiased(pm)
        assert abs(pm.column_sums @ w.as_array() - pm.target_sum) <= 1e-8 * abs(pm.target_sum)
        K, rhs = en.kkt_system(pm)
        # recover the multiplier from the stationarity rows, then check the full system
        beta = w.as_array()
        s = pm.column_sums
        lam = s @ (rhs[:3] - K[:3, :3] @ beta) / (s @ s)
        z = np.append(beta, lam)
        assert np.max(np.abs(K @ z - rhs)) < 1e-8 * np.max(np.abs(rhs))

    def test_zero_column_sums(self):
        P = np.array([[1.0, 2, 3], [-1, -2, -3]])
        with pytest.raises(en.DegenerateBlendError):
            en.solve_weights_unbiased(en.PredictionMatrix(P, [1.0, 2.0]))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(5, 60))
    def test_blend_sum_equals_target_sum(self, seed, n):
        pm = random_instance(seed, n)
        w = en.solve_weights_unbiased(pm)
        assert np.sum(pm.P @ w.as_array()) == pytest.approx(pm.target_sum, rel=1e-8)


@pytest.mark.parametrize("variant", en.VARIANTS)
def test_random_perturbations_never_improve(variant):
    pm = random_instance(9)
    beta = en.solve_weights(pm, variant).as_array()
    base = pm.sse(beta)
    rng = np.random.default_rng(10)
    s = pm.column_sums
    for _ in range(1000):
        d = rng.normal(size=3)
        if variant == "unbiased":
            d -= s * (s @ d) / (s @ s)
        d *= rng.uniform(0, 0.1) / np.linalg.norm(d)
        assert pm.sse(beta + d) >= base - 1e-9 * base


def test_unknown_variant():
    with pytest.raises(ValueError):
        en.solve_weights(random_instance(0), "median")
    with pytest.raises(ValueError):
        en.BlendWeights((1, 0, 0), "median")


def test_predict_mm_examples():
    models = [Const(3), Const(6), Const(9)]
    X = np.zeros((2, 8))
    np.testing.assert_allclose(en.predict_mm(models, en.BlendWeights((1 / 3, 1 / 3, 1 / 3), "mse_only"), X), 6.0)
    np.testing.assert_array_equal(en.predict_mm(models, en.BlendWeights((0, 0, 0), "mse_only"), X), 0.0)


def test_unit_weights_subsume_each_model(trained):
    X = trained.split.test.X
    for k, model in enumerate(trained.model.models):
        w = np.zeros(3)
        w[k] = 1
        np.testing.assert_array_equal(
            en.predict_mm(trained.model.models, en.BlendWeights(tuple(w), "mse_only"), X), model.predict(X)
        )


def test_mse_blend_dominates_single_models(trained):
    m = trained.metrics["train"]
    for name in en.MODEL_NAMES:
        assert m["MM[mse_only]"].mse <= m[name].mse + 1e-9


def test_unbiased_blend_mean_residual(trained):
    train = trained.split.train
    r = trained.model.predict(train.X, "unbiased") - train.y
    assert abs(r.mean()) <= 1e-8 * train.y.mean()


class TestEvaluate:
    def test_perfect(self):
        m = en.score([1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
        assert (m.mse, m.r2) == (0.0, 1.0)

    def test_mean_predictor(self):
        y = np.array([1.0, 2.0, 6.0])
        assert en.score(np.full(3, y.mean()), y).r2 == pytest.approx(0.0, abs=1e-15)

    def test_constant_offset(self):
        y = np.array([1.0, 5.0, 9.0])
        assert en.score(y + 2, y).mse == pytest.approx(4.0)

    def test_constant_targets(self):
        with pytest.raises(ValueError, match="constant"):
            en.score([1.0, 2.0], [3.0, 3.0])

    def test_evaluate_predictor(self):
        m = en.evaluate(Const(2.0), np.zeros((2, 8)), [1.0, 3.0])
        assert m.mse == 1.0 and m.r2 == 0.0

    @settings(max_examples=50, deadline=None)
    @given(y=arrays(float, 6, elements=st.floats(-100, 100)), shift=st.floats(-5, 5))
    def test_mse_of_shift(self, y, shift):
        if np.ptp(y) < 1e-6:
            return
        assert en.score(y + shift, y).mse == pytest.approx(shift**2, abs=1e-9)


def test_weights_round_trip():
    w = en.BlendWeights((0.25, 0.5, 0.25), "unbiased")
    assert en.BlendWeights.from_dict(w.to_dict()) == w
