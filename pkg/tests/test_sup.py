import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcaod import (
    DataTable,
    TrainConfig,
    compute_bal,
    degree_matrix,
    fit_sup,
    loss,
    loss_gradient,
    predict_sup,
    score_unsup,
    train,
    weighted_score,
)
from fcaod.errors import DegenerateLabels, LengthMismatch, NonPositiveBal, NoOutliersInTrain
from fcaod.sup import guarded_sum
from oracles import finite_difference
from synthetic import planted_outliers


class TestWeightedScore:
    def test_example(self):
        assert weighted_score([0.2, 0.8], [1.0, 3.0]) == pytest.approx(0.65)

    def test_negative_weight_exceeds_one(self):
        assert weighted_score([1.0, 0.0], [2.0, -1.0]) == pytest.approx(2.0)

    def test_constant_weights_are_the_mean(self):
        rng = np.random.default_rng(0)
        rows = rng.random((200, 22))
        assert np.array_equal(weighted_score(rows, np.full(22, 0.37)), score_unsup(rows))

    def test_guard_keeps_sign(self):
        assert guarded_sum([1e-12, -1e-12], 1e-8) == 1e-8
        assert guarded_sum([-1e-9], 1e-8) == -1e-8
        assert guarded_sum([2.0, 1.0], 1e-8) == 3.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            weighted_score([0.1, 0.2], [1.0])

    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    @settings(max_examples=50, deadline=None)
    def test_scale_invariance(self, seed, c):
        rng = np.random.default_rng(seed)
        rows = rng.random((5, 4))
        w = rng.uniform(0.1, 1.0, 4)
        assert np.allclose(weighted_score(rows, c * w), weighted_score(rows, w))


class TestLoss:
    def test_perfect_swapped(self):
        assert loss([1.0, 0.0], [1, 0], bal=2.0, orientation="swapped") == 0.0

    def test_perfect_literal(self):
        assert loss([0.0, 1.0], [1, 0], bal=2.0) == 0.0

    def test_example(self):
        # 0.25**2 + 0.5**2 / 4
        assert loss([0.75, 0.5], [1, 0], bal=4.0, orientation="swapped") == pytest.approx(0.125)
        assert loss([0.5, 0.5], [1, 0], bal=1.0, orientation="literal") == pytest.approx(0.5)

    def test_orientations_mirror(self):
        s = np.array([0.1, 0.7, 0.4])
        y = np.array([1, 0, 0])
        assert loss(s, y, 3.0, "literal") == pytest.approx(loss(1 - s, y, 3.0, "swapped"))

    def test_bad_bal(self):
        with pytest.raises(NonPositiveBal):
            loss([0.5], [1], bal=0.0)


class TestBal:
    def test_small(self):
        assert compute_bal([0] * 9 + [1]) == 10.0

    def test_mammography_counts(self):
        n_out, n_in = int(0.8 * 260), int(0.8 * 10923)
        assert compute_bal([1] * n_out + [0] * n_in) == pytest.approx(43.0, abs=0.05)

    def test_no_outliers(self):
        with pytest.raises(NoOutliersInTrain):
            compute_bal([0, 0, 0])


class TestGradient:
    @pytest.mark.parametrize("orientation", ["literal", "swapped"])
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_finite_difference(self, seed, orientation):
        rng = np.random.default_rng(seed)
        n, T = 30, 7
        D = rng.random((n, T))
        y = (rng.random(n) < 0.3).astype(int)
        y[0] = 1
        w = rng.uniform(0.1, 1.0, T)
        bal = compute_bal(y)
        g = loss_gradient(D, w, y, bal, orientation=orientation)
        num = finite_difference(lambda v: loss(D @ v / v.sum(), y, bal, orientation), w)
        assert np.allclose(g, num, rtol=1e-5, atol=1e-8)

    def test_zero_at_constant_degrees(self):
        D = np.full((4, 3), 0.3)
        g = loss_gradient(D, np.array([1.0, 2.0, 3.0]), np.array([1, 0, 0, 0]), 4.0)
        assert np.allclose(g, 0.0)


class TestTrain:
    def setup_method(self):
        rng = np.random.default_rng(1)
        self.y = np.r_[np.ones(10), np.zeros(90)].astype(int)
        noise = rng.random((100, 3))
        signal = np.where(self.y == 1, 0.9, 0.1) + 0.05 * rng.random(100)
        self.D = np.column_stack([signal, noise])

    def test_zero_learning_rate_keeps_loss(self):
        _, trace = train(self.D, self.y, TrainConfig(epochs=20, learning_rate=0.0))
        assert np.all(trace == trace[0])

    def test_deterministic(self):
        cfg = TrainConfig(epochs=50, seed=3)
        w1, t1 = train(self.D, self.y, cfg)
        w2, t2 = train(self.D, self.y, cfg)
        assert np.array_equal(w1, w2) and np.array_equal(t1, t2)

    def test_informative_column_beats_uniform(self):
        cfg = TrainConfig(epochs=500, seed=0, loss_orientation="swapped")
        w, trace = train(self.D, self.y, cfg)
        bal = compute_bal(self.y)
        uniform = loss(score_unsup(self.D), self.y, bal, "swapped")
        learned = loss(weighted_score(self.D, w), self.y, bal, "swapped")
        assert learned < uniform
        assert trace[-1] < trace[0]

    def test_trace_length(self):
        _, trace = train(self.D, self.y, TrainConfig(epochs=7))
        assert trace.shape == (7,)

    def test_label_checks(self):
        with pytest.raises(NoOutliersInTrain):
            train(self.D, np.zeros(100, dtype=int))
        with pytest.raises(DegenerateLabels):
            train(self.D, np.ones(100, dtype=int))

    @pytest.mark.parametrize(
        "kwargs", [{"epochs": 0}, {"learning_rate": -1.0}, {"init_scale": 0.0}, {"loss_orientation": "up"}]
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


class TestFitSup:
    def test_population_is_training_inliers(self):
        t = planted_outliers(0, n_inliers=60, n_outliers=5)
        model = fit_sup(t, bins=5, gamma=0.5, config=TrainConfig(epochs=5))
        assert model.population_indices.tolist() == list(range(60))

    def test_outliers_do_not_count(self):
        # one inlier cell and one outlier cell; the outlier's closure is empty
        rows = np.array([[0.0]] * 4 + [[1.0]])
        t = DataTable(("a",), rows, np.array([0, 0, 0, 0, 1]))
        model = fit_sup(t, bins=2, alpha=1, include_full=False, gamma=0.5, config=TrainConfig(epochs=3))
        D = degree_matrix(model.unsup)
        assert D.closure_sizes[:, 0].tolist() == [4, 4, 4, 4, 0]

    def test_predict_matches_score(self):
        t = planted_outliers(3, n_inliers=80, n_outliers=6)
        model = fit_sup(t, bins=6, gamma=0.4, config=TrainConfig(epochs=20))
        a = predict_sup(model, model.binarize(t))
        assert np.array_equal(a, model.score(t))

    def test_requires_labels(self):
        t = DataTable(("a",), np.zeros((3, 1)))
        with pytest.raises(DegenerateLabels):
            fit_sup(t, bins=2)
