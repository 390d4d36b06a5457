import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from topicfilter.classifier import (
    TanhUnitClassifier,
    TopicFilter,
    TrainConfig,
    encode,
    encode_documents,
    format_filter,
    load_filter,
    save_filter,
    tanh_unit,
    train_filter,
    train_unit,
    unit_gradient,
    unit_loss,
)
from topicfilter.errors import (
    ConfigError,
    DivergenceError,
    EmptyCollectionError,
    ParseError,
    SingleClassError,
)
from topicfilter.validation import add_bias_column

from oracles import finite_difference_gradient

TOY_FEATURES = np.array([[1.0, 1.0], [1.0, -1.0]])
TOY_TARGETS = np.array([1.0, -1.0])


class TestEncode:
    def test_absent_term_is_minus_one(self, doc):
        x = encode(doc("d", "alpha alpha beta"), ["gamma"])
        assert x.tolist() == [1.0, -1.0]

    def test_present_term_scaled_by_log_length(self, doc):
        d = doc("d", " ".join(["filler"] * 98 + ["oil", "oil"]))
        assert d.length == 100
        x = encode(d, ["oil"])
        assert x[1] == pytest.approx(2.0 / math.log(100.0), abs=1e-12)
        assert x[1] == pytest.approx(0.43429448190325176)

    def test_empty_document_encodes_all_absent(self, doc):
        x = encode(doc("d", ""), ["a", "b", "c"])
        assert x.tolist() == [1.0, -1.0, -1.0, -1.0]

    def test_short_document_length_clamped(self, doc):
        x = encode(doc("d", "oil"), ["oil"])
        assert x[1] == pytest.approx(1.0 / math.log(2.0))

    def test_monotone_in_tf(self, doc):
        low = encode(doc("d", "oil " + "x " * 40), ["oil"])[1]
        high = encode(doc("d", "oil oil " + "x " * 39), ["oil"])[1]
        assert -1.0 < low < high

    def test_batch_matches_single(self, doc):
        docs = [doc("a", "oil gas"), doc("b", "water")]
        vocab = ["oil", "water"]
        batch = encode_documents(docs, vocab)
        for row, d in zip(batch, docs):
            assert row.tolist() == encode(d, vocab)[1:].tolist()

    def test_empty_vocabulary_rejected(self, doc):
        with pytest.raises(ValueError):
            encode(doc("d", "x"), [])


class TestTanhUnit:
    def test_zero_weights_output_zero(self):
        assert tanh_unit(np.zeros(3), np.array([1.0, 5.0, -2.0])) == 0.0

    def test_orthogonal_input(self):
        assert tanh_unit(np.array([0.0, 1.0]), np.array([1.0, 0.0])) == 0.0

    def test_unit_input(self):
        assert tanh_unit(np.array([0.0, 1.0]), np.array([1.0, 1.0])) == pytest.approx(
            0.7615941559557649
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tanh_unit(np.zeros(3), np.zeros(4))

    def test_strictly_inside_unit_interval(self):
        huge = tanh_unit(np.array([1000.0]), np.array([[1.0], [-1.0]]))
        assert np.all(np.abs(huge) < 1.0)


class TestLoss:
    def test_zero_weights_unit_target(self):
        assert unit_loss(np.zeros(1), np.array([[1.0]]), np.array([1.0])) == 1.0

    def test_balanced_targets(self):
        f = np.ones((4, 2))
        t = np.array([1.0, -1.0, 1.0, -1.0])
        assert unit_loss(np.zeros(2), f, t) == 1.0

    def test_decay_term(self):
        w = np.array([0.0, 3.0])
        f = np.array([[1.0, 0.0]])
        t = np.array([1.0])
        plain = unit_loss(w, f, t, weight_decay=0.0)
        assert unit_loss(w, f, t, weight_decay=2.0) == pytest.approx(plain + 9.0)

    def test_bias_excluded_from_decay(self):
        w = np.array([5.0, 0.0])
        f = np.array([[0.0, 1.0]])
        t = np.array([1.0])
        assert unit_loss(w, f, t, weight_decay=2.0) == unit_loss(w, f, t, weight_decay=0.0)

    def test_empty_batch(self):
        with pytest.raises(EmptyCollectionError):
            unit_loss(np.zeros(1), np.empty((0, 1)), np.empty(0))


class TestGradient:
    def test_single_example_at_zero(self):
        g = unit_gradient(np.zeros(1), np.array([[1.0]]), np.array([1.0]))
        assert g.tolist() == [-2.0]

    def test_zero_residual_zero_gradient(self, rng):
        w = rng.normal(size=4)
        f = rng.normal(size=(6, 4))
        t = np.tanh(f @ w)
        g = unit_gradient(w, f, t, weight_decay=0.0)
        assert np.allclose(g, 0.0, atol=1e-14)

    @pytest.mark.parametrize("decay", [0.0, 1.0])
    def test_matches_finite_differences(self, rng, decay):
        for _ in range(10):
            n = int(rng.integers(2, 8))
            d = int(rng.integers(2, 6))
            f = rng.uniform(-2.0, 2.0, size=(n, d))
            t = rng.choice([-1.0, 1.0], size=n)
            w = rng.uniform(-0.5, 0.5, size=d)
            analytic = unit_gradient(w, f, t, decay)
            numeric = finite_difference_gradient(
                lambda v: unit_loss(v, f, t, decay), w, h=1e-6
            )
            scale = np.maximum(np.abs(analytic), np.abs(numeric))
            assert np.all(np.abs(analytic - numeric) <= 1e-6 * np.maximum(scale, 1e-6))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            unit_gradient(np.zeros(2), np.ones((3, 4)), np.ones(3))


class TestTrainUnit:
    def test_separable_toy_signs(self):
        w, _ = train_unit(TOY_FEATURES, TOY_TARGETS, TrainConfig(learning_rate=0.1, max_epochs=20))
        outputs = np.tanh(TOY_FEATURES @ w)
        assert outputs[0] > 0 > outputs[1]

    def test_zero_epochs(self):
        w, trajectory = train_unit(TOY_FEATURES, TOY_TARGETS, TrainConfig(max_epochs=0))
        assert w.tolist() == [0.0, 0.0]
        assert trajectory == []

    def test_loss_trajectory_non_increasing(self):
        _, trajectory = train_unit(
            TOY_FEATURES, TOY_TARGETS, TrainConfig(learning_rate=1e-3, max_epochs=50)
        )
        assert len(trajectory) == 50
        assert all(b <= a for a, b in zip(trajectory, trajectory[1:]))

    def test_huge_decay_shrinks_weights(self):
        # lr * decay must stay below 1 for the decay-dominated fixed point
        w, _ = train_unit(
            TOY_FEATURES,
            TOY_TARGETS,
            TrainConfig(learning_rate=1e-7, max_epochs=100, weight_decay=1e6),
        )
        assert np.all(np.abs(w[1:]) < 1e-2)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            train_unit(TOY_FEATURES, np.array([1.0, 1.0]), TrainConfig())

    def test_divergence_names_epoch(self):
        config = TrainConfig(learning_rate=1e3, max_epochs=500, weight_decay=1e3)
        with pytest.raises(DivergenceError) as err:
            train_unit(TOY_FEATURES, TOY_TARGETS, config)
        assert "epoch" in str(err.value)

    def test_deterministic_given_seed(self):
        config = TrainConfig(learning_rate=0.05, max_epochs=30, init_scale=0.5, seed=99)
        w1, t1 = train_unit(TOY_FEATURES, TOY_TARGETS, config)
        w2, t2 = train_unit(TOY_FEATURES, TOY_TARGETS, config)
        assert np.array_equal(w1, w2)
        assert t1 == t2

    def test_decay_reduces_weight_norm(self, rng):
        for _ in range(5):
            n = int(rng.integers(6, 20))
            d = int(rng.integers(2, 5))
            f = add_bias_column(rng.uniform(-1.0, 1.0, size=(n, d)))
            t = rng.choice([-1.0, 1.0], size=n)
            if t.min() == t.max():
                continue
            small, _ = train_unit(f, t, TrainConfig(learning_rate=0.01, max_epochs=60, weight_decay=0.01))
            large, _ = train_unit(f, t, TrainConfig(learning_rate=0.01, max_epochs=60, weight_decay=1.0))
            assert large[1:] @ large[1:] <= small[1:] @ small[1:] + 1e-12

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ConfigError):
            TrainConfig(weight_decay=-1.0)
        with pytest.raises(ConfigError):
            TrainConfig(max_epochs=-1)


class TestTanhUnitClassifier:
    def test_fit_predict_separable(self):
        X = np.array([[1.0], [-1.0], [0.8], [-0.7]])
        y = np.array([1.0, -1.0, 1.0, -1.0])
        clf = TanhUnitClassifier(learning_rate=0.1, max_epochs=50).fit(X, y)
        assert clf.predict(X).tolist() == y.tolist()
        scores = clf.decision_function(X)
        assert np.all(np.abs(scores) < 1.0)

    def test_weights_layout(self):
        clf = TanhUnitClassifier(learning_rate=0.1, max_epochs=5).fit(
            np.array([[1.0], [-1.0]]), np.array([1.0, -1.0])
        )
        assert clf.weights_.shape == (2,)
        assert clf.n_features_in_ == 1
        assert clf.intercept_ == clf.weights_[0]
        assert clf.coef_.tolist() == [clf.weights_[1]]
        assert len(clf.loss_trajectory_) == 5

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            TanhUnitClassifier().predict(np.zeros((1, 1)))

    def test_clone(self):
        clf = TanhUnitClassifier(learning_rate=0.5, max_epochs=7, weight_decay=0.1)
        assert clone(clf).get_params() == clf.get_params()

    def test_width_checked(self):
        clf = TanhUnitClassifier(max_epochs=1).fit(np.array([[1.0], [-1.0]]), np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            clf.decision_function(np.zeros((2, 3)))


class TestTopicFilter:
    def build(self, doc):
        docs = [
            (doc("r1", "fusion fuel and more words here"), 1),
            (doc("r2", "fusion fusion energy text"), 1),
            (doc("n1", "stock market report"), -1),
            (doc("n2", "weather tomorrow rain"), -1),
        ]
        return train_filter(
            docs,
            ["fusion", "fuel", "energy"],
            TrainConfig(learning_rate=0.1, max_epochs=30),
            topic_id=375,
        )

    def test_training_separates(self, doc):
        model = self.build(doc)
        assert model.score(doc("q1", "fusion fuel breakthrough")) > model.score(
            doc("q2", "stock market gossip")
        )

    def test_score_documents_matches_single(self, doc):
        model = self.build(doc)
        docs = [doc("a", "fusion energy"), doc("b", "nothing relevant")]
        batch = model.score_documents(docs)
        assert batch.tolist() == [model.score(d) for d in docs]

    def test_weight_length_validation(self):
        with pytest.raises(ValueError):
            TopicFilter(vocabulary=("a",), weights=np.zeros(3))

    def test_save_load_round_trip_exact(self, doc, tmp_path):
        model = self.build(doc)
        path = tmp_path / "model.txt"
        save_filter(model, path)
        again = load_filter(path)
        assert again.vocabulary == model.vocabulary
        assert np.array_equal(again.weights, model.weights)
        assert again.config == model.config
        assert again.loss_trajectory == model.loss_trajectory
        assert again.topic_id == model.topic_id

    def test_serialization_has_one_weight_per_line(self, doc):
        model = self.build(doc)
        text = format_filter(model)
        tail = text.strip().splitlines()
        marker = tail.index("weights")
        assert len(tail) - marker - 1 == len(model.weights)

    def test_load_rejects_malformed(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text("topic 1\nterms a\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_filter(path)
