"""Estimator-contract tests for the sklearn wrappers."""

import dataclasses

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from sentpair.config import Config
from sentpair.estimators import (
    EntailmentClassifier,
    RelatednessRegressor,
    check_pair_array,
)

SMALL = dict(
    d=4,
    layers=2,
    word_dim=6,
    char_l0=3,
    char_width=2,
    char_frames=4,
    char_hidden=3,
    char_dim=4,
    stage1_frames=5,
    stage2_frames=4,
    batch_size=4,
    epochs=2,
    seed=11,
)

PAIRS = [
    ("a dog runs fast", "a cat sleeps now"),
    ("kids play ball", "children play a ball"),
    ("a man eats", "nobody eats food"),
    ("birds fly high", "planes land here"),
]
SCORES = [3.5, 4.8, 1.4, 2.2]
LABELS = ["NEUTRAL", "ENTAILMENT", "CONTRADICTION", "NEUTRAL"]


class TestPairValidation:
    def test_accepts_list_of_tuples(self):
        assert check_pair_array(PAIRS) == PAIRS

    def test_accepts_object_array(self):
        arr = np.array(PAIRS, dtype=object)
        assert check_pair_array(arr) == PAIRS

    def test_rejects_bare_string(self):
        with pytest.raises(ValueError, match="single string"):
            check_pair_array("a dog runs")

    def test_rejects_wrong_width(self):
        with pytest.raises(ValueError, match="row 1"):
            check_pair_array([("a", "b"), ("a", "b", "c")])

    def test_rejects_non_string_cell(self):
        with pytest.raises(ValueError, match="strings"):
            check_pair_array([("a", 3)])

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="at least one"):
            check_pair_array([])


class TestSklearnProtocol:
    def test_param_names_match_config_fields(self):
        # estimators expose every training knob except the task selector
        config_fields = {f.name for f in dataclasses.fields(Config)} - {"task"}
        assert set(RelatednessRegressor().get_params()) == config_fields
        assert set(EntailmentClassifier().get_params()) == config_fields

    def test_get_set_params_round_trip(self):
        est = RelatednessRegressor(d=7, epochs=3)
        assert est.get_params()["d"] == 7
        est.set_params(d=9)
        assert est.d == 9

    def test_clone_keeps_params_drops_state(self):
        est = EntailmentClassifier(**SMALL)
        est.fit(PAIRS, LABELS)
        copy = clone(est)
        assert copy.get_params() == est.get_params()
        assert not hasattr(copy, "model_")

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            RelatednessRegressor().predict(PAIRS)

    def test_fit_returns_self(self):
        est = RelatednessRegressor(**SMALL)
        assert est.fit(PAIRS, SCORES) is est


class TestRelatednessRegressor:
    def test_fit_predict_shapes_and_range(self):
        est = RelatednessRegressor(**SMALL)
        est.fit(PAIRS, SCORES)
        pred = est.predict(PAIRS)
        assert pred.shape == (4,)
        assert np.all(pred >= 1.0) and np.all(pred <= 5.0)

    def test_same_seed_same_predictions(self):
        a = RelatednessRegressor(**SMALL).fit(PAIRS, SCORES).predict(PAIRS)
        b = RelatednessRegressor(**SMALL).fit(PAIRS, SCORES).predict(PAIRS)
        assert np.array_equal(a, b)

    def test_score_is_r2(self):
        est = RelatednessRegressor(**SMALL)
        est.fit(PAIRS, SCORES)
        assert isinstance(est.score(PAIRS, SCORES), float)

    def test_rejects_out_of_range_y(self):
        est = RelatednessRegressor(**SMALL)
        with pytest.raises(ValueError, match="outside"):
            est.fit(PAIRS, [3.0, 4.0, 6.0, 2.0])

    def test_rejects_length_mismatch(self):
        est = RelatednessRegressor(**SMALL)
        with pytest.raises(ValueError, match="1-d array"):
            est.fit(PAIRS, [3.0, 4.0])

    def test_predict_rejects_empty_sentence(self):
        est = RelatednessRegressor(**SMALL)
        est.fit(PAIRS, SCORES)
        with pytest.raises(ValueError, match="no tokens"):
            est.predict([("...", "a dog runs")])


class TestEntailmentClassifier:
    def test_fit_predict_labels(self):
        est = EntailmentClassifier(**SMALL)
        est.fit(PAIRS, LABELS)
        pred = est.predict(PAIRS)
        assert pred.shape == (4,)
        for label in pred:
            assert label in ("ENTAILMENT", "CONTRADICTION", "NEUTRAL")

    def test_classes_attribute(self):
        est = EntailmentClassifier(**SMALL)
        est.fit(PAIRS, LABELS)
        assert list(est.classes_) == ["CONTRADICTION", "ENTAILMENT", "NEUTRAL"]

    def test_score_is_accuracy(self):
        est = EntailmentClassifier(**SMALL)
        est.fit(PAIRS, LABELS)
        acc = est.score(PAIRS, LABELS)
        assert 0.0 <= acc <= 1.0

    def test_rejects_unknown_label(self):
        est = EntailmentClassifier(**SMALL)
        with pytest.raises(ValueError, match="y\\[1\\]"):
            est.fit(PAIRS, ["NEUTRAL", "MAYBE", "NEUTRAL", "NEUTRAL"])

    def test_same_seed_same_predictions(self):
        a = EntailmentClassifier(**SMALL).fit(PAIRS, LABELS).predict(PAIRS)
        b = EntailmentClassifier(**SMALL).fit(PAIRS, LABELS).predict(PAIRS)
        assert np.array_equal(a, b)
