"""Scikit-learn style estimators wrapping the pair model.

``RelatednessRegressor`` fits the graded-similarity head and predicts a real
score on the 1..5 scale; ``EntailmentClassifier`` fits the three-way label
head. Both take X as a sequence of (sentence_a, sentence_b) string pairs and
follow the usual conventions: bare ``__init__`` that only stores parameters,
``fit`` returns self, fitted state lives in trailing-underscore attributes,
``get_params``/``set_params``/``clone`` work out of the box.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from sentpair.config import Config
from sentpair.data import SCORE_MAX, SCORE_MIN, make_example
from sentpair.embeddings import tokenize
from sentpair.model import build_model
from sentpair.objectives import ENTAILMENT_LABELS
from sentpair.training import train


def check_pair_array(X) -> list[tuple[str, str]]:
    """Validate X as a non-empty sequence of (sentence_a, sentence_b) pairs.

    Accepts any iterable of length-2 rows of strings, including a 2-column
    object array. Returns a list of plain string tuples.
    """
    if isinstance(X, str):
        raise ValueError("X must be a sequence of sentence pairs, not a single string")
    pairs = []
    for i, row in enumerate(X):
        if isinstance(row, str) or not hasattr(row, "__len__"):
            raise ValueError(f"X row {i}: expected a (sentence_a, sentence_b) pair")
        if len(row) != 2:
            raise ValueError(f"X row {i}: expected 2 sentences, got {len(row)}")
        a, b = row[0], row[1]
        if not isinstance(a, str) or not isinstance(b, str):
            raise ValueError(f"X row {i}: both sentences must be strings")
        pairs.append((a, b))
    if not pairs:
        raise ValueError("X must hold at least one sentence pair")
    return pairs


class _PairEstimator(BaseEstimator):
    """Shared plumbing; subclasses pin the task and interpret y."""

    _task = ""

    def __init__(
        self,
        topology="I",
        stage1_per_plane=False,
        bidirectional=True,
        d=100,
        layers=2,
        word_dim=300,
        char_l0=16,
        char_width=3,
        char_frames=100,
        char_hidden=50,
        char_dim=100,
        stage1_frames=150,
        stage2_frames=150,
        learning_rate=0.05,
        batch_size=25,
        l2=1e-4,
        epochs=10,
        seed=1,
        adagrad_eps=1e-8,
        max_len=37,
        grad_clip=0.0,
        embeddings="",
    ):
        self.topology = topology
        self.stage1_per_plane = stage1_per_plane
        self.bidirectional = bidirectional
        self.d = d
        self.layers = layers
        self.word_dim = word_dim
        self.char_l0 = char_l0
        self.char_width = char_width
        self.char_frames = char_frames
        self.char_hidden = char_hidden
        self.char_dim = char_dim
        self.stage1_frames = stage1_frames
        self.stage2_frames = stage2_frames
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.l2 = l2
        self.epochs = epochs
        self.seed = seed
        self.adagrad_eps = adagrad_eps
        self.max_len = max_len
        self.grad_clip = grad_clip
        self.embeddings = embeddings

    def _build_config(self) -> Config:
        values = {name: getattr(self, name) for name in self.get_params()}
        return Config(task=self._task, **values)

    def _fit_examples(self, pairs, scores, labels):
        examples = [
            make_example(str(i), a, b, score, label)
            for i, ((a, b), score, label) in enumerate(zip(pairs, scores, labels))
        ]
        config = self._build_config()
        model = build_model(config, examples)
        train(model, examples, config)
        self.config_ = config
        self.model_ = model
        return self

    def _predict_tokens(self, X):
        check_is_fitted(self, "model_")
        pairs = check_pair_array(X)
        max_len = self.config_.max_len
        prepared = []
        for i, (a, b) in enumerate(pairs):
            tokens_a = tuple(tokenize(a))[:max_len]
            tokens_b = tuple(tokenize(b))[:max_len]
            if not tokens_a or not tokens_b:
                raise ValueError(f"X row {i}: sentence has no tokens")
            prepared.append((tokens_a, tokens_b))
        return prepared


class RelatednessRegressor(RegressorMixin, _PairEstimator):
    """Predicts a graded similarity score in [1, 5] for a sentence pair.

    With ``embeddings=""`` word vectors are drawn at random from the seed;
    point it at a pretrained vector file to reproduce reported numbers.
    """

    _task = "relatedness"

    def fit(self, X, y):
        pairs = check_pair_array(X)
        scores = np.asarray(y, dtype=float)
        if scores.ndim != 1 or len(scores) != len(pairs):
            raise ValueError(
                f"y must be a 1-d array of {len(pairs)} scores, got shape {scores.shape}"
            )
        for i, s in enumerate(scores):
            if not (SCORE_MIN <= s <= SCORE_MAX):
                raise ValueError(f"y[{i}] = {s} outside [{SCORE_MIN}, {SCORE_MAX}]")
        # the label field is inert for this task; any valid value works
        labels = [ENTAILMENT_LABELS[-1]] * len(pairs)
        return self._fit_examples(pairs, scores.tolist(), labels)

    def predict(self, X):
        prepared = self._predict_tokens(X)
        return np.array([self.model_.predict_score(a, b) for a, b in prepared])


class EntailmentClassifier(ClassifierMixin, _PairEstimator):
    """Predicts one of the three pair-relation labels for a sentence pair."""

    _task = "entailment"

    def fit(self, X, y):
        pairs = check_pair_array(X)
        labels = [str(v) for v in y]
        if len(labels) != len(pairs):
            raise ValueError(f"y must hold {len(pairs)} labels, got {len(labels)}")
        for i, label in enumerate(labels):
            if label not in ENTAILMENT_LABELS:
                raise ValueError(
                    f"y[{i}] = {label!r} is not one of {sorted(ENTAILMENT_LABELS)}"
                )
        self.classes_ = np.unique(labels)
        # the score field is inert for this task; any in-range value works
        scores = [float(SCORE_MIN)] * len(pairs)
        return self._fit_examples(pairs, scores, labels)

    def predict(self, X):
        prepared = self._predict_tokens(X)
        return np.array([self.model_.predict_label(a, b) for a, b in prepared])
