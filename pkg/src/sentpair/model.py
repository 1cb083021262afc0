"""The full sentence-pair model.

Wires the pieces end to end: token lookup into a frozen word-vector table,
char-level vectors, the stacked bidirectional encoder, the matching planes,
the matching CNN, and one task head. Parameters live in an ordered registry
keyed by stable names; the word table is deliberately not in it (frozen, no
gradient, excluded from L2 and updates).
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from sentpair import charcnn, encoder, matchcnn, matching, objectives
from sentpair.autodiff import Tensor, constant
from sentpair.config import Config
from sentpair.data import PairExample, all_tokens, label_index
from sentpair.embeddings import (
    Vocabulary,
    WordEmbeddings,
    load_glove,
    random_embeddings,
)


class PairModel:
    def __init__(self, config: Config, vocab: Vocabulary, words: WordEmbeddings):
        config.validate()
        if words.dim != config.word_dim:
            raise ValueError(
                f"word table dimension {words.dim} does not match config word_dim {config.word_dim}"
            )
        # fail early if the layer count cannot feed the chosen topology
        x_dim = matchcnn.output_dim(
            config.layers, config.topology, config.stage1_frames, config.stage2_frames
        )
        self.config = config
        self.vocab = vocab
        self.words = words
        rng = np.random.RandomState(config.seed)
        row_width = 2 * config.d if config.bidirectional else config.d
        # initialization draws happen in a fixed order so a seed pins every weight
        self.char = None
        if config.bidirectional:
            self.char = charcnn.init_char_cnn(
                rng,
                l0=config.char_l0,
                width=config.char_width,
                frames=config.char_frames,
                hidden=config.char_hidden,
                out_dim=config.char_dim,
            )
        self.encoder = encoder.init_encoder(
            rng,
            word_dim=config.word_dim,
            char_dim=config.char_dim,
            d=config.d,
            n_layers=config.layers,
            bidirectional=config.bidirectional,
        )
        self.matching = matching.init_matching(rng, row_width)
        self.mcnn = matchcnn.init_match_cnn(
            rng,
            row_width=row_width,
            stage1_frames=config.stage1_frames,
            stage2_frames=config.stage2_frames,
            topology=config.topology,
            stage1_per_plane=config.stage1_per_plane,
        )
        if config.task == "relatedness":
            self.head = objectives.init_ordinal_head(rng, x_dim)
        else:
            self.head = objectives.init_class_head(rng, x_dim)
        self._word_matrix_cache: dict[tuple[str, ...], Tensor] = {}

    def parameters(self) -> "OrderedDict[str, Tensor]":
        """Stable name -> tensor registry of every trainable parameter."""
        registry: OrderedDict[str, Tensor] = OrderedDict()
        groups = []
        if self.char is not None:
            groups.append(self.char.named_tensors())
        groups.append(self.encoder.named_tensors())
        groups.append(self.matching.named_tensors())
        groups.append(self.mcnn.named_tensors())
        groups.append(self.head.named_tensors())
        for group in groups:
            for name, tensor in group:
                if name in registry:
                    raise ValueError(f"duplicate parameter name {name}")
                registry[name] = tensor
        return registry

    def trainable(self) -> list[Tensor]:
        return list(self.parameters().values())

    def _word_matrix(self, tokens: tuple[str, ...]) -> Tensor:
        """Frozen (T, word_dim) rows for the tokens; cached per sentence."""
        cached = self._word_matrix_cache.get(tokens)
        if cached is None:
            idx = [self.vocab.lookup(t) for t in tokens]
            cached = constant(self.words.tensor.data[idx])
            self._word_matrix_cache[tokens] = cached
        return cached

    def sentence_matrix(self, tokens) -> Tensor:
        tokens = tuple(tokens)
        if not tokens:
            raise ValueError("cannot encode an empty sentence")
        words = self._word_matrix(tokens)
        chars = None
        if self.char is not None:
            chars = charcnn.char_embed_tokens(list(tokens), self.char)
        return encoder.encode(words, chars, self.encoder)

    def pair_features(self, tokens_a, tokens_b) -> Tensor:
        m1 = self.sentence_matrix(tokens_a)
        m2 = self.sentence_matrix(tokens_b)
        ft = matching.assemble(m1, m2, self.matching)
        return matchcnn.match_features(ft, self.mcnn)

    def loss(self, batch: list[PairExample]) -> Tensor:
        xs = [self.pair_features(e.tokens_a, e.tokens_b) for e in batch]
        theta = self.trainable()
        if self.config.task == "relatedness":
            ys = [e.score for e in batch]
            return objectives.relatedness_loss(xs, ys, self.head, self.config.l2, theta)
        labels = [label_index(e.label) for e in batch]
        return objectives.entailment_loss(xs, labels, self.head, self.config.l2, theta)

    def predict_score(self, tokens_a, tokens_b) -> float:
        if self.config.task != "relatedness":
            raise ValueError("model was built for entailment; no relatedness head")
        return objectives.predict_score(self.pair_features(tokens_a, tokens_b), self.head)

    def predict_label(self, tokens_a, tokens_b) -> str:
        if self.config.task != "entailment":
            raise ValueError("model was built for relatedness; no entailment head")
        idx = objectives.predict_label(self.pair_features(tokens_a, tokens_b), self.head)
        return objectives.ENTAILMENT_LABELS[idx]


def build_word_table(config: Config, examples: list[PairExample] | None) -> tuple[Vocabulary, WordEmbeddings]:
    """Load the configured word-vector file, or derive a seeded random table
    from the dataset vocabulary when no file is configured."""
    if config.embeddings:
        return load_glove(config.embeddings, expected_dim=config.word_dim)
    if not examples:
        raise ValueError(
            "config has no embeddings file, so examples are required to build a vocabulary"
        )
    return random_embeddings(all_tokens(examples), config.word_dim, config.seed)


def build_model(config: Config, examples: list[PairExample] | None = None) -> PairModel:
    vocab, words = build_word_table(config, examples)
    return PairModel(config, vocab, words)
