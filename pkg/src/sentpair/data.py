"""Sentence-pair dataset ingestion.

Reads the SICK tab-separated format: a header line naming the columns, then
one pair per row with a relatedness score in [1, 5] and a three-way
entailment judgment. Column order is resolved from the header, so files with
extra columns or reordered columns load fine.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from sentpair.embeddings import _open_text, tokenize
from sentpair.objectives import ENTAILMENT_LABELS

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = (
    "pair_ID",
    "sentence_A",
    "sentence_B",
    "relatedness_score",
    "entailment_judgment",
)
SPLIT_COLUMN = "SemEval_set"
SPLITS = ("train", "trial", "test")

SCORE_MIN = 1.0
SCORE_MAX = 5.0


@dataclass(frozen=True)
class PairExample:
    pair_id: str
    sentence_a: str
    sentence_b: str
    tokens_a: tuple[str, ...]
    tokens_b: tuple[str, ...]
    score: float
    label: str
    split: str


def make_example(pair_id: str, sentence_a: str, sentence_b: str, score: float,
                 label: str, split: str = "train") -> PairExample:
    """Validate and build one example; raises ValueError on any bad field."""
    tokens_a = tuple(tokenize(sentence_a))
    tokens_b = tuple(tokenize(sentence_b))
    if not tokens_a or not tokens_b:
        raise ValueError(f"pair {pair_id}: empty sentence after tokenization")
    if not (SCORE_MIN <= score <= SCORE_MAX):
        raise ValueError(f"pair {pair_id}: score {score} outside [{SCORE_MIN}, {SCORE_MAX}]")
    canonical = label.strip().upper()
    if canonical not in ENTAILMENT_LABELS:
        raise ValueError(f"pair {pair_id}: unknown label {label!r}")
    if split not in SPLITS:
        raise ValueError(f"pair {pair_id}: unknown split {split!r}")
    return PairExample(
        pair_id=pair_id,
        sentence_a=sentence_a,
        sentence_b=sentence_b,
        tokens_a=tokens_a,
        tokens_b=tokens_b,
        score=score,
        label=canonical,
        split=split,
    )


def label_index(label: str) -> int:
    return ENTAILMENT_LABELS.index(label)


def load_sick(path: str) -> list[PairExample]:
    """Parse a SICK TSV file; gzip is handled transparently.

    Any missing required column rejects the whole file; a bad row is rejected
    with its row number. Per-split counts are logged.
    """
    with _open_text(path) as handle:
        header = handle.readline().rstrip("\n")
        if not header:
            raise ValueError(f"{path}: empty file")
        columns = header.split("\t")
        index = {name: i for i, name in enumerate(columns)}
        missing = [c for c in REQUIRED_COLUMNS if c not in index]
        if missing:
            raise ValueError(f"{path}: header missing required columns {missing}")
        split_col = index.get(SPLIT_COLUMN)
        examples = []
        for row_no, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < len(columns):
                raise ValueError(f"{path}:{row_no}: expected {len(columns)} fields, found {len(fields)}")

            def col(name):
                return fields[index[name]]

            raw_score = col("relatedness_score")
            try:
                score = float(raw_score)
            except ValueError:
                raise ValueError(f"{path}:{row_no}: unparseable score {raw_score!r}") from None
            split = fields[split_col].strip().lower() if split_col is not None else "train"
            try:
                examples.append(
                    make_example(
                        pair_id=col("pair_ID"),
                        sentence_a=col("sentence_A"),
                        sentence_b=col("sentence_B"),
                        score=score,
                        label=col("entailment_judgment"),
                        split=split,
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{row_no}: {exc}") from None
    if not examples:
        raise ValueError(f"{path}: no data rows")
    counts = {split: sum(1 for e in examples if e.split == split) for split in SPLITS}
    logger.info("%s: loaded %d pairs (%s)", path, len(examples),
                ", ".join(f"{k}={v}" for k, v in counts.items() if v))
    return examples


def dump_sick(examples: list[PairExample], path: str) -> None:
    """Write examples back out in the same TSV layout (round-trippable)."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(REQUIRED_COLUMNS + (SPLIT_COLUMN,)) + "\n")
        for e in examples:
            handle.write(
                "\t".join([
                    e.pair_id, e.sentence_a, e.sentence_b,
                    repr(e.score), e.label, e.split.upper(),
                ]) + "\n"
            )


def split_examples(examples: list[PairExample], split: str) -> list[PairExample]:
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    return [e for e in examples if e.split == split]


def batch_iter(examples: list[PairExample], batch_size: int, seed: int, epoch: int):
    """Seeded shuffled minibatches; the last batch may be smaller."""
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    order = np.random.RandomState([seed, epoch]).permutation(len(examples))
    for start in range(0, len(examples), batch_size):
        yield [examples[i] for i in order[start:start + batch_size]]


def truncate_example(example: PairExample, max_len: int) -> tuple[PairExample, bool]:
    """Cap both sentences at ``max_len`` tokens; reports whether it cut."""
    if len(example.tokens_a) <= max_len and len(example.tokens_b) <= max_len:
        return example, False
    return replace(
        example,
        tokens_a=example.tokens_a[:max_len],
        tokens_b=example.tokens_b[:max_len],
    ), True


def all_tokens(examples: list[PairExample]):
    for e in examples:
        yield from e.tokens_a
        yield from e.tokens_b
