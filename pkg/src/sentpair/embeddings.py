"""Word-vector ingestion and character-level one-hot quantization.

The word path looks tokens up in a fixed pre-trained table (GloVe text
format); the char path turns each token into a one-hot grid over a 36-symbol
alphabet (26 lowercase letters, then 10 digits). Out-of-alphabet characters
quantize to all-zero rows, so every token has a usable grid even when the
word table does not know it.
"""

from __future__ import annotations

import gzip
import hashlib
import logging
import string

import numpy as np

from sentpair.autodiff import Tensor, constant

logger = logging.getLogger(__name__)

ALPHABET = string.ascii_lowercase + string.digits
ALPHABET_SIZE = len(ALPHABET)  # 36
_CHAR_INDEX = {ch: i for i, ch in enumerate(ALPHABET)}

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

_STRIP_CHARS = string.punctuation


def tokenize(text: str) -> list[str]:
    """Whitespace split, then strip leading/trailing punctuation per token."""
    tokens = []
    for raw in text.split():
        token = raw.strip(_STRIP_CHARS)
        if token:
            tokens.append(token)
    return tokens


def quantize(token: str, l0: int) -> np.ndarray:
    """One-hot (l0 x 36) grid for a token; total (never fails).

    The token is lowercased first; characters past position ``l0`` are
    ignored; characters outside the alphabet (and padding positions) become
    all-zero rows.
    """
    if l0 < 1:
        raise ValueError(f"l0 must be >= 1, got {l0}")
    grid = np.zeros((l0, ALPHABET_SIZE), dtype=np.float64)
    for pos, ch in enumerate(token.lower()[:l0]):
        idx = _CHAR_INDEX.get(ch)
        if idx is not None:
            grid[pos, idx] = 1.0
    return grid


class Vocabulary:
    """Bijective token<->index table with PAD at 0 and UNK at 1."""

    def __init__(self, tokens: list[str]):
        self.index_to_token = [PAD_TOKEN, UNK_TOKEN] + list(tokens)
        self.token_to_index = {}
        for i, tok in enumerate(self.index_to_token):
            if tok in self.token_to_index:
                raise ValueError(f"duplicate token in vocabulary: {tok!r}")
            self.token_to_index[tok] = i

    def __len__(self) -> int:
        return len(self.index_to_token)

    @property
    def pad_index(self) -> int:
        return 0

    @property
    def unk_index(self) -> int:
        return 1

    def lookup(self, token: str) -> int:
        """Index of the token; tries the exact form, then lowercase, else UNK."""
        idx = self.token_to_index.get(token)
        if idx is None:
            idx = self.token_to_index.get(token.lower(), self.unk_index)
        return idx

    def content_hash(self) -> str:
        """Stable digest of the token list, for checkpoint cross-checks."""
        h = hashlib.sha256()
        for tok in self.index_to_token:
            h.update(tok.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


class WordEmbeddings:
    """Fixed (vocab x dim) word-vector table; never updated by training."""

    def __init__(self, matrix: np.ndarray):
        self.table = constant(np.asarray(matrix, dtype=np.float64), name="word_embeddings")

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    @property
    def tensor(self) -> Tensor:
        return self.table

    def vector(self, index: int) -> np.ndarray:
        return self.table.data[index]


def _open_text(path: str):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "rt", encoding="utf-8")


def load_glove(path: str, expected_dim: int | None = None) -> tuple[Vocabulary, WordEmbeddings]:
    """Parse a GloVe text file: one token and its decimal vector per line.

    The table keeps file order, prefixed by PAD (zeros) and UNK (the mean of
    all loaded vectors). ``expected_dim`` defaults to the first line's width;
    any line that disagrees is rejected with its line number. Blank lines are
    skipped and counted.
    """
    tokens: list[str] = []
    seen: set[str] = set()
    rows: list[np.ndarray] = []
    dim = expected_dim
    skipped = 0
    try:
        handle = _open_text(path)
    except OSError as exc:
        raise ValueError(f"cannot read word-vector file {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) <= 1 and not "".join(parts).strip():
                skipped += 1
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim < 1:
                    raise ValueError(f"{path}:{lineno}: no vector values on first line")
            if len(values) != dim:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} values, found {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unparseable value ({exc})") from exc
            if token in seen:
                raise ValueError(f"{path}:{lineno}: duplicate token {token!r}")
            seen.add(token)
            tokens.append(token)
            rows.append(vec)
    if not rows:
        raise ValueError(f"{path}: no word vectors found")
    if skipped:
        logger.warning("%s: skipped %d malformed (blank) lines", path, skipped)
    stacked = np.stack(rows)
    matrix = np.zeros((len(rows) + 2, dim), dtype=np.float64)
    matrix[1] = stacked.mean(axis=0)  # UNK
    matrix[2:] = stacked
    return Vocabulary(tokens), WordEmbeddings(matrix)


def random_embeddings(tokens, dim: int, seed: int) -> tuple[Vocabulary, WordEmbeddings]:
    """Deterministic stand-in table for runs without a pre-trained file.

    Rows are fixed at construction and stay frozen, exactly like a loaded
    table. Token order is sorted-unique so the table depends only on the
    token set and seed.
    """
    uniq = sorted(set(tokens))
    rng = np.random.RandomState(seed)
    stacked = rng.normal(0.0, 0.3, size=(len(uniq), dim))
    matrix = np.zeros((len(uniq) + 2, dim), dtype=np.float64)
    matrix[1] = stacked.mean(axis=0)
    matrix[2:] = stacked
    return Vocabulary(uniq), WordEmbeddings(matrix)


def restrict_to(vocab: Vocabulary, table: WordEmbeddings, tokens) -> tuple[Vocabulary, WordEmbeddings]:
    """Shrink a table to the tokens a dataset actually uses (UNK mean kept)."""
    indices = sorted({vocab.lookup(t) for t in tokens if vocab.lookup(t) >= 2})
    kept_tokens = [vocab.index_to_token[i] for i in indices]
    matrix = np.zeros((len(kept_tokens) + 2, table.dim), dtype=np.float64)
    matrix[1] = table.vector(vocab.unk_index)
    for row, src in enumerate(indices):
        matrix[2 + row] = table.vector(src)
    return Vocabulary(kept_tokens), WordEmbeddings(matrix)


def dump_vocabulary(vocab: Vocabulary, path: str) -> None:
    """Two-column (token, index) text dump for reproducibility."""
    with open(path, "w", encoding="utf-8") as handle:
        for idx, tok in enumerate(vocab.index_to_token):
            handle.write(f"{tok}\t{idx}\n")


def load_vocabulary(path: str) -> Vocabulary:
    tokens = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle):
            tok, idx = line.rstrip("\n").split("\t")
            if int(idx) != lineno:
                raise ValueError(f"{path}:{lineno + 1}: index column out of order")
            tokens.append(tok)
    if tokens[:2] != [PAD_TOKEN, UNK_TOKEN]:
        raise ValueError(f"{path}: missing PAD/UNK header rows")
    return Vocabulary(tokens[2:])
