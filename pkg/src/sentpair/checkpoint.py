"""Binary model checkpoints.

Layout (all integers little-endian):

    magic "SPCK" | u32 version
    u64 config length | config text (utf-8)
    u64 token count  | per token: u64 byte length, utf-8 bytes
    u64 hash length  | vocabulary content hash (ascii hex)
    u64 tensor count | per tensor: u64 name length, name, u64 rank,
                       u64 extents[rank], float64 little-endian values

The config snapshot and the vocabulary ride inside so a checkpoint is
self-sufficient for prediction. Writes go to a temp file and are renamed into
place, so a crashed save never leaves a partial checkpoint behind. The stored
vocabulary hash is recomputed on load and must match.
"""

from __future__ import annotations

import os
import struct
from collections import OrderedDict

import numpy as np

from sentpair.config import parse_config
from sentpair.embeddings import Vocabulary, WordEmbeddings
from sentpair.model import PairModel

MAGIC = b"SPCK"
VERSION = 1

WORD_TABLE_NAME = "word_embeddings"


def _write_u64(fh, value: int) -> None:
    fh.write(struct.pack("<Q", value))


def _write_bytes(fh, blob: bytes) -> None:
    _write_u64(fh, len(blob))
    fh.write(blob)


def save_checkpoint(path: str, config_text: str, vocab: Vocabulary,
                    tensors: "OrderedDict[str, np.ndarray]") -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        _write_bytes(fh, config_text.encode("utf-8"))
        _write_u64(fh, len(vocab.index_to_token))
        for token in vocab.index_to_token:
            _write_bytes(fh, token.encode("utf-8"))
        _write_bytes(fh, vocab.content_hash().encode("ascii"))
        _write_u64(fh, len(tensors))
        for name, array in tensors.items():
            arr = np.asarray(array, dtype=np.float64)
            _write_bytes(fh, name.encode("utf-8"))
            _write_u64(fh, arr.ndim)
            for extent in arr.shape:
                _write_u64(fh, extent)
            fh.write(arr.astype("<f8", copy=False).tobytes())
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


class _Reader:
    def __init__(self, path: str):
        self.path = path
        with open(path, "rb") as fh:
            self.blob = fh.read()
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise ValueError(f"{self.path}: truncated checkpoint")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def sized_bytes(self) -> bytes:
        return self.take(self.u64())


def load_checkpoint(path: str) -> tuple[str, Vocabulary, "OrderedDict[str, np.ndarray]"]:
    try:
        reader = _Reader(path)
    except OSError as exc:
        raise ValueError(f"cannot read checkpoint {path}: {exc}") from exc
    if reader.take(4) != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    version = struct.unpack("<I", reader.take(4))[0]
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version} (expected {VERSION})")
    config_text = reader.sized_bytes().decode("utf-8")
    n_tokens = reader.u64()
    tokens = [reader.sized_bytes().decode("utf-8") for _ in range(n_tokens)]
    stored_hash = reader.sized_bytes().decode("ascii")
    if len(tokens) < 2:
        raise ValueError(f"{path}: vocabulary section too small")
    vocab = Vocabulary(tokens[2:])
    if vocab.index_to_token[:2] != tokens[:2]:
        raise ValueError(f"{path}: vocabulary is missing its reserved tokens")
    if vocab.content_hash() != stored_hash:
        raise ValueError(f"{path}: vocabulary hash mismatch (corrupt checkpoint)")
    tensors: OrderedDict[str, np.ndarray] = OrderedDict()
    n_tensors = reader.u64()
    for _ in range(n_tensors):
        name = reader.sized_bytes().decode("utf-8")
        rank = reader.u64()
        shape = tuple(reader.u64() for _ in range(rank))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        raw = reader.take(count * 8)
        tensors[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)
    if reader.pos != len(reader.blob):
        raise ValueError(f"{path}: trailing bytes after tensor table")
    return config_text, vocab, tensors


def save_model(path: str, model: PairModel, config_text: str) -> None:
    tensors: OrderedDict[str, np.ndarray] = OrderedDict()
    for name, tensor in model.parameters().items():
        tensors[name] = tensor.data
    tensors[WORD_TABLE_NAME] = model.words.tensor.data
    save_checkpoint(path, config_text, model.vocab, tensors)


def load_model(path: str) -> tuple[PairModel, str]:
    config_text, vocab, tensors = load_checkpoint(path)
    config = parse_config(config_text)
    if WORD_TABLE_NAME not in tensors:
        raise ValueError(f"{path}: checkpoint has no word-embedding table")
    words = WordEmbeddings(tensors.pop(WORD_TABLE_NAME))
    model = PairModel(config, vocab, words)
    registry = model.parameters()
    missing = [n for n in registry if n not in tensors]
    extra = [n for n in tensors if n not in registry]
    if missing or extra:
        raise ValueError(
            f"{path}: parameter names do not match the configuration "
            f"(missing {missing[:3]}, unexpected {extra[:3]})"
        )
    for name, tensor in registry.items():
        stored = tensors[name]
        if stored.shape != tensor.data.shape:
            raise ValueError(
                f"{path}: tensor {name} has shape {stored.shape}, expected {tensor.data.shape}"
            )
        tensor.data = stored.copy()
    return model, config_text
