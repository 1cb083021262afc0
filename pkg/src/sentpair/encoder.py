"""Sentence encoders: stacked bidirectional LSTM and a child-sum tree LSTM.

The bidirectional stack is fed asymmetrically: the first forward layer reads
pre-trained word vectors while the first backward layer reads character-level
vectors, so the two directions see the sentence through different channels.
Upper layers consume their own direction's lower-layer outputs. A sentence is
summarized by the final hidden state of every layer/direction, stacked into a
(layers x 2d) matrix.

The tree encoder shares the gate arithmetic with the sequential step so that
on a degenerate chain tree the two produce bit-identical states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sentpair import autodiff as ad
from sentpair.autodiff import Tensor, constant, parameter
from sentpair.charcnn import xavier_uniform


@dataclass
class LstmParams:
    """One cell's weights, per gate (i, f, o, u); dense weights are (in, out)."""

    wi: Tensor
    ui: Tensor
    bi: Tensor
    wf: Tensor
    uf: Tensor
    bf: Tensor
    wo: Tensor
    uo: Tensor
    bo: Tensor
    wu: Tensor
    uu: Tensor
    bu: Tensor

    @property
    def in_dim(self) -> int:
        return self.wi.shape[0]

    @property
    def d(self) -> int:
        return self.wi.shape[1]

    def named_tensors(self, prefix: str):
        for field in ("wi", "ui", "bi", "wf", "uf", "bf", "wo", "uo", "bo", "wu", "uu", "bu"):
            yield f"{prefix}.{field}", getattr(self, field)


def init_lstm(rng: np.random.RandomState, in_dim: int, d: int, prefix: str = "lstm") -> LstmParams:
    """Xavier-uniform weights; zero biases except the forget bias at 1.0."""

    def w(name):
        return parameter(xavier_uniform(rng, (in_dim, d), in_dim, d), f"{prefix}.{name}")

    def u(name):
        return parameter(xavier_uniform(rng, (d, d), d, d), f"{prefix}.{name}")

    return LstmParams(
        wi=w("wi"), ui=u("ui"), bi=parameter(np.zeros(d), f"{prefix}.bi"),
        wf=w("wf"), uf=u("uf"), bf=parameter(np.full(d, 1.0), f"{prefix}.bf"),
        wo=w("wo"), uo=u("uo"), bo=parameter(np.zeros(d), f"{prefix}.bo"),
        wu=w("wu"), uu=u("uu"), bu=parameter(np.zeros(d), f"{prefix}.bu"),
    )


def _gate(x: Tensor, h: Tensor, w: Tensor, u: Tensor, b: Tensor, fn) -> Tensor:
    return fn(ad.add(ad.add(ad.matmul(x, w), ad.matmul(h, u)), b))


def lstm_step(x: Tensor, h_prev: Tensor, c_prev: Tensor, p: LstmParams) -> tuple[Tensor, Tensor]:
    """One recurrence step: gated cell update, tanh-squashed hidden output."""
    i = _gate(x, h_prev, p.wi, p.ui, p.bi, ad.sigmoid)
    f = _gate(x, h_prev, p.wf, p.uf, p.bf, ad.sigmoid)
    o = _gate(x, h_prev, p.wo, p.uo, p.bo, ad.sigmoid)
    u = _gate(x, h_prev, p.wu, p.uu, p.bu, ad.tanh)
    c = ad.add(ad.mul(i, u), ad.mul(f, c_prev))
    h = ad.mul(o, ad.tanh(c))
    return h, c


def _run_layer(inputs: list[Tensor], p: LstmParams, reverse: bool) -> list[Tensor]:
    """Hidden states for one layer/direction, in input (time) order."""
    d = p.d
    h = constant(np.zeros(d))
    c = constant(np.zeros(d))
    order = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
    states: dict[int, Tensor] = {}
    for t in order:
        h, c = lstm_step(inputs[t], h, c, p)
        states[t] = h
    return [states[t] for t in range(len(inputs))]


def _rows(matrix: Tensor) -> list[Tensor]:
    n, width = matrix.shape
    return [ad.reshape(ad.slice_along(matrix, 0, t, t + 1), (width,)) for t in range(n)]


@dataclass
class EncoderParams:
    """Layer stack; ``backward`` is None for a forward-only encoder."""

    forward: list[LstmParams]
    backward: list[LstmParams] | None

    @property
    def n_layers(self) -> int:
        return len(self.forward)

    @property
    def bidirectional(self) -> bool:
        return self.backward is not None

    @property
    def d(self) -> int:
        return self.forward[0].d

    @property
    def out_width(self) -> int:
        return 2 * self.d if self.bidirectional else self.d

    def named_tensors(self):
        for layer, p in enumerate(self.forward, start=1):
            yield from p.named_tensors(f"enc.l{layer}.f")
        if self.backward is not None:
            for layer, p in enumerate(self.backward, start=1):
                yield from p.named_tensors(f"enc.l{layer}.b")


def init_encoder(
    rng: np.random.RandomState,
    word_dim: int,
    char_dim: int,
    d: int,
    n_layers: int,
    bidirectional: bool = True,
) -> EncoderParams:
    if n_layers < 1:
        raise ValueError(f"n_layers must be >= 1, got {n_layers}")
    forward = []
    backward = [] if bidirectional else None
    for layer in range(1, n_layers + 1):
        fwd_in = word_dim if layer == 1 else d
        forward.append(init_lstm(rng, fwd_in, d, f"enc.l{layer}.f"))
        if bidirectional:
            bwd_in = char_dim if layer == 1 else d
            backward.append(init_lstm(rng, bwd_in, d, f"enc.l{layer}.b"))
    return EncoderParams(forward=forward, backward=backward)


def encode(word_matrix: Tensor, char_matrix: Tensor | None, enc: EncoderParams) -> Tensor:
    """Sentence matrix: one row per layer of final forward/backward states.

    ``word_matrix`` is (T, word_dim); ``char_matrix`` is (T, char_dim) and
    required iff the encoder is bidirectional. The forward direction's final
    state is at the last token; the backward direction's is at the first.
    """
    t_len = word_matrix.shape[0]
    if t_len < 1:
        raise ValueError("cannot encode an empty sentence")
    fwd_inputs = _rows(word_matrix)
    rows: list[Tensor] = []
    fwd_states = fwd_inputs
    bwd_states = None
    if enc.bidirectional:
        if char_matrix is None:
            raise ValueError("bidirectional encoder needs a char matrix")
        if char_matrix.shape[0] != t_len:
            raise ValueError(
                f"word/char length mismatch: {t_len} vs {char_matrix.shape[0]}"
            )
        bwd_states = _rows(char_matrix)
    for layer in range(enc.n_layers):
        fwd_states = _run_layer(fwd_states, enc.forward[layer], reverse=False)
        if enc.bidirectional:
            bwd_states = _run_layer(bwd_states, enc.backward[layer], reverse=True)
            rows.append(ad.concat([fwd_states[-1], bwd_states[0]], axis=0))
        else:
            rows.append(fwd_states[-1])
    stacked = ad.concat(rows, axis=0)
    return ad.reshape(stacked, (enc.n_layers, enc.out_width))


class DepTree:
    """Node of a dependency tree over token positions (1-based)."""

    __slots__ = ("index", "children")

    def __init__(self, index: int, children=None):
        self.index = index
        self.children = list(children) if children else []

    def positions(self) -> list[int]:
        out = [self.index]
        for child in self.children:
            out.extend(child.positions())
        return out


def parse_tree(text: str) -> DepTree:
    """Parse ``(2 (1) (3))``: a parenthesized node index with child subtrees."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse_node() -> DepTree:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != "(":
            raise ValueError(f"tree text {text!r}: expected '(' at item {pos}")
        pos += 1
        if pos >= len(tokens) or not tokens[pos].lstrip("-").isdigit():
            raise ValueError(f"tree text {text!r}: expected a token index at item {pos}")
        index = int(tokens[pos])
        if index < 1:
            raise ValueError(f"tree text {text!r}: token indices are 1-based, got {index}")
        pos += 1
        children = []
        while pos < len(tokens) and tokens[pos] == "(":
            children.append(parse_node())
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ValueError(f"tree text {text!r}: expected ')' at item {pos}")
        pos += 1
        return DepTree(index, children)

    root = parse_node()
    if pos != len(tokens):
        raise ValueError(f"tree text {text!r}: trailing content after root")
    return root


def chain_tree(n: int) -> DepTree:
    """Degenerate left-spine tree: root n, child n-1, ..., leaf 1."""
    if n < 1:
        raise ValueError(f"chain length must be >= 1, got {n}")
    node = DepTree(1)
    for index in range(2, n + 1):
        node = DepTree(index, [node])
    return node


def tree_lstm_node(x: Tensor, children: list[tuple[Tensor, Tensor]], p: LstmParams) -> tuple[Tensor, Tensor]:
    """Child-sum node: one forget gate per child, summed child context.

    Single-child nodes reuse the child state directly and leaves use a zero
    stand-in, keeping the op sequence identical to ``lstm_step`` on chains.
    """
    d = p.d
    if not children:
        h_sum = constant(np.zeros(d))
    elif len(children) == 1:
        h_sum = children[0][0]
    else:
        h_sum = children[0][0]
        for h_k, _ in children[1:]:
            h_sum = ad.add(h_sum, h_k)
    i = _gate(x, h_sum, p.wi, p.ui, p.bi, ad.sigmoid)
    if not children:
        # a leaf still evaluates its forget gate against a zero child state,
        # so the op sequence is the same one lstm_step runs at t=1
        f = _gate(x, h_sum, p.wf, p.uf, p.bf, ad.sigmoid)
        c_in = ad.mul(f, constant(np.zeros(d)))
    else:
        c_in = None
        for h_k, c_k in children:
            f_k = _gate(x, h_k, p.wf, p.uf, p.bf, ad.sigmoid)
            term = ad.mul(f_k, c_k)
            c_in = term if c_in is None else ad.add(c_in, term)
    o = _gate(x, h_sum, p.wo, p.uo, p.bo, ad.sigmoid)
    u = _gate(x, h_sum, p.wu, p.uu, p.bu, ad.tanh)
    c = ad.add(ad.mul(i, u), c_in)
    h = ad.mul(o, ad.tanh(c))
    return h, c


def tree_lstm_encode(x_matrix: Tensor, tree: DepTree, p: LstmParams) -> tuple[Tensor, Tensor]:
    """Root (h, c) of the tree over token-position rows of ``x_matrix``.

    Token indices in the tree must form a permutation of 1..T.
    """
    t_len = x_matrix.shape[0]
    seen = tree.positions()
    if sorted(seen) != list(range(1, t_len + 1)):
        raise ValueError(
            f"tree positions {sorted(seen)} do not cover tokens 1..{t_len} exactly once"
        )
    rows = _rows(x_matrix)

    def encode_node(node: DepTree) -> tuple[Tensor, Tensor]:
        children = [encode_node(child) for child in node.children]
        return tree_lstm_node(rows[node.index - 1], children, p)

    return encode_node(tree)
