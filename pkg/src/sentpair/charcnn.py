"""Character-level word embeddings.

A token's one-hot char grid goes through a temporal convolution with relu,
max-over-time pooling, then a bottleneck stack: affine+relu down to a hidden
width, a single highway layer, and affine+relu back up to the output width.
The result is a fixed-size vector per token regardless of token length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sentpair import autodiff as ad
from sentpair import embeddings as emb
from sentpair.autodiff import Tensor, constant, parameter


def xavier_uniform(rng: np.random.RandomState, shape, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class CharCnnParams:
    """Weights for the char path. Dense weights are stored (in, out)."""

    l0: int
    width: int
    conv_w: Tensor  # (frames, width * alphabet)
    conv_b: Tensor  # (frames,)
    proj_in_w: Tensor  # (frames, hidden)
    proj_in_b: Tensor  # (hidden,)
    hw_w: Tensor  # (hidden, hidden)
    hw_b: Tensor  # (hidden,)
    gate_w: Tensor  # (hidden, hidden)
    gate_b: Tensor  # (hidden,)
    proj_out_w: Tensor  # (hidden, out_dim)
    proj_out_b: Tensor  # (out_dim,)

    @property
    def frames(self) -> int:
        return self.conv_w.shape[0]

    @property
    def hidden(self) -> int:
        return self.proj_in_w.shape[1]

    @property
    def out_dim(self) -> int:
        return self.proj_out_w.shape[1]

    def named_tensors(self):
        for field in (
            "conv_w", "conv_b", "proj_in_w", "proj_in_b",
            "hw_w", "hw_b", "gate_w", "gate_b", "proj_out_w", "proj_out_b",
        ):
            yield f"char.{field}", getattr(self, field)


def init_char_cnn(
    rng: np.random.RandomState,
    l0: int = 16,
    width: int = 3,
    frames: int = 100,
    hidden: int = 50,
    out_dim: int = 100,
    alphabet_size: int = emb.ALPHABET_SIZE,
) -> CharCnnParams:
    """Xavier-uniform weights, zero biases, gate bias -2 (carry-biased start)."""
    if l0 < width:
        raise ValueError(f"l0 ({l0}) must be >= conv width ({width})")
    win = width * alphabet_size
    return CharCnnParams(
        l0=l0,
        width=width,
        conv_w=parameter(xavier_uniform(rng, (frames, win), win, frames), "char.conv_w"),
        conv_b=parameter(np.zeros(frames), "char.conv_b"),
        proj_in_w=parameter(xavier_uniform(rng, (frames, hidden), frames, hidden), "char.proj_in_w"),
        proj_in_b=parameter(np.zeros(hidden), "char.proj_in_b"),
        hw_w=parameter(xavier_uniform(rng, (hidden, hidden), hidden, hidden), "char.hw_w"),
        hw_b=parameter(np.zeros(hidden), "char.hw_b"),
        gate_w=parameter(xavier_uniform(rng, (hidden, hidden), hidden, hidden), "char.gate_w"),
        gate_b=parameter(np.full(hidden, -2.0), "char.gate_b"),
        proj_out_w=parameter(xavier_uniform(rng, (hidden, out_dim), hidden, out_dim), "char.proj_out_w"),
        proj_out_b=parameter(np.zeros(out_dim), "char.proj_out_b"),
    )


def temporal_conv(grid: Tensor, weight: Tensor, bias: Tensor, width: int) -> Tensor:
    """relu over a width-`width`, stride-1 convolution of the char grid."""
    return ad.relu(ad.conv1d(grid, weight, bias, width, stride=1))


def max_over_time(frames: Tensor) -> Tensor:
    """Column-wise max over conv output rows (first row wins ties)."""
    return ad.max_over_axis(frames, axis=0)


def _affine(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b for a single vector (in,) or a row-stack (T, in)."""
    y = ad.matmul(x, w)
    if x.data.ndim == 1:
        return ad.add(y, b)
    return ad.add_rows(y, b)


def highway(y: Tensor, params: CharCnnParams) -> Tensor:
    """Gated mix of a relu transform with the carry-through input.

    z = t * relu(y @ hw_w + hw_b) + (1 - t) * y,  t = sigmoid(y @ gate_w + gate_b)
    """
    t = ad.sigmoid(_affine(y, params.gate_w, params.gate_b))
    g = ad.relu(_affine(y, params.hw_w, params.hw_b))
    carry = ad.sub(constant(np.float64(1.0)), t)
    return ad.add(ad.mul(t, g), ad.mul(carry, y))


def _reduce(pooled: Tensor, params: CharCnnParams) -> Tensor:
    down = ad.relu(_affine(pooled, params.proj_in_w, params.proj_in_b))
    mixed = highway(down, params)
    return ad.relu(_affine(mixed, params.proj_out_w, params.proj_out_b))


def char_embed(token: str, params: CharCnnParams) -> Tensor:
    """Full char path for one token: quantize, conv, pool, reduce."""
    grid = constant(emb.quantize(token, params.l0))
    frames = temporal_conv(grid, params.conv_w, params.conv_b, params.width)
    return _reduce(max_over_time(frames), params)


def char_embed_tokens(tokens: list[str], params: CharCnnParams) -> Tensor:
    """Char vectors for a whole sentence, stacked as a (T, out_dim) matrix.

    Conv and pooling run per token (windows must not cross token boundaries);
    the reduce stack then runs batched over the stacked pooled rows.
    """
    if not tokens:
        raise ValueError("cannot embed an empty token sequence")
    pooled = []
    for token in tokens:
        grid = constant(emb.quantize(token, params.l0))
        frames = temporal_conv(grid, params.conv_w, params.conv_b, params.width)
        pooled.append(max_over_time(frames))
    stacked = ad.reshape(ad.concat(pooled, axis=0), (len(tokens), params.frames))
    return _reduce(stacked, params)
