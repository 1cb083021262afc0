"""Matching feature planes for a sentence pair.

Three planes compare the two sentence matrices row by row: an elementwise
product (sign agreement), an absolute difference (distance), and a learned
joint convolution that mixes each row of the first matrix with the matching
row of the second. The planes are stacked into a (3 x n x D) tensor for the
matching CNN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sentpair import autodiff as ad
from sentpair.autodiff import Tensor, parameter
from sentpair.charcnn import xavier_uniform

N_PLANES = 3


@dataclass
class MatchParams:
    """Joint-convolution weights for the third plane."""

    conv_w: Tensor  # (D, 2*D): output frames match the row width
    conv_b: Tensor  # (D,)

    @property
    def row_width(self) -> int:
        return self.conv_w.shape[0]

    def named_tensors(self):
        yield "match.fp3_w", self.conv_w
        yield "match.fp3_b", self.conv_b


def init_matching(rng: np.random.RandomState, row_width: int) -> MatchParams:
    win = 2 * row_width
    return MatchParams(
        conv_w=parameter(xavier_uniform(rng, (row_width, win), win, row_width), "match.fp3_w"),
        conv_b=parameter(np.zeros(row_width), "match.fp3_b"),
    )


def _check_pair(m1: Tensor, m2: Tensor) -> tuple[int, int]:
    if m1.shape != m2.shape or len(m1.shape) != 2:
        raise ValueError(f"sentence matrices must share a 2-D shape: {m1.shape} vs {m2.shape}")
    return m1.shape


def fp_mul(m1: Tensor, m2: Tensor) -> Tensor:
    """Elementwise product plane: positive where the signs agree."""
    _check_pair(m1, m2)
    return ad.mul(m1, m2)


def fp_absdiff(m1: Tensor, m2: Tensor) -> Tensor:
    """Elementwise absolute difference plane; zero iff the rows coincide."""
    _check_pair(m1, m2)
    return ad.abs_(ad.sub(m1, m2))


def fp_conv(m1: Tensor, m2: Tensor, params: MatchParams) -> Tensor:
    """Joint plane: width-2, stride-2 convolution over interleaved rows.

    Concatenating the matrices along columns and reshaping row-major to
    (2n x D) interleaves them as [m1_1, m2_1, m1_2, m2_2, ...], so each
    stride-2 window holds one row of m1 with its m2 counterpart. tanh keeps
    the plane on the same scale as the other two.
    """
    n, width = _check_pair(m1, m2)
    if params.row_width != width:
        raise ValueError(
            f"joint-conv params built for row width {params.row_width}, got {width}"
        )
    joined = ad.concat([m1, m2], axis=1)
    interleaved = ad.reshape(joined, (2 * n, width))
    return ad.tanh(ad.conv1d(interleaved, params.conv_w, params.conv_b, width=2, stride=2))


def assemble(m1: Tensor, m2: Tensor, params: MatchParams) -> Tensor:
    """Stack [product, absolute difference, joint conv] into (3 x n x D)."""
    n, width = _check_pair(m1, m2)
    planes = [fp_mul(m1, m2), fp_absdiff(m1, m2), fp_conv(m1, m2, params)]
    lifted = [ad.reshape(p, (1, n, width)) for p in planes]
    return ad.concat(lifted, axis=0)
