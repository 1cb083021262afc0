"""Temporal CNN over the matching feature planes.

The plane stack folds into a single sequence whose frames are the planes'
columns laid out plane-major, then two conv+tanh stages run over it. The two
topologies differ only in stage order: variant I is width-1 then width-2,
variant II is width-2 then width-1. The final stage's output flattens into
the hidden matching vector consumed by the task heads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sentpair import autodiff as ad
from sentpair.autodiff import Tensor, parameter
from sentpair.charcnn import xavier_uniform
from sentpair.matching import N_PLANES

TOPOLOGIES = ("I", "II")


def stage_widths(topology: str) -> tuple[int, int]:
    if topology == "I":
        return 1, 2
    if topology == "II":
        return 2, 1
    raise ValueError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


@dataclass
class MatchCnnParams:
    topology: str
    stage1_per_plane: bool
    row_width: int
    stage1: list[tuple[Tensor, Tensor]]  # one (w, b) bank, or one per plane
    stage2: tuple[Tensor, Tensor]

    @property
    def stage1_frames(self) -> int:
        return self.stage1[0][0].shape[0]

    @property
    def stage2_frames(self) -> int:
        return self.stage2[0].shape[0]

    def named_tensors(self):
        if self.stage1_per_plane:
            for plane, (w, b) in enumerate(self.stage1):
                yield f"mcnn.s1.p{plane}.w", w
                yield f"mcnn.s1.p{plane}.b", b
        else:
            yield "mcnn.s1.w", self.stage1[0][0]
            yield "mcnn.s1.b", self.stage1[0][1]
        yield "mcnn.s2.w", self.stage2[0]
        yield "mcnn.s2.b", self.stage2[1]


def init_match_cnn(
    rng: np.random.RandomState,
    row_width: int,
    stage1_frames: int = 150,
    stage2_frames: int = 150,
    topology: str = "I",
    stage1_per_plane: bool = False,
) -> MatchCnnParams:
    w1, w2 = stage_widths(topology)

    def bank(out_frames, window, prefix):
        w = parameter(xavier_uniform(rng, (out_frames, window), window, out_frames), f"{prefix}.w")
        b = parameter(np.zeros(out_frames), f"{prefix}.b")
        return w, b

    if stage1_per_plane:
        stage1 = [
            bank(stage1_frames, w1 * row_width, f"mcnn.s1.p{plane}")
            for plane in range(N_PLANES)
        ]
        stage2_in = N_PLANES * stage1_frames
    else:
        stage1 = [bank(stage1_frames, w1 * N_PLANES * row_width, "mcnn.s1")]
        stage2_in = stage1_frames
    stage2 = bank(stage2_frames, w2 * stage2_in, "mcnn.s2")
    return MatchCnnParams(
        topology=topology,
        stage1_per_plane=stage1_per_plane,
        row_width=row_width,
        stage1=stage1,
        stage2=stage2,
    )


def fold_planes(feature_tensor: Tensor) -> Tensor:
    """(3 x n x D) -> (n x 3D) with plane-major frame blocks."""
    planes, n, width = feature_tensor.shape
    parts = [
        ad.reshape(ad.slice_along(feature_tensor, 0, p, p + 1), (n, width))
        for p in range(planes)
    ]
    return ad.concat(parts, axis=1)


def _check_extent(time_extent: int, width: int, stage: str) -> None:
    if time_extent < width:
        raise ValueError(
            f"{stage}: time extent {time_extent} is smaller than kernel width {width}"
        )


def stage(x: Tensor, w: Tensor, b: Tensor, width: int) -> Tensor:
    """One conv+tanh stage over (T, F) input."""
    _check_extent(x.shape[0], width, "conv stage")
    return ad.tanh(ad.conv1d(x, w, b, width, stride=1))


def output_dim(
    n: int,
    topology: str,
    stage1_frames: int = 150,
    stage2_frames: int = 150,
) -> int:
    """Closed-form flattened output size; rejects impossible time extents."""
    w1, w2 = stage_widths(topology)
    t1 = n - w1 + 1
    _check_extent(n, w1, "stage 1")
    _check_extent(t1, w2, "stage 2")
    t2 = t1 - w2 + 1
    return t2 * stage2_frames


def match_features(feature_tensor: Tensor, params: MatchCnnParams) -> Tensor:
    """Run both stages over the folded planes and flatten to the x_h vector."""
    planes, n, width = feature_tensor.shape
    if width != params.row_width:
        raise ValueError(
            f"match-cnn params built for row width {params.row_width}, got {width}"
        )
    w1, w2 = stage_widths(params.topology)
    _check_extent(n, w1, "stage 1")
    if params.stage1_per_plane:
        outs = []
        for plane, (w, b) in enumerate(params.stage1):
            part = ad.reshape(ad.slice_along(feature_tensor, 0, plane, plane + 1), (n, width))
            outs.append(stage(part, w, b, w1))
        h1 = ad.concat(outs, axis=1)
    else:
        w, b = params.stage1[0]
        h1 = stage(fold_planes(feature_tensor), w, b, w1)
    _check_extent(h1.shape[0], w2, "stage 2")
    h2 = stage(h1, params.stage2[0], params.stage2[1], w2)
    t2, f2 = h2.shape
    return ad.reshape(h2, (t2 * f2,))
