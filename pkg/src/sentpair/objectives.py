"""Task heads and losses.

Relatedness is trained as ordinal regression: a real score y in [1, K] maps
to a sparse two-point target distribution whose expectation under the ramp
r = [1..K] reproduces y exactly, and the head minimizes the mean KL from that
target to its softmax prediction. Entailment is a plain softmax classifier
under negative log-likelihood. Both losses carry an L2 term over every
trainable parameter (frozen tables have no gradient and are excluded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sentpair import autodiff as ad
from sentpair.autodiff import Tensor, constant, parameter
from sentpair.charcnn import xavier_uniform

RELATEDNESS_K = 5
ENTAILMENT_LABELS = ("ENTAILMENT", "CONTRADICTION", "NEUTRAL")


@dataclass
class OrdinalHead:
    """Softmax head over K ordinal bins with the fixed ramp r = [1..K]."""

    w: Tensor  # (x_dim, K)
    b: Tensor  # (K,)

    @property
    def k(self) -> int:
        return self.b.shape[0]

    @property
    def ramp(self) -> np.ndarray:
        return np.arange(1, self.k + 1, dtype=np.float64)

    def named_tensors(self):
        yield "rel_head.w", self.w
        yield "rel_head.b", self.b


@dataclass
class ClassHead:
    """Softmax head over the three entailment classes."""

    w: Tensor  # (x_dim, C)
    b: Tensor  # (C,)

    @property
    def n_classes(self) -> int:
        return self.b.shape[0]

    def named_tensors(self):
        yield "ent_head.w", self.w
        yield "ent_head.b", self.b


def init_ordinal_head(rng: np.random.RandomState, x_dim: int, k: int = RELATEDNESS_K) -> OrdinalHead:
    if k <= 1:
        raise ValueError(f"ordinal head needs K > 1, got {k}")
    return OrdinalHead(
        w=parameter(xavier_uniform(rng, (x_dim, k), x_dim, k), "rel_head.w"),
        b=parameter(np.zeros(k), "rel_head.b"),
    )


def init_class_head(rng: np.random.RandomState, x_dim: int, n_classes: int = 3) -> ClassHead:
    return ClassHead(
        w=parameter(xavier_uniform(rng, (x_dim, n_classes), x_dim, n_classes), "ent_head.w"),
        b=parameter(np.zeros(n_classes), "ent_head.b"),
    )


def sparse_target(y: float, k: int = RELATEDNESS_K) -> np.ndarray:
    """Two-point target p with r . p = y exactly; one-hot for integer y.

    Mass y - floor(y) goes to bin floor(y)+1 and the remainder to bin
    floor(y), in 1-based bin terms.
    """
    if not (1.0 <= y <= float(k)):
        raise ValueError(f"score {y} outside [1, {k}]")
    p = np.zeros(k, dtype=np.float64)
    floor = math.floor(y)
    frac = y - floor
    p[floor - 1] = 1.0 - frac
    if frac > 0.0:
        p[floor] = frac
    return p


def _logits(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    return ad.add(ad.matmul(x, w), b)


def kl_to_target(p: np.ndarray, logits: Tensor) -> Tensor:
    """KL(p || softmax(logits)); target entries at 0 contribute nothing."""
    support = p > 0.0
    neg_entropy = float(np.sum(p[support] * np.log(p[support])))
    cross = ad.sum_all(ad.mul(constant(p), ad.log_softmax(logits)))
    return ad.add(constant(np.float64(neg_entropy)), ad.neg(cross))


def l2_penalty(tensors, lam: float) -> Tensor:
    """(lam/2) * squared norm of all given tensors, inside the graph."""
    total = None
    for t in tensors:
        sq = ad.sum_all(ad.mul(t, t))
        total = sq if total is None else ad.add(total, sq)
    if total is None:
        return constant(np.float64(0.0))
    return ad.mul(total, constant(np.float64(lam / 2.0)))


def relatedness_loss(xs: list[Tensor], ys: list[float], head: OrdinalHead,
                     lam: float, theta) -> Tensor:
    """Mean KL to the sparse targets plus the L2 term over ``theta``."""
    if not xs:
        raise ValueError("relatedness loss needs a nonempty batch")
    if len(xs) != len(ys):
        raise ValueError(f"batch size mismatch: {len(xs)} inputs vs {len(ys)} scores")
    if lam < 0.0:
        raise ValueError(f"regularization strength must be >= 0, got {lam}")
    total = None
    for x, y in zip(xs, ys):
        term = kl_to_target(sparse_target(y, head.k), _logits(x, head.w, head.b))
        total = term if total is None else ad.add(total, term)
    mean = ad.mul(total, constant(np.float64(1.0 / len(xs))))
    return ad.add(mean, l2_penalty(theta, lam))


def entailment_loss(xs: list[Tensor], labels: list[int], head: ClassHead,
                    lam: float, theta) -> Tensor:
    """Mean negative log-likelihood plus the L2 term over ``theta``."""
    if not xs:
        raise ValueError("entailment loss needs a nonempty batch")
    if len(xs) != len(labels):
        raise ValueError(f"batch size mismatch: {len(xs)} inputs vs {len(labels)} labels")
    if lam < 0.0:
        raise ValueError(f"regularization strength must be >= 0, got {lam}")
    for label in labels:
        if label not in range(head.n_classes):
            raise ValueError(f"label {label!r} outside 0..{head.n_classes - 1}")
    total = None
    for x, label in zip(xs, labels):
        lsm = ad.log_softmax(_logits(x, head.w, head.b))
        term = ad.neg(ad.sum_all(ad.slice_along(lsm, 0, label, label + 1)))
        total = term if total is None else ad.add(total, term)
    mean = ad.mul(total, constant(np.float64(1.0 / len(xs))))
    return ad.add(mean, l2_penalty(theta, lam))


def predict_score(x: Tensor, head: OrdinalHead) -> float:
    """Expected ramp value r . softmax(logits); always inside [1, K]."""
    probs = ad.softmax(_logits(x, head.w, head.b)).data
    return float(probs @ head.ramp)


def predict_label(x: Tensor, head: ClassHead) -> int:
    """Argmax class index; ties break toward the lowest index."""
    logits = _logits(x, head.w, head.b).data
    return int(np.argmax(logits))
