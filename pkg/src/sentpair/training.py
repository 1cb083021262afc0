"""AdaGrad minibatch training and dataset-level evaluation.

The loop is fully deterministic: shuffling derives from (seed, epoch), the
accumulator updates are elementwise, and batches execute in order. Two runs
with the same seed, config, and data produce bit-identical parameters.
"""

from __future__ import annotations

import json
import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from sentpair import metrics, objectives
from sentpair.autodiff import Tape, Tensor
from sentpair.config import Config
from sentpair.data import PairExample, batch_iter, label_index, truncate_example
from sentpair.model import PairModel

logger = logging.getLogger(__name__)


class AdaGradState:
    """Per-parameter squared-gradient accumulators, started at zero."""

    def __init__(self, params: "OrderedDict[str, Tensor]"):
        self.acc: "OrderedDict[str, np.ndarray]" = OrderedDict(
            (name, np.zeros_like(t.data)) for name, t in params.items()
        )


def adagrad_step(params: "OrderedDict[str, Tensor]", grads: dict,
                 state: AdaGradState, rate: float, eps: float) -> None:
    """acc += g^2; theta -= rate * g / (sqrt(acc) + eps).

    The step is atomic: a non-finite gradient anywhere rejects the whole
    update before any accumulator or parameter changes.
    """
    if eps <= 0:
        raise ValueError(f"adagrad eps must be > 0, got {eps}")
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient in {name}")
    for name, tensor in params.items():
        g = grads.get(name)
        if g is None:
            continue
        acc = state.acc[name]
        acc += g * g
        tensor.data = tensor.data - rate * g / (np.sqrt(acc) + eps)


def _clip_gradients(grads: dict, clip: float) -> None:
    """Scale all gradients down to a global L2 norm of ``clip`` if above it."""
    total = 0.0
    for g in grads.values():
        total += float(g.ravel() @ g.ravel())
    norm = np.sqrt(total)
    if norm > clip:
        scale = clip / norm
        for name in grads:
            grads[name] = grads[name] * scale


@dataclass
class EpochStats:
    epoch: int
    mean_loss: float
    n_batches: int
    truncated_examples: int


def prepare_examples(examples: list[PairExample], max_len: int) -> tuple[list[PairExample], int]:
    prepared = []
    truncated = 0
    for e in examples:
        cut_example, cut = truncate_example(e, max_len)
        truncated += int(cut)
        prepared.append(cut_example)
    if truncated:
        logger.info("truncated %d/%d examples to %d tokens", truncated, len(examples), max_len)
    return prepared, truncated


def iter_train(model: PairModel, examples: list[PairExample], config: Config, log_fh=None):
    """Run one epoch per iteration, yielding EpochStats after each.

    Callers that want early stopping just stop consuming the generator.
    """
    if not examples:
        raise ValueError("training needs a nonempty dataset")
    prepared, truncated = prepare_examples(examples, config.max_len)
    params = model.parameters()
    state = AdaGradState(params)
    step = 0
    for epoch in range(1, config.epochs + 1):
        losses = []
        for batch_no, batch in enumerate(batch_iter(prepared, config.batch_size, config.seed, epoch)):
            with Tape() as tape:
                loss = model.loss(batch)
                tape.backward(loss)
            grads = {}
            for name, tensor in params.items():
                if tensor.grad is not None:
                    grads[name] = tensor.grad
                    tensor.zero_grad()
            if config.grad_clip > 0:
                _clip_gradients(grads, config.grad_clip)
            try:
                adagrad_step(params, grads, state, config.learning_rate, config.adagrad_eps)
            except ValueError as exc:
                raise ValueError(f"epoch {epoch} batch {batch_no}: {exc}") from None
            step += 1
            losses.append(loss.item())
            if log_fh is not None:
                log_fh.write(json.dumps(
                    {"epoch": epoch, "step": step, "loss": losses[-1]},
                    sort_keys=True,
                ) + "\n")
        stats = EpochStats(
            epoch=epoch,
            mean_loss=float(np.mean(losses)),
            n_batches=len(losses),
            truncated_examples=truncated,
        )
        if log_fh is not None:
            log_fh.write(json.dumps(
                {"epoch": epoch, "mean_loss": stats.mean_loss, "batches": stats.n_batches},
                sort_keys=True,
            ) + "\n")
            log_fh.flush()
        yield stats


def train(model: PairModel, examples: list[PairExample], config: Config,
          log_path: str | None = None) -> list[EpochStats]:
    """Run the configured number of epochs; returns per-epoch stats."""
    if log_path is not None:
        with open(log_path, "w", encoding="utf-8") as fh:
            return list(iter_train(model, examples, config, log_fh=fh))
    return list(iter_train(model, examples, config))


def evaluate(model: PairModel, examples: list[PairExample]) -> metrics.MetricsReport:
    """Task-appropriate metrics over a dataset (sentences capped as in training)."""
    if not examples:
        raise ValueError("evaluation needs a nonempty dataset")
    prepared, _ = prepare_examples(examples, model.config.max_len)
    if model.config.task == "relatedness":
        preds = [model.predict_score(e.tokens_a, e.tokens_b) for e in prepared]
        golds = [e.score for e in prepared]
        return metrics.MetricsReport(
            n_examples=len(prepared),
            pearson_r=metrics.pearson(preds, golds),
            spearman_rho=metrics.spearman(preds, golds),
            mse=metrics.mse(preds, golds),
        )
    pred_idx = [label_index(model.predict_label(e.tokens_a, e.tokens_b)) for e in prepared]
    gold_idx = [label_index(e.label) for e in prepared]
    return metrics.MetricsReport(
        n_examples=len(prepared),
        accuracy=metrics.accuracy(pred_idx, gold_idx),
        confusion=metrics.confusion(pred_idx, gold_idx, len(objectives.ENTAILMENT_LABELS)),
        labels=objectives.ENTAILMENT_LABELS,
    )


def mean_kl(model: PairModel, examples: list[PairExample]) -> float:
    """Mean KL of the relatedness head to the sparse targets, no L2 term."""
    if model.config.task != "relatedness":
        raise ValueError("mean_kl applies to relatedness models only")
    prepared, _ = prepare_examples(examples, model.config.max_len)
    xs = [model.pair_features(e.tokens_a, e.tokens_b) for e in prepared]
    ys = [e.score for e in prepared]
    return objectives.relatedness_loss(xs, ys, model.head, 0.0, []).item()
