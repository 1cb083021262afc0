"""Evaluation metrics for both tasks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _paired(pred, gold, name):
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gold, dtype=np.float64)
    if p.size == 0 or p.shape != g.shape or p.ndim != 1:
        raise ValueError(f"{name} needs two equal-length nonempty vectors, got {p.shape} vs {g.shape}")
    return p, g


def pearson(pred, gold) -> float:
    """Sample Pearson correlation; rejects zero-variance inputs."""
    p, g = _paired(pred, gold, "pearson")
    pc = p - p.mean()
    gc = g - g.mean()
    vp = pc @ pc
    vg = gc @ gc
    if vp == 0.0 or vg == 0.0:
        raise ValueError(
            f"pearson undefined: zero variance (pred var {vp}, gold var {vg})"
        )
    return float((pc @ gc) / np.sqrt(vp * vg))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(pred, gold) -> float:
    """Pearson correlation of average ranks."""
    p, g = _paired(pred, gold, "spearman")
    return pearson(_average_ranks(p), _average_ranks(g))


def mse(pred, gold) -> float:
    p, g = _paired(pred, gold, "mse")
    diff = p - g
    return float(diff @ diff / p.size)


def accuracy(pred_labels, gold_labels) -> float:
    if len(pred_labels) != len(gold_labels) or not gold_labels:
        raise ValueError(
            f"accuracy needs equal-length nonempty lists, got {len(pred_labels)} vs {len(gold_labels)}"
        )
    hits = sum(1 for p, g in zip(pred_labels, gold_labels) if p == g)
    return hits / len(gold_labels)


def confusion(pred_labels, gold_labels, n_classes: int) -> np.ndarray:
    """counts[gold, pred]; sums to the number of examples."""
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for p, g in zip(pred_labels, gold_labels):
        counts[g, p] += 1
    return counts


@dataclass
class MetricsReport:
    """Container for whichever task's metrics were computed."""

    n_examples: int
    pearson_r: float | None = None
    spearman_rho: float | None = None
    mse: float | None = None
    accuracy: float | None = None
    confusion: np.ndarray | None = None
    labels: tuple[str, ...] = field(default_factory=tuple)

    def format(self) -> str:
        lines = [f"examples           {self.n_examples}"]
        if self.pearson_r is not None:
            lines.append(f"pearson            {self.pearson_r:.6f}")
        if self.spearman_rho is not None:
            lines.append(f"spearman           {self.spearman_rho:.6f}")
        if self.mse is not None:
            lines.append(f"mse                {self.mse:.6f}")
        if self.accuracy is not None:
            lines.append(f"accuracy           {self.accuracy:.6f}")
        if self.confusion is not None:
            lines.append("confusion (rows gold, cols predicted):")
            for i, row in enumerate(self.confusion):
                name = self.labels[i] if i < len(self.labels) else str(i)
                lines.append(f"  {name:<14}" + " ".join(f"{v:6d}" for v in row))
        return "\n".join(lines)
