"""Completeness, correctness, accuracy and F1 of a segmentation.

Completeness averages, over result clusters, the largest fraction of the
cluster that falls in a single true cluster; correctness swaps the roles.
Accuracy is the smaller of the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Undefined


@dataclass(frozen=True)
class Partition:
    """Disjoint clusters of point ids drawn from ``range(universe)``."""

    clusters: tuple
    universe: int

    def __post_init__(self):
        clusters = tuple(frozenset(int(p) for p in c) for c in self.clusters)
        clusters = tuple(c for c in clusters if c)
        seen = set()
        for c in clusters:
            if seen & c:
                raise ValueError("clusters overlap")
            if any(p < 0 or p >= self.universe for p in c):
                raise ValueError("point id outside the universe")
            seen |= c
        object.__setattr__(self, "clusters", clusters)

    def __len__(self):
        return len(self.clusters)

    @classmethod
    def from_labels(cls, labels, ignore=()) -> "Partition":
        """Group point ids by label. Negative labels and ``ignore`` labels are left out."""
        labels = np.asarray(labels, dtype=np.int64)
        skip = (labels < 0) | np.isin(labels, list(ignore))
        ids = np.flatnonzero(~skip)
        groups = {}
        for p, lab in zip(ids.tolist(), labels[ids].tolist()):
            groups.setdefault(lab, []).append(p)
        return cls(tuple(groups[k] for k in sorted(groups)), len(labels))

    def label_array(self) -> np.ndarray:
        out = np.full(self.universe, -1, dtype=np.int64)
        for i, c in enumerate(self.clusters):
            out[list(c)] = i
        return out


@dataclass(frozen=True)
class ScoreReport:
    n_com: float
    n_cor: float
    n_acc: float
    n_f1: float
    dropped: int = 0


def _aligned(result: Partition, truth: Partition):
    if result.universe != truth.universe:
        raise ValueError("partitions are over different universes")
    a, b = result.label_array(), truth.label_array()
    both = (a >= 0) & (b >= 0)
    dropped = int(((a >= 0) | (b >= 0)).sum() - both.sum())
    return a[both], b[both], dropped


def _best_overlap_mean(rows: np.ndarray, cols: np.ndarray) -> float:
    # mean over row-clusters of max_col |row ∩ col| / |row|
    if len(rows) == 0:
        raise Undefined("no points to score")
    _, r = np.unique(rows, return_inverse=True)
    _, c = np.unique(cols, return_inverse=True)
    nc = c.max() + 1
    pair, counts = np.unique(r.astype(np.int64) * nc + c, return_counts=True)
    pr = pair // nc
    best = np.zeros(r.max() + 1, dtype=np.int64)
    np.maximum.at(best, pr, counts)
    size = np.bincount(r)
    # fsum is exactly rounded, so the result does not depend on cluster order
    return math.fsum((best / size).tolist()) / len(size)


def completeness(result: Partition, truth: Partition) -> float:
    if len(result) == 0:
        raise Undefined("result partition is empty")
    a, b, _ = _aligned(result, truth)
    return _best_overlap_mean(a, b)


def correctness(result: Partition, truth: Partition) -> float:
    if len(truth) == 0:
        raise Undefined("truth partition is empty")
    a, b, _ = _aligned(result, truth)
    return _best_overlap_mean(b, a)


def score(result: Partition, truth: Partition) -> ScoreReport:
    """Full report. Points labelled in only one partition are dropped and counted."""
    if len(result) == 0 or len(truth) == 0:
        raise Undefined("both partitions must be non-empty")
    a, b, dropped = _aligned(result, truth)
    n_com = _best_overlap_mean(a, b)
    n_cor = _best_overlap_mean(b, a)
    denom = n_com + n_cor
    f1 = 2 * n_com * n_cor / denom if denom > 0 else 0.0
    return ScoreReport(n_com, n_cor, min(n_com, n_cor), f1, dropped)
