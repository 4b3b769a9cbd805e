"""Comparison methods run under the identical scorer: blockless bit-flip
ascent (BCA) and recursive feature elimination (RFE)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ascent import SelectionResult, TraceEntry, flip_ascent
from .gbm import GbmConfig, SubsetScorer, importances
from .masks import FeatureMask


@dataclass(frozen=True)
class RfeConfig:
    n_features_to_select: int
    step: int = 1

    def __post_init__(self):
        if self.n_features_to_select < 1:
            raise ValueError("n_features_to_select must be a positive integer")
        if self.step < 1:
            raise ValueError("step must be a positive integer")


def run_bca(split, gbm: GbmConfig, eps: float = 1e-6, itmax: int = 50) -> SelectionResult:
    """Bit-flip hill climb from the all-ones mask, with no block structure.

    Same sweep, acceptance and stopping machinery as the block-aware second
    phase; the only difference is the start point, which makes this a pure
    ablation of the block-aware initialization.
    """
    scorer = SubsetScorer(split, gbm)
    return flip_ascent(scorer, FeatureMask.all_ones(scorer.n_features), eps, itmax)


def _drop_lowest(mask: FeatureMask, importance: np.ndarray, n_drop: int) -> FeatureMask:
    selected = mask.indices()
    order = selected[np.lexsort((selected, importance[selected]))]
    bits = mask.bits.copy()
    bits[order[:n_drop]] = False
    return FeatureMask(bits)


def run_rfe(split, gbm: GbmConfig, rfe: RfeConfig) -> SelectionResult:
    """Recursive elimination: refit, re-rank, drop the ``step`` least
    important selected features (ascending-index tie-break), never past the
    target size."""
    scorer = SubsetScorer(split, gbm)
    n = scorer.n_features
    if rfe.n_features_to_select > n:
        raise ValueError(f"target {rfe.n_features_to_select} exceeds feature count {n}")

    mask = FeatureMask.all_ones(n)
    trace: list[TraceEntry] = []
    rnd = 0
    while True:
        s, model = scorer.evaluate_with_model(mask)
        trace.append(TraceEntry("rfe", rnd, mask.popcount(), s, True))
        remaining = mask.popcount() - rfe.n_features_to_select
        if remaining == 0:
            break
        ranking = importances(model)
        mask = _drop_lowest(mask, ranking.importance, min(rfe.step, remaining))
        rnd += 1
    return SelectionResult(
        mask=mask,
        score=s,
        evaluations=scorer.evaluations,
        trace=tuple(trace),
        stop_reason="converged",
    )


def rfe_sweep(split, gbm: GbmConfig, targets: list[int]) -> list[tuple[int, SelectionResult]]:
    """Score-vs-feature-count curve from one elimination pass.

    With unit steps the elimination order is a single sequence, so every
    target is a prefix cut of the same pass; each entry reports the
    evaluations its own prefix required.
    """
    if any(targets[i] < targets[i + 1] for i in range(len(targets) - 1)):
        raise ValueError("targets must be sorted in descending order")
    scorer = SubsetScorer(split, gbm)
    n = scorer.n_features
    if not targets:
        return []
    if targets[0] > n or targets[-1] < 1:
        raise ValueError(f"targets must lie within [1, {n}]")

    lowest = targets[-1]
    mask = FeatureMask.all_ones(n)
    at_size: dict[int, tuple[FeatureMask, float]] = {}
    trace: list[TraceEntry] = []
    rnd = 0
    while True:
        s, model = scorer.evaluate_with_model(mask)
        size = mask.popcount()
        trace.append(TraceEntry("rfe", rnd, size, s, True))
        at_size[size] = (mask, s)
        if size == lowest:
            break
        ranking = importances(model)
        mask = _drop_lowest(mask, ranking.importance, 1)
        rnd += 1

    out = []
    for t in targets:
        m, s = at_size[t]
        out.append(
            (
                t,
                SelectionResult(
                    mask=m,
                    score=s,
                    evaluations=n - t + 1,
                    trace=tuple(trace[: n - t + 1]),
                    stop_reason="converged",
                ),
            )
        )
    return out
