"""Two-phase block coordinate ascent over feature subsets.

Phase 0 searches a uniform per-block retained count k for the best starting
point. Phase 1 sweeps the blocks in order (Gauss-Seidel: each block argmax
sees the freshest values of the others), optimizing each block's retained
count while singles stay on. Phase 2 abandons the top-k structure and hill
climbs on the flat binary mask, one bit flip at a time, preferring smaller
feature sets on score ties.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .gbm import ImportanceRanking, SubsetScorer, importances
from .masks import FeatureMask, SelectionState, expand, flip


@dataclass(frozen=True)
class OcaConfig:
    eps1: float = 1e-6
    eps2: float = 1e-6
    itmax1: int = 20
    itmax2: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.eps1 < 0 or self.eps2 < 0:
            raise ValueError("tolerances must be non-negative")
        if self.itmax1 < 1 or self.itmax2 < 1:
            raise ValueError("iteration caps must be positive")


@dataclass(frozen=True)
class TraceEntry:
    """One tested candidate; ``accepted`` marks moves that became the incumbent."""

    phase: str      # jbest | block | flip | rfe
    step: int       # candidate index within the phase
    popcount: int
    score: float
    accepted: bool


@dataclass(frozen=True)
class SelectionResult:
    mask: FeatureMask
    score: float
    evaluations: int            # distinct scorer fits (cache misses)
    trace: tuple[TraceEntry, ...]
    stop_reason: str            # converged | max_iterations

    @property
    def candidates_tested(self) -> int:
        """Candidate evaluations before caching (trace length)."""
        return len(self.trace)


def jbest_init(
    scorer: SubsetScorer,
    ranking: ImportanceRanking,
    config: OcaConfig,
    trace: list | None = None,
) -> SelectionState:
    """Best uniform retained count: argmax over k = 1..min block length.

    Scores the state (k, ..., k, all singles on) for every k and returns the
    smallest maximizer. With no blocks there is nothing to search and the
    all-singles state is returned unevaluated.
    """
    spec = ranking.spec
    if spec.n_blocks == 0:
        return SelectionState(k=(), s=(1,) * spec.n_singles)
    trace = trace if trace is not None else []
    l_min = min(spec.block_lengths)
    best_k, best_score = 1, -float("inf")
    for step, k in enumerate(range(1, l_min + 1)):
        mask = expand(SelectionState.uniform(spec, k), ranking)
        s = scorer.evaluate(mask)
        better = s > best_score
        trace.append(TraceEntry("jbest", step, mask.popcount(), s, better))
        if better:
            best_k, best_score = k, s
    return SelectionState.uniform(spec, best_k)


def phase1_block_ascent(
    scorer: SubsetScorer,
    ranking: ImportanceRanking,
    init: SelectionState,
    config: OcaConfig,
    trace: list | None = None,
) -> SelectionState:
    """Per-block retained-count sweeps until the sweep-end score stabilizes.

    Each block's count is set to the smallest maximizer over 1..L_b with all
    other coordinates held at their freshest values. The first sweep always
    runs; sweeping stops when the end-of-sweep score moves by less than
    ``eps1``, when a sweep changes nothing, or at ``itmax1``.
    """
    spec = ranking.spec
    trace = trace if trace is not None else []
    state = init
    if spec.n_blocks == 0:
        return state
    prev = scorer.evaluate(expand(state, ranking))
    step = 0
    cur = prev
    for _ in range(config.itmax1):
        changed = False
        for b in range(spec.n_blocks):
            entries = []
            best_j, best_score, best_pos = None, -float("inf"), -1
            for j in range(1, spec.block_lengths[b] + 1):
                mask = expand(state.with_block(b, j), ranking)
                s = scorer.evaluate(mask)
                entries.append(TraceEntry("block", step, mask.popcount(), s, False))
                step += 1
                if s > best_score:
                    best_j, best_score, best_pos = j, s, len(entries) - 1
            entries[best_pos] = replace(entries[best_pos], accepted=True)
            trace.extend(entries)
            if best_j != state.k[b]:
                changed = True
            state = state.with_block(b, best_j)
            cur = best_score
        if abs(cur - prev) < config.eps1 or not changed:
            break
        prev = cur
    return state


def flip_ascent(
    scorer: SubsetScorer,
    init_mask: FeatureMask,
    eps: float,
    itmax: int,
    trace: list | None = None,
) -> SelectionResult:
    """Bit-flip hill climb over the flat mask, shared by phase 2 and the
    blockless baseline.

    Full sweeps over all feature indices; a flip is accepted when it strictly
    improves the score, or ties it with strictly fewer selected features (the
    tie preference makes every accepted move increase the lexicographic
    potential (score, -popcount), so the climb terminates even with eps = 0).
    All-zero candidates score 0 by convention rather than erroring. Sweeping
    stops when a full sweep moves the score by less than ``eps`` or accepts
    nothing, else at ``itmax``.
    """
    trace = trace if trace is not None else []
    n = scorer.n_features
    inc = init_mask
    inc_pop = inc.popcount()
    inc_score = scorer.evaluate(inc) if inc_pop else 0.0
    prev = inc_score
    stop_reason = "max_iterations"
    step = 0
    for _ in range(itmax):
        any_accepted = False
        for i in range(n):
            cand = flip(inc, i)
            cand_pop = cand.popcount()
            cand_score = scorer.evaluate(cand) if cand_pop else 0.0
            accepted = cand_score > inc_score or (
                cand_score == inc_score and cand_pop < inc_pop
            )
            trace.append(TraceEntry("flip", step, cand_pop, cand_score, accepted))
            step += 1
            if accepted:
                inc, inc_pop, inc_score = cand, cand_pop, cand_score
                any_accepted = True
        if abs(inc_score - prev) < eps or not any_accepted:
            stop_reason = "converged"
            break
        prev = inc_score
    return SelectionResult(
        mask=inc,
        score=inc_score,
        evaluations=scorer.evaluations,
        trace=tuple(trace),
        stop_reason=stop_reason,
    )


def phase2_flip_ascent(
    scorer: SubsetScorer,
    init_mask: FeatureMask,
    config: OcaConfig,
    trace: list | None = None,
) -> SelectionResult:
    """Flip ascent with the phase-2 tolerances of ``config``."""
    return flip_ascent(scorer, init_mask, config.eps2, config.itmax2, trace)


def run_oca(split, gbm_config, config: OcaConfig = OcaConfig()) -> SelectionResult:
    """Full pipeline: rank on all features, search the uniform k, ascend per
    block, then flip-ascend the flat mask.

    The returned trace concatenates all phases; ``evaluations`` counts every
    distinct scorer fit of the run, including the initial full-feature
    ranking fit.
    """
    scorer = SubsetScorer(split, gbm_config)
    full = FeatureMask.all_ones(scorer.n_features)
    _, model = scorer.evaluate_with_model(full)
    ranking = importances(model)

    trace: list[TraceEntry] = []
    state = jbest_init(scorer, ranking, config, trace=trace)
    state = phase1_block_ascent(scorer, ranking, state, config, trace=trace)
    return phase2_flip_ascent(scorer, expand(state, ranking), config, trace=trace)
