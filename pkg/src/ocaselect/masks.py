"""Search-state representations: per-block retained counts and flat binary masks.

The block-aware search keeps one integer per block (how many of its
best-ranked features to retain) plus one bit per single variable. The flat
binary mask over all features is what the scorer consumes; the second search
phase operates on masks directly, one bit flip at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import BlockSpec


@dataclass(frozen=True)
class FeatureMask:
    """Immutable binary vector over the flattened feature layout."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.bits, dtype=bool))
        if b.ndim != 1:
            raise ValueError("mask bits must be one-dimensional")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @classmethod
    def all_ones(cls, n: int) -> "FeatureMask":
        return cls(np.ones(n, dtype=bool))

    @classmethod
    def all_zeros(cls, n: int) -> "FeatureMask":
        return cls(np.zeros(n, dtype=bool))

    @classmethod
    def from_indices(cls, indices, n: int) -> "FeatureMask":
        bits = np.zeros(n, dtype=bool)
        bits[np.asarray(indices, dtype=int)] = True
        return cls(bits)

    @classmethod
    def from_bitstring(cls, s: str) -> "FeatureMask":
        return cls(np.frombuffer(s.encode(), dtype=np.uint8) == ord("1"))

    def __len__(self) -> int:
        return len(self.bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureMask) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.key())

    def key(self) -> bytes:
        """Stable byte key for memoization."""
        return self.bits.tobytes()

    def popcount(self) -> int:
        return int(self.bits.sum())

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def to_bitstring(self) -> str:
        return "".join("1" if v else "0" for v in self.bits)

    def selected_names(self, spec: BlockSpec) -> list[str]:
        names = spec.feature_names
        return [names[i] for i in self.indices()]


@dataclass(frozen=True)
class SelectionState:
    """Per-block retained counts ``k`` plus single-variable bits ``s``."""

    k: tuple[int, ...]
    s: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.s):
            raise ValueError("single-variable entries must be bits")

    def validate(self, spec: BlockSpec) -> None:
        if len(self.k) != spec.n_blocks or len(self.s) != spec.n_singles:
            raise ValueError("state shape does not match the block layout")
        for ki, li in zip(self.k, spec.block_lengths):
            if not 0 <= ki <= li:
                raise ValueError(f"retained count {ki} outside [0, {li}]")

    @classmethod
    def uniform(cls, spec: BlockSpec, k: int) -> "SelectionState":
        """All blocks retain ``k`` features, all singles on."""
        return cls(k=(k,) * spec.n_blocks, s=(1,) * spec.n_singles)

    def with_block(self, block: int, k: int) -> "SelectionState":
        ks = list(self.k)
        ks[block] = k
        return SelectionState(k=tuple(ks), s=self.s)


def expand(state: SelectionState, ranking) -> FeatureMask:
    """Flat mask retaining, per block, the top ``k_i`` features of the ranking.

    ``ranking`` supplies the per-block descending importance order; single
    bits carry over unchanged.
    """
    spec: BlockSpec = ranking.spec
    state.validate(spec)
    if len(ranking.per_block_order) != spec.n_blocks:
        raise ValueError("ranking block structure does not match the state")
    bits = np.zeros(spec.n_features, dtype=bool)
    for ki, order in zip(state.k, ranking.per_block_order):
        bits[np.asarray(order[:ki], dtype=int)] = True
    for bit, col in zip(state.s, spec.single_indices()):
        bits[col] = bool(bit)
    return FeatureMask(bits)


def flip(mask: FeatureMask, i: int) -> FeatureMask:
    """Copy of ``mask`` with bit ``i`` negated; the input is unchanged."""
    if not 0 <= i < len(mask):
        raise IndexError(f"feature index {i} out of range [0, {len(mask)})")
    bits = mask.bits.copy()
    bits[i] = not bits[i]
    return FeatureMask(bits)


def popcount_pct(mask: FeatureMask) -> float:
    """Selected features as a percentage of the layout width."""
    return 100.0 * mask.popcount() / len(mask)
