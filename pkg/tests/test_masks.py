import numpy as np
import pytest

from ocaselect import BlockSpec, FeatureMask, SelectionState, expand, flip, popcount_pct
from ocaselect.gbm import ImportanceRanking


def make_ranking(spec, per_block_order):
    n = spec.n_features
    imp = np.zeros(n)
    return ImportanceRanking(spec=spec, importance=imp, per_block_order=per_block_order)


def naive_expand(state, spec, per_block_order):
    """Independent re-statement of the expansion rule, for cross-checking."""
    selected = set()
    for k_i, order in zip(state.k, per_block_order):
        selected.update(order[:k_i])
    for bit, col in zip(state.s, range(spec.n_block_features, spec.n_features)):
        if bit:
            selected.add(col)
    return np.array([i in selected for i in range(spec.n_features)])


def test_expand_hand_example():
    # blocks {3,2}, one single; orders ([2,0,1],[4,3]); keep top-2 and top-1
    spec = BlockSpec.from_lengths([3, 2], n_singles=1)
    ranking = make_ranking(spec, ((2, 0, 1), (4, 3)))
    state = SelectionState(k=(2, 1), s=(1,))
    mask = expand(state, ranking)
    assert mask.bits.tolist() == [True, False, True, False, True, True]


def test_expand_full_and_empty():
    spec = BlockSpec.from_lengths([3, 2], n_singles=2)
    ranking = make_ranking(spec, ((0, 1, 2), (3, 4)))
    full = expand(SelectionState(k=(3, 2), s=(1, 1)), ranking)
    assert full.bits.all() and len(full) == 7
    empty = expand(SelectionState(k=(0, 0), s=(0, 0)), ranking)
    assert not empty.bits.any()


def test_expand_matches_naive_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(50):
        lengths = rng.integers(1, 6, size=rng.integers(1, 4)).tolist()
        p = int(rng.integers(0, 3))
        spec = BlockSpec.from_lengths(lengths, n_singles=p)
        orders = tuple(
            tuple(int(i) for i in rng.permutation(range(sl.start, sl.stop)))
            for sl in spec.block_slices()
        )
        ranking = make_ranking(spec, orders)
        state = SelectionState(
            k=tuple(int(rng.integers(0, L + 1)) for L in lengths),
            s=tuple(int(rng.integers(0, 2)) for _ in range(p)),
        )
        got = expand(state, ranking).bits
        want = naive_expand(state, spec, orders)
        assert np.array_equal(got, want)


def test_expand_monotone_nested():
    # raising one k by 1 adds exactly one bit and removes none
    rng = np.random.default_rng(1)
    spec = BlockSpec.from_lengths([4, 3], n_singles=1)
    orders = tuple(
        tuple(int(i) for i in rng.permutation(range(sl.start, sl.stop)))
        for sl in spec.block_slices()
    )
    ranking = make_ranking(spec, orders)
    for b, L in enumerate(spec.block_lengths):
        for a in range(L):
            lo = expand(SelectionState(k=tuple(a if i == b else 1 for i in range(2)), s=(1,)), ranking)
            hi = expand(SelectionState(k=tuple(a + 1 if i == b else 1 for i in range(2)), s=(1,)), ranking)
            added = hi.bits & ~lo.bits
            removed = lo.bits & ~hi.bits
            assert added.sum() == 1 and removed.sum() == 0


def test_expand_structure_mismatch():
    spec = BlockSpec.from_lengths([3, 2], n_singles=1)
    ranking = make_ranking(spec, ((0, 1, 2), (3, 4)))
    with pytest.raises(ValueError):
        expand(SelectionState(k=(2,), s=(1,)), ranking)
    with pytest.raises(ValueError):
        expand(SelectionState(k=(5, 1), s=(1,)), ranking)


def test_flip_involution_and_single_bit():
    rng = np.random.default_rng(2)
    for _ in range(25):
        n = int(rng.integers(1, 12))
        m = FeatureMask(rng.integers(0, 2, size=n).astype(bool))
        i = int(rng.integers(0, n))
        flipped = flip(m, i)
        assert flip(flipped, i) == m
        assert (m.bits != flipped.bits).sum() == 1
        assert abs(flipped.popcount() - m.popcount()) == 1
        # input untouched
        assert m.bits.flags.writeable is False


def test_flip_out_of_range():
    m = FeatureMask.all_zeros(4)
    with pytest.raises(IndexError):
        flip(m, 4)
    with pytest.raises(IndexError):
        flip(m, -1)
    assert flip(m, 0).popcount() == 1


def test_popcount_pct():
    m = FeatureMask.from_indices(range(24), 144)
    assert round(popcount_pct(m), 2) == 16.67
    assert popcount_pct(FeatureMask.all_zeros(10)) == 0.0
    assert popcount_pct(FeatureMask.all_ones(10)) == 100.0


def test_bitstring_roundtrip():
    m = FeatureMask(np.array([1, 0, 1, 1, 0], dtype=bool))
    assert m.to_bitstring() == "10110"
    assert FeatureMask.from_bitstring("10110") == m


def test_selected_names():
    spec = BlockSpec.from_lengths([2], n_singles=1)
    m = FeatureMask(np.array([True, False, True]))
    assert m.selected_names(spec) == ["B1_1", "S_1"]


def test_state_validation():
    with pytest.raises(ValueError):
        SelectionState(k=(1,), s=(2,))
    spec = BlockSpec.from_lengths([3], n_singles=0)
    SelectionState(k=(3,), s=()).validate(spec)
    with pytest.raises(ValueError):
        SelectionState(k=(4,), s=()).validate(spec)
