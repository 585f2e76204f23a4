from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcaod.context import (
    build_context,
    closure_size,
    closure_size_matrix,
    closure_sizes_all,
    empty_mask,
    full_mask,
    mask_from_indices,
    mask_indices,
    pack_bits,
    popcount,
    query_intent,
    select_objects,
    unpack_bits,
)
from fcaod.errors import IndexOutOfRange, LengthMismatch
from oracles import closure, closure_size_scan, random_rows


def bits(mask, n):
    return set(mask_indices(mask, n).tolist())


class TestPacking:
    @pytest.mark.parametrize("n", [0, 1, 63, 64, 65, 200])
    def test_roundtrip(self, n):
        rng = np.random.default_rng(n)
        b = rng.random((3, n)) < 0.5
        assert np.array_equal(unpack_bits(pack_bits(b), n), b)

    def test_popcount_and_padding(self):
        m = full_mask(70)
        assert m.shape == (2,)
        assert popcount(m) == 70
        assert popcount(empty_mask(70)) == 0

    def test_mask_from_indices_range(self):
        with pytest.raises(IndexOutOfRange):
            mask_from_indices([5], 5)


class TestBuildContext:
    def test_transposition(self):
        ctx = build_context([{0, 1}, {1}, {0, 2}], 3)
        assert bits(ctx.feature_extents[1], 3) == {0, 1}
        assert bits(ctx.feature_extents[0], 3) == {0, 2}
        assert bits(ctx.feature_extents[2], 3) == {2}

    def test_empty(self):
        ctx = build_context([], 5)
        assert ctx.num_objects == 0
        assert ctx.num_features == 5

    def test_constant_column(self):
        ctx = build_context([{0}, {0}, {0}], 1)
        assert bits(ctx.feature_extents[0], 3) == {0, 1, 2}

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            build_context([{0, 3}], 3)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            build_context([{0}], 2, object_ids=["a", "b"])
        with pytest.raises(LengthMismatch):
            build_context([{0}], 2, feature_names=["f"])

    def test_immutable(self):
        ctx = build_context([{0}], 2)
        with pytest.raises(ValueError):
            ctx.object_intents[0, 0] = 0

    def test_blocks_must_be_one_hot(self):
        with pytest.raises(LengthMismatch):
            build_context([{0, 1}], 4, blocks=[(0, 2), (2, 4)])
        ctx = build_context([{1, 2}, {0, 3}], 4, blocks=[(0, 2), (2, 4)])
        assert ctx.codes.tolist() == [[1, 0], [0, 1]]

    @given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.integers(0, 70))
    @settings(max_examples=50, deadline=None)
    def test_dual_storage(self, seed, n, f):
        rng = np.random.default_rng(seed)
        rows = random_rows(rng, n, f, rng.uniform(0.1, 0.9))
        ctx = build_context(rows, f)
        by_row = unpack_bits(ctx.object_intents, f)
        by_col = unpack_bits(ctx.feature_extents, n)
        assert np.array_equal(by_row, by_col.T)
        for a, row in enumerate(rows):
            assert bits(ctx.object_intents[a], f) == row


class TestQueryIntent:
    def test_readback(self):
        ctx = build_context([{0, 1}, {1}, set()], 2)
        assert bits(query_intent(ctx, 0), 2) == {0, 1}
        assert bits(query_intent(ctx, 1), 2) == {1}
        assert bits(query_intent(ctx, 2), 2) == set()

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            query_intent(build_context([{0}], 1), 1)


class TestClosureSize:
    ctx = build_context([{0, 1}, {0}, {1}], 2)

    def test_full_agenda(self):
        # brute force: only object 0 has both features
        assert closure_size(self.ctx, mask_from_indices({0, 1}, 2), full_mask(2), full_mask(3)) == 1

    def test_restricted_agenda(self):
        # brute force: objects 0 and 1 have feature 0
        assert closure_size(self.ctx, mask_from_indices({0, 1}, 2), mask_from_indices({0}, 2), full_mask(3)) == 2

    def test_vacuous(self):
        ctx = build_context([{0}] * 7, 2)
        assert closure_size(ctx, mask_from_indices({0}, 2), mask_from_indices({1}, 2), full_mask(7)) == 7

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            closure_size(self.ctx, full_mask(2), full_mask(2), full_mask(130))


class TestClosureSizesAll:
    ctx = build_context([{0}, {0}, {1}], 2)

    def test_all(self):
        assert closure_sizes_all(self.ctx, full_mask(2), full_mask(3)).tolist() == [2, 2, 1]

    def test_empty_agenda(self):
        assert closure_sizes_all(self.ctx, empty_mask(2), full_mask(3)).tolist() == [3, 3, 3]

    def test_masked_population(self):
        pop = mask_from_indices({0, 1}, 3)
        assert closure_sizes_all(self.ctx, full_mask(2), pop).tolist() == [2, 2, 0]

    def test_block_and_bitset_routes_agree(self):
        rng = np.random.default_rng(3)
        blocks = [(0, 4), (4, 9), (9, 12)]
        rows = [{int(rng.integers(s, e)) for s, e in blocks} for _ in range(60)]
        ctx = build_context(rows, 12, blocks=blocks)
        queries = build_context(rows[:10], 12, blocks=blocks)
        masks = []
        for k in range(0, 4):
            for combo in combinations(range(3), k):
                masks.append(mask_from_indices([x for j in combo for x in range(*blocks[j])], 12))
        pop = pack_bits(rng.random(60) < 0.7)
        fast = closure_size_matrix(ctx, masks, pop, queries, method="blocks")
        slow = closure_size_matrix(ctx, masks, pop, queries, method="bitset")
        assert np.array_equal(fast, slow)
        for q, row in enumerate(rows[:10]):
            for t, m in enumerate(masks):
                agenda = bits(m, 12)
                popset = bits(pop, 60)
                assert fast[q, t] == closure_size_scan(rows, row, agenda, popset)

    def test_blocks_route_requires_aligned_agenda(self):
        ctx = build_context([{0, 2}, {1, 3}], 4, blocks=[(0, 2), (2, 4)])
        with pytest.raises(LengthMismatch):
            closure_sizes_all(ctx, mask_from_indices({0}, 4), full_mask(2), method="blocks")
        # auto falls back to bitsets for a partial block
        assert closure_sizes_all(ctx, mask_from_indices({0}, 4), full_mask(2)).tolist() == [1, 2]

    def test_threads_do_not_change_result(self):
        rng = np.random.default_rng(0)
        rows = random_rows(rng, 40, 9, 0.4)
        ctx = build_context(rows, 9)
        masks = [mask_from_indices(c, 9) for c in combinations(range(9), 2)]
        a = closure_size_matrix(ctx, masks, full_mask(40))
        b = closure_size_matrix(ctx, masks, full_mask(40), threads=4)
        assert np.array_equal(a, b)

    def test_select_objects(self):
        ctx = build_context([{0}, {1}, {0, 1}], 2, object_ids=["a", "b", "c"])
        sub = select_objects(ctx, [2, 0])
        assert sub.object_ids == ("c", "a")
        assert bits(sub.object_intents[0], 2) == {0, 1}


@st.composite
def small_context(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(1, 12))
    f = draw(st.integers(1, 10))
    rows = random_rows(rng, n, f, rng.uniform(0.1, 0.9))
    return rows, f, rng


class TestClosureProperties:
    @given(small_context())
    @settings(max_examples=60, deadline=None)
    def test_oracle_equivalence(self, case):
        rows, f, rng = case
        n = len(rows)
        ctx = build_context(rows, f)
        features = range(min(f, 5))
        pops = [set(range(n)), set(np.flatnonzero(rng.random(n) < 0.5).tolist())]
        for k in range(len(features) + 1):
            for agenda in combinations(features, k):
                amask = mask_from_indices(agenda, f)
                for pop in pops:
                    pmask = mask_from_indices(pop, n)
                    got = closure_sizes_all(ctx, amask, pmask)
                    for a in range(n):
                        want = closure_size_scan(rows, rows[a], agenda, pop)
                        assert closure_size(ctx, query_intent(ctx, a), amask, pmask) == want
                        assert got[a] == want

    @given(small_context())
    @settings(max_examples=60, deadline=None)
    def test_monotonicity(self, case):
        rows, f, rng = case
        n = len(rows)
        ctx = build_context(rows, f)
        small = rng.random(f) < 0.4
        big = small | (rng.random(f) < 0.4)
        pop_small = rng.random(n) < 0.5
        pop_big = pop_small | (rng.random(n) < 0.5)
        s_small = closure_sizes_all(ctx, pack_bits(small), pack_bits(pop_big))
        s_big = closure_sizes_all(ctx, pack_bits(big), pack_bits(pop_big))
        assert np.all(s_big <= s_small)
        p_small = closure_sizes_all(ctx, pack_bits(big), pack_bits(pop_small))
        assert np.all(p_small <= s_big)

    @given(small_context())
    @settings(max_examples=60, deadline=None)
    def test_galois_idempotence(self, case):
        rows, f, rng = case
        n = len(rows)
        everyone = set(range(n))
        agenda = set(np.flatnonzero(rng.random(f) < 0.6).tolist())
        for a in range(n):
            once = closure(rows, {a}, agenda, everyone)
            assert a in once
            assert closure(rows, once, agenda, everyone) == once
