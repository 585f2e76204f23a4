"""Formal contexts stored as dual word-packed bit matrices.

A context ``(A, X, I)`` is kept twice: once row-wise (the intent of each
object as a bit vector over features) and once column-wise (the extent of
each feature as a bit vector over objects). Closure sizes of singletons are
then a single AND-reduction over feature extents followed by a popcount.

Masks are plain ``numpy.uint64`` arrays; bit ``i`` lives in word ``i // 64``
at position ``i % 64``. Padding bits past the logical length are always zero.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import IndexOutOfRange, LengthMismatch

WORD_BITS = 64
# agenda keys are packed below this bit; agenda index goes above it
_KEY_BITS = 40

FeatureMask = np.ndarray
ObjectMask = np.ndarray


def n_words(n_bits: int) -> int:
    return (n_bits + WORD_BITS - 1) // WORD_BITS


def pack_bits(bits) -> np.ndarray:
    """Pack a boolean array along its last axis into uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    n = bits.shape[-1]
    padded = np.zeros(bits.shape[:-1] + (n_words(n) * WORD_BITS,), dtype=bool)
    padded[..., :n] = bits
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, n_bits: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    bits = np.unpackbits(words.view(np.uint8), axis=-1, bitorder="little")
    return bits[..., :n_bits].astype(bool)


def popcount(words: np.ndarray) -> int | np.ndarray:
    """Number of set bits, summed over the last axis."""
    counts = np.bitwise_count(np.asarray(words, dtype=np.uint64)).sum(axis=-1, dtype=np.int64)
    return int(counts) if np.ndim(counts) == 0 else counts


def mask_from_indices(indices: Iterable[int], n_bits: int) -> np.ndarray:
    bits = np.zeros(n_bits, dtype=bool)
    idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n_bits):
        raise IndexOutOfRange(f"bit index out of range for length {n_bits}")
    bits[idx] = True
    return pack_bits(bits)


def mask_indices(mask: np.ndarray, n_bits: int) -> np.ndarray:
    return np.flatnonzero(unpack_bits(mask, n_bits))


def full_mask(n_bits: int) -> np.ndarray:
    return pack_bits(np.ones(n_bits, dtype=bool))


def empty_mask(n_bits: int) -> np.ndarray:
    return np.zeros(n_words(n_bits), dtype=np.uint64)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FormalContext:
    """Immutable formal context with row and column bit encodings.

    ``blocks`` optionally declares feature ranges ``[start, stop)`` such that
    every object has exactly one feature in each range (the layout produced by
    interval scaling). ``codes[a, j]`` then holds the offset of object ``a``'s
    feature inside block ``j``.
    """

    num_objects: int
    num_features: int
    object_intents: np.ndarray
    feature_extents: np.ndarray
    object_ids: tuple
    feature_names: tuple
    blocks: Optional[tuple] = None
    codes: Optional[np.ndarray] = None

    def incidence(self) -> np.ndarray:
        """Dense boolean ``num_objects x num_features`` view of the relation."""
        return unpack_bits(self.object_intents, self.num_features)

    def index_of(self, object_id) -> int:
        try:
            return self.object_ids.index(object_id)
        except ValueError:
            raise IndexOutOfRange(f"unknown object id {object_id!r}") from None


def context_from_incidence(
    incidence,
    object_ids: Optional[Sequence] = None,
    feature_names: Optional[Sequence[str]] = None,
    blocks: Optional[Sequence[tuple[int, int]]] = None,
) -> FormalContext:
    """Build a context from a dense boolean ``objects x features`` matrix."""
    inc = np.asarray(incidence, dtype=bool)
    if inc.ndim != 2:
        raise LengthMismatch("incidence must be two-dimensional")
    n, f = inc.shape
    object_ids = tuple(range(n)) if object_ids is None else tuple(object_ids)
    feature_names = tuple(f"f{j}" for j in range(f)) if feature_names is None else tuple(feature_names)
    if len(object_ids) != n:
        raise LengthMismatch(f"{len(object_ids)} object ids for {n} objects")
    if len(feature_names) != f:
        raise LengthMismatch(f"{len(feature_names)} feature names for {f} features")

    codes = None
    if blocks is not None:
        blocks = tuple((int(s), int(e)) for s, e in blocks)
        codes = np.zeros((n, len(blocks)), dtype=np.int64)
        for j, (start, stop) in enumerate(blocks):
            if not 0 <= start < stop <= f:
                raise IndexOutOfRange(f"block {j} = [{start}, {stop}) outside {f} features")
            part = inc[:, start:stop]
            if n and not np.all(part.sum(axis=1) == 1):
                raise LengthMismatch(f"block {j} is not one-hot for every object")
            codes[:, j] = part.argmax(axis=1) if n else 0
        codes = _frozen(codes)

    return FormalContext(
        num_objects=n,
        num_features=f,
        object_intents=_frozen(pack_bits(inc)),
        feature_extents=_frozen(pack_bits(inc.T)),
        object_ids=object_ids,
        feature_names=feature_names,
        blocks=blocks,
        codes=codes,
    )


def build_context(
    rows: Sequence[Iterable[int]],
    num_features: int,
    object_ids: Optional[Sequence] = None,
    feature_names: Optional[Sequence[str]] = None,
    blocks: Optional[Sequence[tuple[int, int]]] = None,
) -> FormalContext:
    """Build a context from per-object feature index sets."""
    if object_ids is not None and len(object_ids) != len(rows):
        raise LengthMismatch(f"{len(object_ids)} object ids for {len(rows)} rows")
    inc = np.zeros((len(rows), num_features), dtype=bool)
    for a, row in enumerate(rows):
        for x in row:
            if not 0 <= x < num_features:
                raise IndexOutOfRange(f"row {a}: feature {x} not in [0, {num_features})")
            inc[a, x] = True
    return context_from_incidence(inc, object_ids, feature_names, blocks)


def query_intent(ctx: FormalContext, a: int) -> FeatureMask:
    if not 0 <= a < ctx.num_objects:
        raise IndexOutOfRange(f"object {a} not in [0, {ctx.num_objects})")
    return ctx.object_intents[a].copy()


def _check_len(mask: np.ndarray, n_bits: int, what: str) -> np.ndarray:
    mask = np.asarray(mask, dtype=np.uint64)
    if mask.shape[-1:] != (n_words(n_bits),):
        raise LengthMismatch(f"{what} has {mask.shape[-1]} words, expected {n_words(n_bits)}")
    return mask


def closure_size(
    ctx: FormalContext,
    intent: FeatureMask,
    agenda: FeatureMask,
    population: ObjectMask,
) -> int:
    """Number of population objects whose intent contains ``intent & agenda``."""
    intent = _check_len(intent, ctx.num_features, "intent")
    agenda = _check_len(agenda, ctx.num_features, "agenda")
    population = _check_len(population, ctx.num_objects, "population")
    features = mask_indices(intent & agenda, ctx.num_features)
    if features.size == 0:
        return popcount(population)
    common = np.bitwise_and.reduce(ctx.feature_extents[features], axis=0)
    return popcount(common & population)


def _bitset_sizes(ctx, agenda, population, queries) -> np.ndarray:
    keys = queries.object_intents & agenda
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    # objects sharing a projected intent share a closure
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    sizes = np.empty(len(uniq), dtype=np.int64)
    pop_size = popcount(population)
    for u, key in enumerate(uniq):
        features = mask_indices(key, ctx.num_features)
        if features.size == 0:
            sizes[u] = pop_size
        else:
            common = np.bitwise_and.reduce(ctx.feature_extents[features], axis=0)
            sizes[u] = popcount(common & population)
    return sizes[inverse.reshape(-1)]


def agenda_blocks(ctx: FormalContext, agenda: FeatureMask) -> Optional[tuple[int, ...]]:
    """Blocks fully covered by ``agenda``, or None if it cuts through a block."""
    if ctx.blocks is None:
        return None
    bits = unpack_bits(agenda, ctx.num_features)
    covered = []
    for j, (start, stop) in enumerate(ctx.blocks):
        part = bits[start:stop]
        if part.all():
            covered.append(j)
        elif part.any():
            return None
    if bits.sum() != sum(ctx.blocks[j][1] - ctx.blocks[j][0] for j in covered):
        return None
    return tuple(covered)


def _block_keys(pop_codes, query_codes, block_sets, radix):
    """Integer keys per (object, agenda); equal keys <=> equal projected intents."""
    P, Q, T = len(pop_codes), len(query_codes), len(block_sets)
    kp = np.zeros((P, T), dtype=np.int64)
    kq = np.zeros((Q, T), dtype=np.int64)
    by_size = defaultdict(list)
    for t, bs in enumerate(block_sets):
        by_size[len(bs)].append(t)
    for k, ts in by_size.items():
        if k == 0:
            continue
        if radix**k < 2**_KEY_BITS:
            sel = np.array([block_sets[t] for t in ts], dtype=np.int64)
            ap = np.zeros((P, len(ts)), dtype=np.int64)
            aq = np.zeros((Q, len(ts)), dtype=np.int64)
            for i in range(k):
                ap = ap * radix + pop_codes[:, sel[:, i]]
                aq = aq * radix + query_codes[:, sel[:, i]]
            kp[:, ts] = ap
            kq[:, ts] = aq
        else:
            for t in ts:
                cols = list(block_sets[t])
                stacked = np.concatenate([pop_codes[:, cols], query_codes[:, cols]])
                _, inv = np.unique(stacked, axis=0, return_inverse=True)
                inv = inv.reshape(-1)
                kp[:, t] = inv[:P]
                kq[:, t] = inv[P:]
    offsets = np.arange(T, dtype=np.int64) << _KEY_BITS
    return kp + offsets, kq + offsets


def _block_size_matrix(ctx, block_sets, population, queries) -> np.ndarray:
    pop_rows = mask_indices(population, ctx.num_objects)
    radix = max(stop - start for start, stop in ctx.blocks)
    kp, kq = _block_keys(ctx.codes[pop_rows], queries.codes, block_sets, radix)
    n_pop = kp.size
    uniq, inverse = np.unique(np.concatenate([kp.ravel(), kq.ravel()]), return_inverse=True)
    counts = np.bincount(inverse[:n_pop], minlength=len(uniq))
    return counts[inverse[n_pop:]].reshape(kq.shape)


def _compatible_blocks(ctx, queries) -> bool:
    return (
        ctx.blocks is not None
        and queries.blocks == ctx.blocks
        and queries.codes is not None
        and ctx.num_objects > 0
    )


def closure_size_matrix(
    ctx: FormalContext,
    agendas: Sequence[FeatureMask],
    population: ObjectMask,
    queries: Optional[FormalContext] = None,
    method: str = "auto",
    threads: Optional[int] = None,
) -> np.ndarray:
    """Closure sizes of every query object under every agenda.

    Returns a ``len(queries) x len(agendas)`` int64 matrix. Each query's
    closure is counted over ``population`` objects of ``ctx``; the query is
    not added to its own count. ``queries`` defaults to ``ctx`` itself.

    ``method`` is ``"bitset"`` (extent intersection, works for any context),
    ``"blocks"`` (hash grouping, needs a one-hot block layout and agendas made
    of whole blocks) or ``"auto"``.
    """
    queries = ctx if queries is None else queries
    if queries.num_features != ctx.num_features:
        raise LengthMismatch(
            f"queries have {queries.num_features} features, context has {ctx.num_features}"
        )
    population = _check_len(population, ctx.num_objects, "population")
    agendas = [_check_len(m, ctx.num_features, "agenda") for m in agendas]

    if method not in ("auto", "bitset", "blocks"):
        raise ValueError(f"unknown method {method!r}")
    if method != "bitset" and _compatible_blocks(ctx, queries):
        block_sets = [agenda_blocks(ctx, m) for m in agendas]
        if all(bs is not None for bs in block_sets):
            return _block_size_matrix(ctx, block_sets, population, queries)
    if method == "blocks":
        raise LengthMismatch("block method needs block-aligned agendas and a one-hot layout")

    out = np.zeros((queries.num_objects, len(agendas)), dtype=np.int64)
    if threads is not None and threads > 1 and len(agendas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(lambda m: _bitset_sizes(ctx, m, population, queries), agendas))
    else:
        cols = [_bitset_sizes(ctx, m, population, queries) for m in agendas]
    for t, col in enumerate(cols):
        out[:, t] = col
    return out


def closure_sizes_all(
    ctx: FormalContext,
    agenda: FeatureMask,
    population: ObjectMask,
    queries: Optional[FormalContext] = None,
    method: str = "auto",
) -> np.ndarray:
    """Closure size of every object (of ``queries``, default ``ctx``) under one agenda."""
    return closure_size_matrix(ctx, [agenda], population, queries, method=method)[:, 0]


def select_objects(ctx: FormalContext, indices) -> FormalContext:
    """Sub-context on the given object rows (all features kept)."""
    indices = np.asarray(indices, dtype=np.int64).reshape(-1)
    if indices.size and (indices.min() < 0 or indices.max() >= ctx.num_objects):
        raise IndexOutOfRange(f"object index out of range for {ctx.num_objects} objects")
    inc = unpack_bits(ctx.object_intents[indices], ctx.num_features)
    ids = [ctx.object_ids[i] for i in indices]
    return context_from_incidence(inc, ids, ctx.feature_names, ctx.blocks)
