"""Cache-aided broadcast construction for fully demanded systems.

Pipeline, per (N, K, r) system:

1. partition     - each file splits into 2(K-r)C(K,r) segments indexed by an
                   r-subset of users, an excluded user, and an I/Q channel.
2. prefetch      - user k caches an uncoded slice plus product-code parities
                   (column parities across files, a pruned set of row parities
                   along each file).  The pruned row parities are linearly
                   dependent on stored ones and recoverable via the closure.
3. transform     - once demands are known, (I, Q) pairs are mixed by 2x2
                   GF(2) matrices chosen per (requesting user, excluded user)
                   so that even-multiplicity files still cancel in sums.
4. delivery      - broadcast symbols XOR transformed segments over (r+1)-user
                   subsets; symbols whose subset avoids every per-file leader
                   are linearly dependent on the rest and are skipped.
5. decode        - each user recovers its file from the cache (uncoded hits),
                   by per-symbol elimination (s != k), or by aligning parities
                   against broadcast sums (s == k), then inverts the transform.

Decoding runs generically over "sources" so the same equations execute both
symbolically (supports over the segment basis) and on concrete bytes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .algebra import (
    CHANNELS,
    Payload,
    SegmentId,
    SymbolVec,
    ZERO,
    segment,
    xor_all,
)
from .core import (
    Demand,
    LeaderInfo,
    SchemeParams,
    binom,
    leaders,
    require_fully_demanded,
    requesters,
)

Matrix = tuple[tuple[int, int], tuple[int, int]]

IDENTITY: Matrix = ((1, 0), (0, 1))
MIX: Matrix = ((1, 1), (1, 0))  # (I, Q) -> (I^Q, I)
MIX_INV: Matrix = ((0, 1), (1, 1))  # (I, Q) -> (Q, I^Q); inverse of MIX

ColumnKey = tuple[tuple[int, ...], str]  # (r_subset, channel)
RowKey = tuple[int, tuple[int, ...], str]  # (file, subset of size r-1, channel)
DeliveryKey = tuple[int, tuple[int, ...], str]  # (excluded user, (r+1)-subset, channel)


# ---------------------------------------------------------------------------
# partition


def file_segments(params: SchemeParams, file: int) -> list[SegmentId]:
    """All 2(K-r)C(K,r) segments of one file, in canonical (sorted) order."""
    out = []
    for r_set in itertools.combinations(params.users, params.r):
        for s in params.users:
            if s in r_set:
                continue
            for channel in CHANNELS:
                out.append(segment(file, r_set, s, channel))
    return out


def partition(params: SchemeParams) -> list[SegmentId]:
    """The full segment basis over all files, canonical order."""
    out = []
    for file in params.files:
        out.extend(file_segments(params, file))
    return out


# ---------------------------------------------------------------------------
# prefetching


def anchor_user(k: int) -> int:
    """Peer whose subsets are omitted from user k's stored row parities.

    Row parities over subsets containing this peer are recoverable from the
    stored ones (see parity_combination), so they are never cached.
    """
    return 2 if k == 1 else 1


def column_parity_vec(params: SchemeParams, k: int, r_set: tuple[int, ...], channel: str) -> SymbolVec:
    """XOR over all files of the segments tagged (r_set, excluded=k)."""
    return SymbolVec(frozenset(segment(f, r_set, k, channel) for f in params.files))


def row_parity_vec(params: SchemeParams, k: int, file: int, r_minus: tuple[int, ...], channel: str) -> SymbolVec:
    """XOR over completions u of the file's segments tagged ({u} | r_minus, k)."""
    blocked = set(r_minus) | {k}
    return SymbolVec(
        frozenset(
            segment(file, tuple(sorted(r_minus + (u,))), k, channel)
            for u in params.users
            if u not in blocked
        )
    )


@dataclass(frozen=True)
class CacheContent:
    """Everything user `owner` prefetches: uncoded segments plus parities."""

    params: SchemeParams
    owner: int
    uncoded: frozenset[SegmentId]
    column_parities: dict[ColumnKey, SymbolVec]
    row_parities: dict[RowKey, SymbolVec]

    @property
    def m1(self) -> int:
        return len(self.uncoded)

    @property
    def m2(self) -> int:
        return len(self.column_parities)

    @property
    def m3(self) -> int:
        return len(self.row_parities)

    @property
    def size(self) -> int:
        return self.m1 + self.m2 + self.m3

    def memory(self) -> Fraction:
        """Cache size normalized by the per-file segment count."""
        p = self.params
        return Fraction(self.size, 2 * p.n_users * binom(p.n_users - 1, p.r))


def prefetch(params: SchemeParams, k: int) -> CacheContent:
    """Build user k's cache: uncoded slice, column parities, pruned row parities."""
    if k not in params.users:
        raise ValueError(f"user {k} outside 1..{params.n_users}")
    uncoded = set()
    for f in params.files:
        for r_set in itertools.combinations(params.users, params.r):
            if k not in r_set:
                continue
            for s in params.users:
                if s in r_set:
                    continue
                for channel in CHANNELS:
                    uncoded.add(segment(f, r_set, s, channel))

    column_parities: dict[ColumnKey, SymbolVec] = {}
    for r_set in itertools.combinations(params.users, params.r):
        if k in r_set:
            continue
        for channel in CHANNELS:
            column_parities[(r_set, channel)] = column_parity_vec(params, k, r_set, channel)

    # only files >= 2 and subsets avoiding the anchor peer are stored
    row_parities: dict[RowKey, SymbolVec] = {}
    if params.r >= 1:
        others = [u for u in params.users if u not in (k, anchor_user(k))]
        for f in params.files:
            if f == 1:
                continue
            for r_minus in itertools.combinations(others, params.r - 1):
                for channel in CHANNELS:
                    row_parities[(f, r_minus, channel)] = row_parity_vec(params, k, f, r_minus, channel)

    return CacheContent(
        params=params,
        owner=k,
        uncoded=frozenset(uncoded),
        column_parities=column_parities,
        row_parities=row_parities,
    )


@lru_cache(maxsize=None)
def parity_combination(
    params: SchemeParams, k: int, file: int, r_minus: tuple[int, ...]
) -> tuple[frozenset[tuple[int, ...]], frozenset[tuple[int, tuple[int, ...]]]]:
    """Stored parities whose XOR equals row parity (file, r_minus) of user k.

    Returns (column subsets, (file, subset) row keys), channel-independent.
    Two rewrites drive the recursion: a subset containing the anchor peer is
    replaced by the subsets swapping the peer for each outside user, and a
    file-1 parity is replaced by the covering column parities plus the other
    files' row parities on the same subset.  Each rewrite strictly approaches
    the stored set, so recursion depth is at most two.
    """
    if params.r == 0:
        raise ValueError("no row parities exist when r == 0")
    if len(r_minus) != params.r - 1:
        raise ValueError(f"subset {r_minus} must have r-1={params.r - 1} users")
    if k in r_minus:
        raise ValueError(f"subset {r_minus} must not contain user {k}")
    if file not in params.files:
        raise ValueError(f"file {file} outside 1..{params.n_files}")

    anchor = anchor_user(k)
    if file != 1 and anchor not in r_minus:
        return frozenset(), frozenset({(file, r_minus)})

    columns: set[tuple[int, ...]] = set()
    rows: set[tuple[int, tuple[int, ...]]] = set()

    def fold(cols2, rows2):
        nonlocal columns, rows
        columns ^= cols2
        rows ^= rows2

    if anchor in r_minus:
        stripped = tuple(u for u in r_minus if u != anchor)
        for h in params.users:
            if h == k or h in r_minus:
                continue
            fold(*parity_combination(params, k, file, tuple(sorted(stripped + (h,)))))
    else:  # file == 1, anchor outside the subset
        for h in params.users:
            if h == k or h in r_minus:
                continue
            columns ^= {tuple(sorted(r_minus + (h,)))}
        for other in params.files:
            if other == 1:
                continue
            fold(*parity_combination(params, k, other, r_minus))
    return frozenset(columns), frozenset(rows)


def row_parity_closure(cache: CacheContent, file: int, r_minus: tuple[int, ...], channel: str) -> SymbolVec:
    """Row parity (file, r_minus, channel) of the cache owner, XORed together
    from stored parities only.  Stored inputs come back unchanged."""
    columns, rows = parity_combination(cache.params, cache.owner, file, tuple(r_minus))
    acc = ZERO
    for r_set in columns:
        acc = acc ^ cache.column_parities[(r_set, channel)]
    for f, subset in rows:
        acc = acc ^ cache.row_parities[(f, subset, channel)]
    return acc


# ---------------------------------------------------------------------------
# pairwise transform


@lru_cache(maxsize=None)
def transform_matrix(params: SchemeParams, d: Demand, t: int, s: int) -> Matrix:
    """GF(2) matrix applied to the (I, Q) pair of W_{d(t), ., s}.

    Identity when d(t) has odd multiplicity.  Otherwise one special user gets
    MIX_INV and everyone else MIX: the special user is t == s when t and s
    request the same file, else the lowest-indexed requester of d(t).
    """
    file = d[t - 1]
    asking = requesters(d, file)
    if len(asking) % 2 == 1:
        return IDENTITY
    if file == d[s - 1]:
        special = t == s
    else:
        # s does not request d(t), so min over all requesters is the leader
        # among the users other than s
        special = t == asking[0]
    return MIX_INV if special else MIX


def inverse_matrix(matrix: Matrix) -> Matrix:
    if matrix == IDENTITY:
        return IDENTITY
    if matrix == MIX:
        return MIX_INV
    if matrix == MIX_INV:
        return MIX
    raise ValueError(f"not a transform matrix: {matrix}")


def apply_matrix(matrix: Matrix, pair):
    """Apply a 2x2 GF(2) matrix to an (I, Q) pair of XORable values."""
    i_val, q_val = pair

    def combine(a: int, b: int):
        if a and b:
            return i_val ^ q_val
        return i_val if a else q_val

    return (combine(*matrix[0]), combine(*matrix[1]))


def transform_segment_pair(
    params: SchemeParams, d: Demand, t: int, s: int, r_set: tuple[int, ...]
) -> tuple[SymbolVec, SymbolVec]:
    """Transformed (I, Q) pair of W_{d(t), r_set, s} as symbolic vectors."""
    if s in r_set:
        raise ValueError(f"excluded user {s} inside subset {r_set}")
    file = d[t - 1]
    pair = (
        SymbolVec.unit(segment(file, r_set, s, "I")),
        SymbolVec.unit(segment(file, r_set, s, "Q")),
    )
    return apply_matrix(transform_matrix(params, d, t, s), pair)


def inverse_transform_pair(params: SchemeParams, d: Demand, t: int, s: int, pair):
    """Undo the (t, s) pairwise transform on an (I, Q) value pair."""
    return apply_matrix(inverse_matrix(transform_matrix(params, d, t, s)), pair)


# ---------------------------------------------------------------------------
# delivery


@dataclass(frozen=True)
class DeliverySet:
    """All broadcast symbols for one demand, with the skipped ones marked."""

    params: SchemeParams
    demand: Demand
    symbols: dict[DeliveryKey, SymbolVec]
    skipped: frozenset[tuple[int, tuple[int, ...]]]
    leader_infos: dict[int, LeaderInfo]

    def is_transmitted(self, s: int, r_plus: tuple[int, ...]) -> bool:
        return (s, r_plus) not in self.skipped

    @property
    def transmitted_count(self) -> int:
        """Symbols actually sent, counting both channels."""
        return len(self.symbols) - 2 * len(self.skipped)

    def rate(self) -> Fraction:
        p = self.params
        return Fraction(self.transmitted_count, 2 * p.n_users * binom(p.n_users - 1, p.r))


def delivery(params: SchemeParams, d: Sequence[int]) -> DeliverySet:
    """Build every broadcast symbol for a fully demanded vector.

    Symbol (s, r_plus) XORs the transformed segments W_{d(t), r_plus - t, s}
    over t in r_plus; it is skipped when r_plus avoids every leader of s.
    """
    demand = require_fully_demanded(params, d)
    symbols: dict[DeliveryKey, SymbolVec] = {}
    skipped: set[tuple[int, tuple[int, ...]]] = set()
    leader_infos: dict[int, LeaderInfo] = {}
    for s in params.users:
        info = leaders(params, demand, s)
        leader_infos[s] = info
        others = [u for u in params.users if u != s]
        for r_plus in itertools.combinations(others, params.r + 1):
            acc_i, acc_q = ZERO, ZERO
            for t in r_plus:
                rest = tuple(u for u in r_plus if u != t)
                vec_i, vec_q = transform_segment_pair(params, demand, t, s, rest)
                acc_i, acc_q = acc_i ^ vec_i, acc_q ^ vec_q
            symbols[(s, r_plus, "I")] = acc_i
            symbols[(s, r_plus, "Q")] = acc_q
            if not info.leader_set.intersection(r_plus):
                skipped.add((s, r_plus))
    return DeliverySet(
        params=params,
        demand=demand,
        symbols=symbols,
        skipped=frozenset(skipped),
        leader_infos=leader_infos,
    )


MIX_POWER: tuple[Matrix, ...] = (IDENTITY, MIX, MIX_INV)  # MIX generates a 3-cycle
_MIX_LOG = {IDENTITY: 0, MIX: 1, MIX_INV: 2}


def transform_log(params: SchemeParams, d: Demand, t: int, s: int) -> int:
    """Exponent e with transform_matrix(t, s) == MIX**e (0, 1, or 2)."""
    return _MIX_LOG[transform_matrix(params, d, t, s)]


def selection_weights(dset: DeliverySet, s: int, block: tuple[int, ...]):
    """One-requester-per-file selections V inside the block, each with the
    MIX-power h(V) = sum of its members' transform logs mod 3.

    For any such block the weighted sum of symbol pairs over all selections,
    sum_V MIX^h(V) (Y^I, Y^Q)_{block - V}, vanishes: the two occurrences of a
    segment across selections swapping one same-file requester carry equal
    total exponents and cancel.  The unweighted per-channel XOR is the equal-
    weight special case (it fails once an even-multiplicity file other than
    d(s) puts its leader inside a selection).
    """
    params, demand = dset.params, dset.demand
    info = dset.leader_infos[s]
    block_set = set(block)
    choices = []
    for file, _leader in info.per_file_leader:
        candidates = [u for u in requesters(demand, file) if u in block_set]
        choices.append(candidates)
    out = []
    for pick in itertools.product(*choices):
        weight = sum(transform_log(params, demand, t, s) for t in pick) % 3
        out.append((frozenset(pick), weight))
    return out


def skip_combination(
    dset: DeliverySet, s: int, r_plus: tuple[int, ...]
) -> tuple[tuple[tuple[int, ...], Matrix], ...]:
    """Transmitted subsets and 2x2 coefficients reconstructing a skipped symbol.

    With B = leaders(s) | r_plus the skipped symbol is the leader selection's
    term in the vanishing weighted sum over B, so it equals the weighted sum
    of the other selections' (transmitted) symbol pairs.
    """
    if dset.is_transmitted(s, r_plus):
        raise ValueError(f"symbol (s={s}, subset={r_plus}) was transmitted, nothing to reconstruct")
    info = dset.leader_infos[s]
    block = tuple(sorted(info.leader_set.union(r_plus)))
    leader_weight = None
    entries = []
    for chosen, weight in selection_weights(dset, s, block):
        if chosen == info.leader_set:
            leader_weight = weight
            continue
        rest = tuple(u for u in block if u not in chosen)
        if not dset.is_transmitted(s, rest):  # cannot happen: rest meets a leader
            raise AssertionError(f"reconstruction referenced skipped symbol {rest}")
        entries.append((rest, weight))
    assert leader_weight is not None
    return tuple(
        (rest, MIX_POWER[(weight - leader_weight) % 3]) for rest, weight in entries
    )


def reconstruct_skipped_pair(dset: DeliverySet, s: int, r_plus: tuple[int, ...]):
    """(I, Q) vectors of a skipped symbol, combined from transmitted ones."""
    acc_i, acc_q = ZERO, ZERO
    for rest, coeff in skip_combination(dset, s, r_plus):
        pair = (dset.symbols[(s, rest, "I")], dset.symbols[(s, rest, "Q")])
        add_i, add_q = apply_matrix(coeff, pair)
        acc_i, acc_q = acc_i ^ add_i, acc_q ^ add_q
    return (acc_i, acc_q)


def reconstruct_skipped(dset: DeliverySet, s: int, r_plus: tuple[int, ...], channel: str) -> SymbolVec:
    """Recover one channel of a skipped symbol from transmitted ones."""
    return reconstruct_skipped_pair(dset, s, r_plus)[CHANNELS.index(channel)]


# ---------------------------------------------------------------------------
# decoding sources: what a user legitimately holds, in two value domains


class SymbolicSource:
    """Basis expansions of user k's cache content and the received symbols."""

    zero = ZERO

    def __init__(self, cache: CacheContent, dset: DeliverySet):
        self.cache = cache
        self.dset = dset

    def held_segment(self, seg: SegmentId) -> SymbolVec:
        if seg not in self.cache.uncoded:
            raise LookupError(f"user {self.cache.owner} did not cache {seg.label()}")
        return SymbolVec.unit(seg)

    def column_parity(self, r_set: tuple[int, ...], channel: str) -> SymbolVec:
        return self.cache.column_parities[(r_set, channel)]

    def row_parity(self, file: int, r_minus: tuple[int, ...], channel: str) -> SymbolVec:
        return self.cache.row_parities[(file, r_minus, channel)]

    def delivered(self, s: int, r_plus: tuple[int, ...], channel: str) -> SymbolVec:
        if not self.dset.is_transmitted(s, r_plus):
            raise LookupError(f"symbol (s={s}, subset={r_plus}) was skipped")
        return self.dset.symbols[(s, r_plus, channel)]


class PayloadSource:
    """Byte values (as ints) user k holds after prefetch plus the broadcast.

    Parity and broadcast values are evaluated from the source payload once,
    mirroring the server-side encode; decoding then only combines these.
    """

    zero = 0

    def __init__(self, cache: CacheContent, dset: DeliverySet, payload: Payload,
                 segment_ints: Mapping[SegmentId, int] | None = None):
        ints = payload.int_values() if segment_ints is None else segment_ints
        self.owner = cache.owner
        self._uncoded = {seg: ints[seg] for seg in cache.uncoded}
        self._column = {key: self._eval(vec, ints) for key, vec in cache.column_parities.items()}
        self._row = {key: self._eval(vec, ints) for key, vec in cache.row_parities.items()}
        self._delivered = {
            key: self._eval(vec, ints)
            for key, vec in dset.symbols.items()
            if dset.is_transmitted(key[0], key[1])
        }

    @staticmethod
    def _eval(vec: SymbolVec, ints: Mapping[SegmentId, int]) -> int:
        acc = 0
        for seg in vec.support:
            acc ^= ints[seg]
        return acc

    def held_segment(self, seg: SegmentId) -> int:
        if seg not in self._uncoded:
            raise LookupError(f"user {self.owner} did not cache {seg.label()}")
        return self._uncoded[seg]

    def column_parity(self, r_set: tuple[int, ...], channel: str) -> int:
        return self._column[(r_set, channel)]

    def row_parity(self, file: int, r_minus: tuple[int, ...], channel: str) -> int:
        return self._row[(file, r_minus, channel)]

    def delivered(self, s: int, r_plus: tuple[int, ...], channel: str) -> int:
        return self._delivered[(s, r_plus, channel)]


def _available_pair(source, dset: DeliverySet, s: int, r_plus: tuple[int, ...]):
    """(I, Q) values of a delivery symbol, reconstructing it if skipped."""
    if dset.is_transmitted(s, r_plus):
        return (source.delivered(s, r_plus, "I"), source.delivered(s, r_plus, "Q"))
    acc_i, acc_q = source.zero, source.zero
    for rest, coeff in skip_combination(dset, s, r_plus):
        pair = (source.delivered(s, rest, "I"), source.delivered(s, rest, "Q"))
        add_i, add_q = apply_matrix(coeff, pair)
        acc_i, acc_q = acc_i ^ add_i, acc_q ^ add_q
    return (acc_i, acc_q)


# ---------------------------------------------------------------------------
# decoding


def decode_class1(dset: DeliverySet, cache: CacheContent, k: int, r_set: tuple[int, ...], s: int, source=None):
    """Recover (W^I, W^Q) of segment (d(k), r_set, s) when s != k, k not in r_set.

    The broadcast symbol over r_set | {k} is the transformed target XORed with
    transformed segments the user holds uncoded; eliminate those, then invert
    the (k, s) transform.
    """
    params, d = dset.params, dset.demand
    if source is None:
        source = SymbolicSource(cache, dset)
    if k in r_set or s == k or s in r_set:
        raise ValueError(f"bad elimination indices k={k} r_set={r_set} s={s}")
    r_plus = tuple(sorted(r_set + (k,)))
    acc_i, acc_q = _available_pair(source, dset, s, r_plus)
    for i in r_set:
        rest = tuple(u for u in r_plus if u != i)
        pair = (
            source.held_segment(segment(d[i - 1], rest, s, "I")),
            source.held_segment(segment(d[i - 1], rest, s, "Q")),
        )
        t_i, t_q = apply_matrix(transform_matrix(params, d, i, s), pair)
        acc_i, acc_q = acc_i ^ t_i, acc_q ^ t_q
    return inverse_transform_pair(params, d, k, s, (acc_i, acc_q))


def decode_class2(dset: DeliverySet, cache: CacheContent, k: int, r_set: tuple[int, ...], source=None):
    """Recover (W^I, W^Q) of segment (d(k), r_set, k) with k not in r_set.

    Align the transformed row parities of the files requested inside r_set
    and every broadcast symbol over a superset of r_set against the column
    parity: all interference cancels, leaving the transformed target.
    """
    params, d = dset.params, dset.demand
    if source is None:
        source = SymbolicSource(cache, dset)
    if k in r_set:
        raise ValueError(f"user {k} must be outside {r_set}")
    acc_i = source.column_parity(r_set, "I")
    acc_q = source.column_parity(r_set, "Q")
    for t in r_set:
        r_minus = tuple(u for u in r_set if u != t)
        cols, rows = parity_combination(params, k, d[t - 1], r_minus)
        pair = []
        for channel in CHANNELS:
            val = source.zero
            for subset in cols:
                val = val ^ source.column_parity(subset, channel)
            for file, sub in rows:
                val = val ^ source.row_parity(file, sub, channel)
            pair.append(val)
        t_i, t_q = apply_matrix(transform_matrix(params, d, t, k), tuple(pair))
        acc_i, acc_q = acc_i ^ t_i, acc_q ^ t_q
    for h in params.users:
        if h == k or h in r_set:
            continue
        r_plus = tuple(sorted(r_set + (h,)))
        y_i, y_q = _available_pair(source, dset, k, r_plus)
        acc_i, acc_q = acc_i ^ y_i, acc_q ^ y_q
    return inverse_transform_pair(params, d, k, k, (acc_i, acc_q))


def decode_file(dset: DeliverySet, cache: CacheContent, k: int, source=None):
    """Recover every segment of user k's file, in canonical segment order.

    Returns [(SegmentId, value)]: values are SymbolVec expansions for the
    symbolic source (correct iff equal to the unit vector) or payload ints.
    """
    params, d = dset.params, dset.demand
    if source is None:
        source = SymbolicSource(cache, dset)
    file = d[k - 1]
    out = []
    for r_set in itertools.combinations(params.users, params.r):
        for s in params.users:
            if s in r_set:
                continue
            if k in r_set:
                pair = (
                    source.held_segment(segment(file, r_set, s, "I")),
                    source.held_segment(segment(file, r_set, s, "Q")),
                )
            elif s != k:
                pair = decode_class1(dset, cache, k, r_set, s, source)
            else:
                pair = decode_class2(dset, cache, k, r_set, source)
            out.append((segment(file, r_set, s, "I"), pair[0]))
            out.append((segment(file, r_set, s, "Q"), pair[1]))
    out.sort(key=lambda item: item[0])
    return out


# ---------------------------------------------------------------------------
# whole-demand identity


def transformed_sum_identity(params: SchemeParams, d: Sequence[int], s: int, r_set: tuple[int, ...], channel: str) -> bool:
    """XOR of transformed (d(t), r_set, s) segments over ALL users t equals the
    column parity over files: per file, the special/mix split cancels."""
    demand = require_fully_demanded(params, d)
    idx = CHANNELS.index(channel)
    total = xor_all(
        transform_segment_pair(params, demand, t, s, r_set)[idx] for t in params.users
    )
    return total == column_parity_vec(params, s, r_set, channel)
