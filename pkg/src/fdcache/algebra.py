"""GF(2) symbolic vectors over the file-segment basis, plus a rank oracle.

A SymbolVec is the support-set view of a GF(2) vector: XOR is symmetric
difference of supports.  Every cached parity, broadcast symbol, and
transformed segment in the scheme is such a vector.  SpanBasis implements
incremental Gaussian elimination on int bitmasks and backs span_contains,
the decodability oracle; it shares no code with the constructive decoder.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

CHANNELS = ("I", "Q")


class SegmentId(NamedTuple):
    """One file segment: file index, cached-by subset, excluded user, channel."""

    file: int
    users: tuple[int, ...]
    excluded: int
    channel: str

    def label(self) -> str:
        inside = ",".join(str(u) for u in self.users)
        return f"W^{self.channel}[{self.file};{{{inside}}};{self.excluded}]"


def segment(file: int, users: Iterable[int], excluded: int, channel: str) -> SegmentId:
    """Canonical SegmentId: sorted subset, excluded user outside it."""
    subset = tuple(sorted(users))
    if len(set(subset)) != len(subset):
        raise ValueError(f"duplicate users in {subset}")
    if excluded in subset:
        raise ValueError(f"excluded user {excluded} inside subset {subset}")
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    return SegmentId(file, subset, excluded, channel)


@dataclass(frozen=True, slots=True)
class SymbolVec:
    """GF(2) linear form over segments; the support holds the 1-coefficients."""

    support: frozenset[SegmentId] = frozenset()

    @classmethod
    def unit(cls, seg: SegmentId) -> "SymbolVec":
        return cls(frozenset((seg,)))

    @classmethod
    def of(cls, *segments: SegmentId) -> "SymbolVec":
        """XOR of unit vectors; repeated segments cancel."""
        acc: frozenset[SegmentId] = frozenset()
        for seg in segments:
            acc = acc ^ frozenset((seg,))
        return cls(acc)

    def __xor__(self, other: "SymbolVec") -> "SymbolVec":
        return SymbolVec(self.support ^ other.support)

    def __bool__(self) -> bool:
        return bool(self.support)

    def __len__(self) -> int:
        return len(self.support)

    def sorted_support(self) -> list[SegmentId]:
        return sorted(self.support)

    def describe(self) -> str:
        if not self.support:
            return "0"
        return " + ".join(seg.label() for seg in self.sorted_support())


ZERO = SymbolVec()


def xor(a: SymbolVec, b: SymbolVec) -> SymbolVec:
    return a ^ b


def xor_all(vectors: Iterable[SymbolVec]) -> SymbolVec:
    acc = ZERO
    for vec in vectors:
        acc = acc ^ vec
    return acc


@dataclass
class Payload:
    """Concrete byte values for every segment, all of a common width."""

    width: int
    data: dict[SegmentId, bytes]

    @classmethod
    def random(cls, segments: Iterable[SegmentId], width: int = 1, seed: str = "0") -> "Payload":
        if width < 1:
            raise ValueError("width must be >= 1")
        rng = random.Random(f"payload:{seed}")
        # sorted iteration fixes the RNG consumption order
        data = {seg: rng.randbytes(width) for seg in sorted(set(segments))}
        return cls(width=width, data=data)

    def value(self, seg: SegmentId) -> bytes:
        try:
            return self.data[seg]
        except KeyError:
            raise KeyError(f"no payload for segment {seg.label()}") from None

    def int_values(self) -> dict[SegmentId, int]:
        return {seg: int.from_bytes(raw, "big") for seg, raw in self.data.items()}


def evaluate(vec: SymbolVec, payload: Payload) -> bytes:
    """Bytewise XOR of the payloads on the support; empty support is all-zero."""
    acc = 0
    for seg in vec.support:
        acc ^= int.from_bytes(payload.value(seg), "big")
    return acc.to_bytes(payload.width, "big")


class SpanBasis:
    """Row space over GF(2) built incrementally from int-bitmask rows.

    Rows are reduced against pivots keyed by leading bit; copy() is cheap so a
    precomputed basis can be extended per query without re-elimination.
    """

    __slots__ = ("index", "pivots")

    def __init__(self, index: Mapping[SegmentId, int], pivots: dict[int, int] | None = None):
        self.index = index
        self.pivots: dict[int, int] = {} if pivots is None else pivots

    @classmethod
    def over(cls, segments: Iterable[SegmentId]) -> "SpanBasis":
        ordered = sorted(set(segments))
        return cls({seg: i for i, seg in enumerate(ordered)})

    def copy(self) -> "SpanBasis":
        return SpanBasis(self.index, dict(self.pivots))

    def row_of(self, vec: SymbolVec) -> int:
        row = 0
        index = self.index
        for seg in vec.support:
            row |= 1 << index[seg]
        return row

    def residual(self, row: int) -> int:
        pivots = self.pivots
        while row:
            lead = row.bit_length() - 1
            pivot = pivots.get(lead)
            if pivot is None:
                return row
            row ^= pivot
        return 0

    def insert_row(self, row: int) -> bool:
        row = self.residual(row)
        if row:
            self.pivots[row.bit_length() - 1] = row
            return True
        return False

    def insert(self, vec: SymbolVec) -> bool:
        return self.insert_row(self.row_of(vec))

    def contains(self, vec: SymbolVec) -> bool:
        return self.residual(self.row_of(vec)) == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)


def span_contains(generators: Sequence[SymbolVec], targets: Sequence[SymbolVec]) -> bool:
    """True iff every target lies in the GF(2) span of the generators."""
    segments: set[SegmentId] = set()
    for vec in generators:
        segments |= vec.support
    for vec in targets:
        segments |= vec.support
    basis = SpanBasis.over(segments)
    for vec in generators:
        basis.insert(vec)
    return all(basis.contains(vec) for vec in targets)
