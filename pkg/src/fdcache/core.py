"""Scheme parameters, demand vectors, demand types, and leader sets.

Users are numbered 1..K and files 1..N on every interface.  All enumerations
are lexicographic so downstream reports are reproducible byte for byte, and
all memory/rate values are exact ``fractions.Fraction`` instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Demand = tuple[int, ...]


class NotFullyDemandedError(ValueError):
    """An operation required every file to be requested by at least one user."""


def binom(n: int, k: int) -> int:
    """Binomial coefficient C(n, k), zero whenever k < 0 or k > n.

    The zero extension covers negative n as well; rate formulas rely on
    vanishing terms such as C(K-1-N, r+1) when K - 1 - N < r + 1.
    """
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


@dataclass(frozen=True)
class SchemeParams:
    """System dimensions: N files, K users, and the partition parameter r."""

    n_files: int
    n_users: int
    r: int

    def __post_init__(self) -> None:
        if not 1 <= self.n_files <= self.n_users:
            raise ValueError(
                f"need 1 <= n_files <= n_users, got N={self.n_files} K={self.n_users}"
            )
        if not 0 <= self.r <= self.n_users - 1:
            raise ValueError(f"need 0 <= r <= K-1, got r={self.r} K={self.n_users}")

    @property
    def users(self) -> range:
        return range(1, self.n_users + 1)

    @property
    def files(self) -> range:
        return range(1, self.n_files + 1)


@dataclass(frozen=True)
class DemandType:
    """Sorted multiplicity profile of a demand: counts[i] users request the i-th file."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", tuple(self.counts))
        if not self.counts or any(c < 0 for c in self.counts):
            raise ValueError(f"counts must be nonempty and nonnegative: {self.counts}")
        if any(a < b for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError(
                f"counts must be nonincreasing: {self.counts}; use DemandType.of()"
            )

    @classmethod
    def of(cls, counts: Iterable[int]) -> "DemandType":
        """Build a type from multiplicities in any order."""
        return cls(tuple(sorted(counts, reverse=True)))

    @property
    def p(self) -> int:
        """Number of files requested by exactly one user."""
        return sum(1 for c in self.counts if c == 1)

    @property
    def fully_demanded(self) -> bool:
        return self.counts[-1] > 0

    def label(self) -> str:
        return ",".join(str(c) for c in self.counts)


DemandClass = Union[str, DemandType, Sequence[int]]


def validate_demand(params: SchemeParams, d: Sequence[int]) -> Demand:
    """Return d as a tuple after checking length and file-index range."""
    demand = tuple(d)
    if len(demand) != params.n_users:
        raise ValueError(f"demand length {len(demand)} != K={params.n_users}")
    for entry in demand:
        if not 1 <= entry <= params.n_files:
            raise ValueError(f"file index {entry} outside 1..{params.n_files}")
    return demand


def requesters(d: Demand, file: int) -> tuple[int, ...]:
    """Users (ascending) that request the given file."""
    return tuple(k for k, want in enumerate(d, start=1) if want == file)


def demand_type(params: SchemeParams, d: Sequence[int]) -> DemandType:
    demand = validate_demand(params, d)
    return DemandType.of(demand.count(f) for f in params.files)


def is_fully_demanded(params: SchemeParams, d: Sequence[int]) -> bool:
    demand = validate_demand(params, d)
    return set(demand) == set(params.files)


def require_fully_demanded(params: SchemeParams, d: Sequence[int]) -> Demand:
    demand = validate_demand(params, d)
    missing = sorted(set(params.files) - set(demand))
    if missing:
        raise NotFullyDemandedError(
            f"demand {demand} leaves file(s) {missing} unrequested"
        )
    return demand


def as_demand_type(params: SchemeParams, value: DemandClass) -> DemandType:
    """Coerce a type-like value and validate it against (N, K)."""
    dtype = value if isinstance(value, DemandType) else DemandType.of(value)
    if len(dtype.counts) != params.n_files:
        raise ValueError(f"type {dtype.counts} has {len(dtype.counts)} entries, need N={params.n_files}")
    if sum(dtype.counts) != params.n_users:
        raise ValueError(f"type {dtype.counts} entries sum to {sum(dtype.counts)}, need K={params.n_users}")
    return dtype


def enumerate_demands(params: SchemeParams, demand_class: DemandClass) -> list[Demand]:
    """All demand vectors of a class in lexicographic order.

    demand_class is "mixed", "fully_demanded", or a demand type (the
    single-type class).
    """
    everything = itertools.product(params.files, repeat=params.n_users)
    if demand_class == "mixed":
        return [tuple(d) for d in everything]
    if demand_class == "fully_demanded":
        full = set(params.files)
        return [tuple(d) for d in everything if set(d) == full]
    dtype = as_demand_type(params, demand_class)
    return [tuple(d) for d in everything if demand_type(params, d) == dtype]


def count_demands(params: SchemeParams, demand_class: DemandClass) -> int:
    """Cardinality of enumerate_demands() by closed form (no enumeration)."""
    n, k = params.n_files, params.n_users
    if demand_class == "mixed":
        return n**k
    if demand_class == "fully_demanded":
        return sum((-1) ** i * binom(n, i) * (n - i) ** k for i in range(n + 1))
    dtype = as_demand_type(params, demand_class)
    per_assignment = math.factorial(k)
    for c in dtype.counts:
        per_assignment //= math.factorial(c)
    assignments = math.factorial(n)
    for repeat in {c: dtype.counts.count(c) for c in dtype.counts}.values():
        assignments //= math.factorial(repeat)
    return per_assignment * assignments


def enumerate_fully_demanded_types(n_files: int, n_users: int) -> list[DemandType]:
    """All demand types with every file requested, largest counts first."""

    def parts(total: int, slots: int, cap: int):
        if slots == 1:
            if 1 <= total <= cap:
                yield (total,)
            return
        lo = -(-total // slots)  # ceil: keep nonincreasing order feasible
        for first in range(min(cap, total - slots + 1), lo - 1, -1):
            for rest in parts(total - first, slots - 1, first):
                yield (first,) + rest

    return [DemandType(c) for c in parts(n_users, n_files, n_users)]


@dataclass(frozen=True, eq=True)
class LeaderInfo:
    """Per-file leaders among the users other than one excluded user s.

    The leader of a file is the lowest-indexed user outside s requesting it;
    leader_set collects the leaders of every file requested outside s.
    """

    excluded: int
    complement: tuple[int, ...]
    per_file_leader: tuple[tuple[int, int], ...]  # (file, leader), file-ascending
    leader_set: frozenset[int]

    def leader_of(self, file: int) -> int:
        for f, leader in self.per_file_leader:
            if f == file:
                return leader
        raise KeyError(f"file {file} not requested outside user {self.excluded}")


def leaders(params: SchemeParams, d: Sequence[int], s: int) -> LeaderInfo:
    demand = require_fully_demanded(params, d)
    if s not in params.users:
        raise ValueError(f"user {s} outside 1..{params.n_users}")
    complement = tuple(u for u in params.users if u != s)
    per_file = []
    for f in params.files:
        outside = [u for u in requesters(demand, f) if u != s]
        if outside:
            per_file.append((f, outside[0]))
    return LeaderInfo(
        excluded=s,
        complement=complement,
        per_file_leader=tuple(per_file),
        leader_set=frozenset(leader for _, leader in per_file),
    )


def parse_fraction(text: str) -> Fraction:
    """Parse "p/q" (or a plain integer) into an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a fraction: {text!r}") from exc


def format_fraction(value) -> str:
    """Canonical "p/q" rendering (plain "p" when the denominator is 1)."""
    return str(Fraction(value))
