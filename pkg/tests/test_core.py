from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fdcache.core import (
    DemandType,
    NotFullyDemandedError,
    SchemeParams,
    binom,
    count_demands,
    demand_type,
    enumerate_demands,
    enumerate_fully_demanded_types,
    format_fraction,
    is_fully_demanded,
    leaders,
    parse_fraction,
    requesters,
    validate_demand,
)


def test_binom_standard_value():
    assert binom(5, 2) == 10


def test_binom_vanishes_below_diagonal():
    assert binom(1, 2) == 0
    assert binom(-1, 1) == 0
    assert binom(3, -1) == 0


def test_binom_diagonal_is_one():
    # C(2,2)=1 is what makes the (14/15, 19/10) operating point come out
    assert binom(2, 2) == 1
    assert binom(0, 0) == 1


@given(st.integers(0, 40), st.integers(-3, 43))
def test_binom_pascal_identity(n, k):
    assert binom(n + 1, k) == binom(n, k) + binom(n, k - 1)


def test_params_validation():
    SchemeParams(3, 6, 1)
    with pytest.raises(ValueError):
        SchemeParams(4, 3, 0)  # more files than users
    with pytest.raises(ValueError):
        SchemeParams(3, 3, 3)  # r > K-1
    with pytest.raises(ValueError):
        SchemeParams(0, 3, 0)


def test_demand_type_repeated_requests():
    params = SchemeParams(3, 3, 0)
    dtype = demand_type(params, (2, 2, 1))
    assert dtype.counts == (2, 1, 0)
    assert not dtype.fully_demanded


def test_demand_type_permutation_demand():
    params = SchemeParams(3, 3, 0)
    assert demand_type(params, (1, 2, 3)).counts == (1, 1, 1)


def test_demand_type_running_example():
    params = SchemeParams(3, 6, 1)
    dtype = demand_type(params, (1, 1, 1, 1, 2, 3))
    assert dtype.counts == (4, 1, 1)
    assert dtype.p == 2


def test_demand_type_rejects_unsorted():
    with pytest.raises(ValueError):
        DemandType((1, 2, 0))
    assert DemandType.of((1, 2, 0)).counts == (2, 1, 0)


@given(st.data())
def test_demand_type_invariant_under_position_permutation(data):
    k = data.draw(st.integers(2, 6))
    n = data.draw(st.integers(1, k))
    params = SchemeParams(n, k, 0)
    demand = tuple(data.draw(st.lists(st.integers(1, n), min_size=k, max_size=k)))
    shuffled = tuple(data.draw(st.permutations(demand)))
    assert demand_type(params, demand) == demand_type(params, shuffled)


@given(st.data())
def test_demand_type_invariant_under_file_relabeling(data):
    k = data.draw(st.integers(2, 6))
    n = data.draw(st.integers(1, k))
    params = SchemeParams(n, k, 0)
    demand = tuple(data.draw(st.lists(st.integers(1, n), min_size=k, max_size=k)))
    relabel = dict(zip(range(1, n + 1), data.draw(st.permutations(range(1, n + 1)))))
    renamed = tuple(relabel[f] for f in demand)
    assert demand_type(params, demand) == demand_type(params, renamed)


def test_enumerate_single_type_table():
    params = SchemeParams(3, 3, 0)
    demands = enumerate_demands(params, (2, 1, 0))
    assert len(demands) == 18
    groups = {}
    for d in demands:
        raw = tuple(d.count(f) for f in params.files)
        groups.setdefault(raw, []).append(d)
    assert len(groups) == 6
    assert all(len(g) == 3 for g in groups.values())
    assert (2, 2, 1) in demands and (1, 1, 2) in demands


def test_enumerate_fully_demanded_count():
    params = SchemeParams(3, 3, 0)
    assert len(enumerate_demands(params, "fully_demanded")) == 6


def test_enumerate_mixed_count():
    params = SchemeParams(2, 2, 0)
    assert enumerate_demands(params, "mixed") == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_enumerate_rejects_bad_type():
    params = SchemeParams(3, 3, 0)
    with pytest.raises(ValueError):
        enumerate_demands(params, (2, 2, 0))  # sums to 4, not K=3


def test_enumeration_is_lexicographic():
    params = SchemeParams(2, 3, 0)
    demands = enumerate_demands(params, "mixed")
    assert demands == sorted(demands)


@pytest.mark.parametrize("n,k", [(2, 2), (2, 4), (3, 4), (3, 5), (4, 6)])
def test_count_matches_enumeration(n, k):
    params = SchemeParams(n, k, 0)
    for cls in ["mixed", "fully_demanded"]:
        assert count_demands(params, cls) == len(enumerate_demands(params, cls))
    for dtype in enumerate_fully_demanded_types(n, k):
        assert count_demands(params, dtype) == len(enumerate_demands(params, dtype))


def test_single_type_enumeration_agrees_with_filter():
    params = SchemeParams(3, 4, 0)
    by_filter = {}
    for d in enumerate_demands(params, "mixed"):
        by_filter.setdefault(demand_type(params, d).counts, []).append(d)
    for dtype in enumerate_fully_demanded_types(3, 4):
        assert enumerate_demands(params, dtype) == by_filter[dtype.counts]


def test_fully_demanded_types_enumeration():
    types = [t.counts for t in enumerate_fully_demanded_types(3, 6)]
    assert types == [(4, 1, 1), (3, 2, 1), (2, 2, 2)]


def test_leaders_running_example():
    params = SchemeParams(3, 6, 1)
    d = (1, 1, 1, 1, 2, 3)
    info = leaders(params, d, 1)
    assert info.complement == (2, 3, 4, 5, 6)
    assert info.leader_set == frozenset({2, 5, 6})
    assert info.leader_of(1) == 2


def test_leaders_unique_file_requester():
    params = SchemeParams(3, 6, 1)
    info = leaders(params, (1, 1, 1, 1, 2, 3), 5)
    assert info.leader_set == frozenset({1, 6})
    with pytest.raises(KeyError):
        info.leader_of(2)  # only user 5 wanted file 2


def test_leaders_two_users():
    params = SchemeParams(2, 2, 0)
    assert leaders(params, (1, 2), 1).leader_set == frozenset({2})


def test_leaders_rejects_partial_demand():
    params = SchemeParams(3, 3, 0)
    with pytest.raises(NotFullyDemandedError):
        leaders(params, (1, 1, 2), 1)


@pytest.mark.parametrize("n,k", [(2, 3), (3, 4), (3, 5), (4, 6)])
def test_leader_set_size_dichotomy(n, k):
    params = SchemeParams(n, k, 0)
    for d in enumerate_demands(params, "fully_demanded"):
        for s in params.users:
            info = leaders(params, d, s)
            unique = len(requesters(d, d[s - 1])) == 1
            assert len(info.leader_set) == (n - 1 if unique else n)


def test_requesters():
    assert requesters((1, 1, 2, 3), 1) == (1, 2)
    assert requesters((1, 1, 2, 3), 3) == (4,)
    assert requesters((1, 1, 2, 3), 4) == ()


def test_validate_demand():
    params = SchemeParams(3, 3, 0)
    assert validate_demand(params, [1, 2, 3]) == (1, 2, 3)
    with pytest.raises(ValueError):
        validate_demand(params, (1, 2))
    with pytest.raises(ValueError):
        validate_demand(params, (1, 2, 4))
    assert is_fully_demanded(params, (1, 2, 3))
    assert not is_fully_demanded(params, (1, 2, 2))


def test_fraction_round_trip():
    assert format_fraction(parse_fraction("29/15")) == "29/15"
    assert format_fraction(parse_fraction("2")) == "2"
    assert parse_fraction("6/4") == Fraction(3, 2)
    with pytest.raises(ValueError):
        parse_fraction("nope")
    with pytest.raises(ValueError):
        parse_fraction("1/0")


@given(st.integers(-100, 100), st.integers(1, 40))
def test_fraction_arithmetic_lowest_terms(num, den):
    q = Fraction(num, den)
    assert q.denominator > 0
    import math

    assert math.gcd(abs(q.numerator), q.denominator) == 1 or q.numerator == 0
