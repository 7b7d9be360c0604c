import math
import random

import pytest

import _oracles as ref
from kellyscf.enumeration import (
    MAX_PROFILES,
    CapacityError,
    DomainSpec,
    all_orders,
    all_profiles,
    anonymous_representatives,
    canonical_voter_representative,
    deviations,
    inverse_permutation,
    permute_alternatives,
    permute_voters,
)
from kellyscf.prefcore import DomainError, Profile, parse_order


@pytest.mark.parametrize("m,count", [(1, 1), (2, 3), (3, 13), (4, 75), (5, 541)])
def test_weak_order_counts_are_ordered_bell(m, count):
    orders = all_orders(DomainSpec(m, 1))
    assert len(orders) == count == ref.ordered_bell(m)
    assert {o.levels for o in orders} == set(ref.weak_orders(m))
    assert len(set(orders)) == count


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_strict_order_counts(m):
    orders = all_orders(DomainSpec(m, 1, strict_only=True))
    assert len(orders) == math.factorial(m)
    assert all(o.is_strict() for o in orders)


def test_exclude_indifferent():
    spec = DomainSpec(3, 2, exclude_indifferent=True)
    assert spec.order_count == 12
    assert not any(o.is_indifferent() for o in spec.orders)


@pytest.mark.parametrize("m,n,strict,total", [(3, 2, False, 169), (3, 3, False, 2197), (3, 5, True, 7776)])
def test_profile_counts(m, n, strict, total):
    spec = DomainSpec(m, n, strict_only=strict)
    assert spec.profile_count == total
    if total < 3000:
        assert sum(1 for _ in all_profiles(spec)) == total


def test_ids_follow_enumeration_order_and_resume():
    spec = DomainSpec(3, 2)
    listed = list(all_profiles(spec))
    assert [spec.encode(p) for p in listed] == list(range(len(listed)))
    assert list(all_profiles(spec, start=100)) == listed[100:]
    assert list(all_profiles(spec, start=spec.profile_count)) == []


@pytest.mark.parametrize("spec", [DomainSpec(3, 3), DomainSpec(4, 3), DomainSpec(4, 5), DomainSpec(3, 5, True)])
def test_encode_decode_round_trip_random(spec):
    rng = random.Random(20261017)
    for _ in range(1000):
        pid = rng.randrange(spec.profile_count)
        assert spec.encode(spec.decode(pid)) == pid


def test_id_block_matches_digits():
    spec = DomainSpec(3, 3)
    block = spec.id_block(500, 520)
    assert [tuple(r) for r in block.tolist()] == [spec.digits(i) for i in range(500, 520)]
    assert spec.ids_of(block).tolist() == list(range(500, 520))


def test_capacity_error_before_iteration():
    spec = DomainSpec(6, 20)
    assert spec.profile_count > MAX_PROFILES
    with pytest.raises(CapacityError):
        next(all_profiles(spec))


def test_bad_ids_and_shapes():
    spec = DomainSpec(3, 2)
    with pytest.raises(DomainError):
        spec.decode(169)
    with pytest.raises(DomainError):
        spec.encode(Profile((parse_order("a > b"),) * 2))
    strict = DomainSpec(3, 2, strict_only=True)
    with pytest.raises(DomainError):
        strict.encode(Profile((parse_order("a~b > c"),) * 2))


@pytest.mark.parametrize("strict,expected", [(False, 12), (True, 5)])
def test_deviations(strict, expected):
    spec = DomainSpec(3, 2, strict_only=strict)
    for p in all_profiles(spec):
        for voter in range(2):
            devs = list(deviations(p, voter, spec))
            assert len(devs) == expected == spec.order_count - 1
            assert p not in devs
            assert all(d.voters[1 - voter] == p.voters[1 - voter] for d in devs)
    with pytest.raises(DomainError):
        list(deviations(p, 2, spec))


def test_permutations():
    p = Profile(tuple(parse_order(t) for t in ["a > b > c", "b~c > a", "a > b > c"]))
    assert permute_voters(p, [0, 1, 2]) == p
    assert permute_voters(p, [2, 1, 0]) == p  # voters 1 and 3 agree
    assert permute_alternatives(p, [0, 1, 2]) == p
    swap = [1, 0, 2]
    assert permute_alternatives(permute_alternatives(p, swap), swap) == p
    with pytest.raises(DomainError):
        permute_voters(p, [0, 0, 1])
    with pytest.raises(DomainError):
        permute_alternatives(p, [0, 1])


def test_alternative_permutation_inverse_exhaustive():
    import itertools

    spec = DomainSpec(3, 2)
    for perm in itertools.permutations(range(3)):
        inv = inverse_permutation(perm)
        for p in all_profiles(spec):
            assert permute_alternatives(permute_alternatives(p, perm), inv) == p


def test_anonymous_representatives():
    spec = DomainSpec(3, 3)
    reps = list(anonymous_representatives(spec))
    assert len(reps) == math.comb(13 + 2, 3)
    classes = {canonical_voter_representative(p) for p in all_profiles(spec)}
    assert classes == {canonical_voter_representative(r) for r in reps}


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("strict", [False, True])
@pytest.mark.parametrize("excl", [False, True])
def test_counted_order_count_matches_enumeration(m, strict, excl):
    spec = DomainSpec(m, 2, strict_only=strict, exclude_indifferent=excl)
    assert spec.order_count == len(all_orders(spec))
