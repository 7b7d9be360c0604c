import itertools

import numpy as np
import pytest

from kellyscf import rules
from kellyscf.axioms import level_block
from kellyscf.enumeration import DomainSpec, all_profiles, permute_alternatives, permute_voters
from kellyscf.kernels import mask_to_bits
from kellyscf.prefcore import DomainError, Profile, from_mask, parse_order, pareto_optimal_set, support_matrix
from kellyscf.rules import REGISTRY, get_rule

A, B, C, D = range(4)


def P(*orders):
    return Profile(tuple(parse_order(o) for o in orders))


def domain_for(rule, m, n):
    return DomainSpec(m, n, strict_only=rule.requires_strict)


def applicable(rule, m):
    return rule.min_m <= m and (rule.max_m is None or m <= rule.max_m)


# ---------------------------------------------------------------- examples

EXAMPLES = [
    ("pareto", ["a > b > c"] * 3, {A}),
    ("pareto", ["a~b~c"] * 2, {A, B, C}),
    ("omninomination", ["a > b > c", "b > a > c", "a > c > b"], {A, B}),
    ("omninomination", ["a > b > c", "a~b~c"], {A, B, C}),
    ("omninomination", ["a > b > c", "a > c > b"], {A}),
    ("top-pareto", ["a > b > c"] * 3, {A}),
    ("top-pareto", ["a > b > c", "c > b > a"], {A, C}),
    ("top-pareto", ["a~b~c"] * 3, {A, B, C}),
    ("borda", ["a > b > c"] * 2, {A}),
    ("borda", ["a > b > c", "c > b > a"], {A, B, C}),
    ("borda", ["a~b~c"] * 2, {A, B, C}),
    ("plurality", ["a > b > c", "a > c > b", "b > a > c"], {A}),
    ("plurality", ["a~b > c", "a > b > c", "b > a > c"], {A, B}),
    ("plurality", ["a~b~c"], {A, B, C}),
    ("two-star-plurality", ["a > b > c", "a > c > b", "b > a > c", "b > c > a", "c > a > b"], {A, B}),
    ("two-star-plurality", ["a > b > c"] * 5, {A}),
    ("two-star-plurality", ["a > b > c", "b > c > a", "c > a > b"], {A, B, C}),
    ("copeland", ["a > b > c", "b > a > c", "a > c > b"], {A}),
    ("copeland", ["a > b > c", "b > c > a", "c > a > b"], {A, B, C}),
    ("copeland", ["a~b~c"] * 2, {A, B, C}),
    ("fstar", ["c > b > a", "a > b > c", "a > b > c"], {A}),
    ("fstar", ["c > a > b", "b > a > c", "a > b > c"], {A, B, C}),
    ("fstar", ["a > b > c"] * 3, {A}),
    ("lex-pareto", ["b~c > a", "c~b > a"], {B}),
    ("lex-pareto", ["a > b > c"], {A}),
    ("lex-pareto", ["a~b~c"], {A}),
    ("trivial", ["a > b > c"], {A, B, C}),
    ("trivial", ["a~b > c > d", "d > c > b > a"], {A, B, C, D}),
    ("constant", ["c > b > a"], {A}),
    ("all-but-condorcet-loser", ["a > b > c"], {A, B}),
    ("all-but-condorcet-loser", ["a > b > c", "b > c > a", "c > a > b"], {A, B, C}),
    ("all-but-condorcet-loser", ["a > c > b", "a > b > c", "a > b > c", "b > c > a"], {A, B}),
    ("pareto-minus-condorcet-loser", ["a > b > c"], {A}),
    ("pareto-minus-condorcet-loser", ["a > b > c", "b > c > a", "c > a > b"], {A, B, C}),
    ("majority", ["a > b", "a > b", "b > a"], {A}),
    ("majority", ["a > b", "b > a"], {A, B}),
    ("majority", ["a~b", "a~b"], {A, B}),
    ("dictator", ["b~c > a", "a > b > c"], {B, C}),
]


@pytest.mark.parametrize("name,orders,expected", EXAMPLES)
def test_examples(name, orders, expected):
    assert get_rule(name)(P(*orders)) == expected


def test_fstar_witness_pair_has_equal_supports():
    r1 = P("c > b > a", "a > b > c", "a > b > c")
    r2 = P("c > a > b", "b > a > c", "a > b > c")
    assert support_matrix(r1) == support_matrix(r2)
    assert rules.fstar(r1) != rules.fstar(r2)


def test_pareto_minus_loser_example_found_by_search():
    # some m=3, n=3 profile has full Pareto set and a Condorcet loser
    hits = [p for p in all_profiles(DomainSpec(3, 3))
            if pareto_optimal_set(p) == {A, B, C} and rules.condorcet_loser(p) == C]
    assert hits
    assert rules.pareto_minus_condorcet_loser(hits[0]) == {A, B}


def test_two_threshold():
    assert rules.two_threshold([5, 3, 3, 1]) == {0, 1, 2}
    assert rules.two_threshold([2, 2, 2]) == {0, 1, 2}
    assert rules.two_threshold([5, 5, 1]) == {0, 1}
    assert rules.two_threshold([7]) == {0}


def test_domain_errors():
    with pytest.raises(DomainError):
        get_rule("two-star-plurality")(P("a~b > c", "a > b > c"))
    with pytest.raises(DomainError):
        get_rule("majority")(P("a > b > c"))
    with pytest.raises(DomainError):
        get_rule("two-star-plurality").check_domain(3, 5, strict=False)
    get_rule("two-star-plurality").check_domain(3, 5, strict=True)


def test_unknown_rule_suggests():
    with pytest.raises(KeyError, match="fstar"):
        get_rule("fstra")


# ---------------------------------------------------------------- scalar == batch, non-empty


SPECS = [(3, 3, False), (4, 2, False), (3, 5, True), (2, 3, False)]


@pytest.mark.parametrize("m,n,strict", SPECS)
@pytest.mark.parametrize("name", list(REGISTRY))
def test_batch_kernel_matches_scalar_and_is_nonempty(name, m, n, strict):
    rule = REGISTRY[name]
    if not applicable(rule, m) or (rule.requires_strict and not strict):
        pytest.skip("outside the rule's declared domain")
    spec = DomainSpec(m, n, strict_only=strict)
    masks = rule.batch_masks(level_block(spec, 0, spec.profile_count))
    for pid, p in enumerate(all_profiles(spec)):
        out = rule(p)
        assert out and out <= set(range(m))
        assert from_mask(int(masks[pid])) == out, (name, p)


def test_guard_never_fires():
    before = rules.GUARD_HITS
    for m, n in [(2, 3), (3, 3), (3, 4), (4, 2)]:
        spec = DomainSpec(m, n)
        for p in all_profiles(spec):
            rules.pareto_minus_condorcet_loser(p)
        REGISTRY["pareto-minus-condorcet-loser"].batch_masks(level_block(spec, 0, spec.profile_count))
    assert rules.GUARD_HITS == before == 0


def test_top_pareto_nonempty_m4_n3():
    spec = DomainSpec(4, 3)
    bits = mask_to_bits(REGISTRY["top-pareto"].batch_masks(level_block(spec, 0, spec.profile_count)), 4)
    assert bits.any(axis=1).all()


# ---------------------------------------------------------------- symmetries


@pytest.mark.parametrize("name", ["borda", "plurality", "copeland", "two-plurality", "two-borda",
                                  "two-copeland", "pareto", "fstar", "omninomination"])
def test_anonymity(name):
    rule = get_rule(name)
    for p in all_profiles(DomainSpec(3, 2)):
        assert rule(permute_voters(p, [1, 0])) == rule(p)


@pytest.mark.parametrize("name", ["borda", "copeland", "fstar", "pareto"])
def test_neutrality(name):
    rule = get_rule(name)
    for perm in itertools.permutations(range(3)):
        for p in all_profiles(DomainSpec(3, 2)):
            assert rule(permute_alternatives(p, perm)) == {perm[x] for x in rule(p)}


def test_dictator_is_not_anonymous():
    p = P("a > b > c", "c > b > a")
    assert rules.dictator(p) != rules.dictator(permute_voters(p, [1, 0]))


def _fstar_dominance_table(lv):
    # (P, m, m) relation written from the definition, independent of the rule kernel
    n = lv.shape[1]
    a, b = lv[:, :, :, None], lv[:, :, None, :]
    pareto = (a <= b).all(axis=1) & (a < b).any(axis=1)
    s = (a < b).sum(axis=1)
    tops = (lv == 0).sum(axis=1)
    near = (tops[:, :, None] >= n - 1) & (s >= 2) & (s.transpose(0, 2, 1) <= 1)
    dom = pareto | near
    idx = np.arange(lv.shape[2])
    dom[:, idx, idx] = False
    return dom


def test_fstar_dominance_is_transitive_m3_n3_scalar():
    m = 3
    for p in all_profiles(DomainSpec(m, 3)):
        dom = [[a != b and rules.fstar_dominates(p, a, b) for b in range(m)] for a in range(m)]
        for a, b, c in itertools.permutations(range(m), 3):
            if dom[a][b] and dom[b][c]:
                assert dom[a][c], p
        assert not any(dom[a][b] and dom[b][a] for a in range(m) for b in range(m))


def test_fstar_dominance_is_transitive_m4_n3_exhaustive():
    m = 4
    spec = DomainSpec(m, 3)
    lv = level_block(spec, 0, spec.profile_count).astype(np.int8)
    dom = _fstar_dominance_table(lv)
    for a, b, c in itertools.permutations(range(m), 3):
        assert not (dom[:, a, b] & dom[:, b, c] & ~dom[:, a, c]).any()
    assert not (dom & dom.transpose(0, 2, 1)).any()
    # the table is the scalar relation
    rng = np.random.default_rng(7)
    for pid in rng.choice(spec.profile_count, size=1500, replace=False).tolist():
        p = spec.decode(pid)
        expect = [[a != b and rules.fstar_dominates(p, a, b) for b in range(m)] for a in range(m)]
        assert dom[pid].tolist() == expect
