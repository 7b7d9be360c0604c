"""Built-in scenarios: the finite profile chains of the impossibility proofs.

Placeholder blocks of "remaining alternatives" are instantiated as empty, so
each scenario uses the smallest number of alternatives its argument needs.
Hypothesis seeds stand for intermediate results that hold only under extra
assumptions; each description names the fact that licenses them.
Voters are numbered from 1 in labels and ``walk`` calls.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

from ..prefcore import Profile, WeakOrder, to_mask
from .scenario import (
    Expectation,
    Scenario,
    ScenarioBuilder,
    find_symmetry,
    full_domain_scenario,
    transform,
)

A, B, C, D, E = range(5)


def _forced(b: ScenarioBuilder, *pairs: tuple[str, set[int]]) -> tuple[tuple[int, int], ...]:
    return tuple((b.index(label), to_mask(xs)) for label, xs in pairs)


# ---------------------------------------------------------------------------


def rank_based_m4() -> Scenario:
    """No rank-based, Pareto-optimal, strategyproof SCF for m=4, n=3."""
    n = 3
    b = ScenarioBuilder("thm1", 4, n)
    rest = ["a > b~c~d"] * (n - 2)
    # voter 2 is no nominator: three rank-equal profiles, a dominates b, c, d in turn
    b.add("R1", b.profile("a~b > c~d", "c~d > a~b", *rest))
    b.add("R2", b.profile("a~c > b~d", "b~d > a~c", *rest))
    b.add("R3", b.profile("a~d > b~c", "b~c > a~d", *rest))
    # near unanimity pushes a through voter 1's bottom position
    for k in range(1, n + 1):
        mid = ["a~b > c > d"] * (k - 1)
        tail = ["a > b > c > d"] * (n - k)
        b.add(f"R{k},1", b.profile("c~d > b > a", *mid, *tail))
        b.add(f"R{k},2", b.profile("b~d > c > a", *mid, *tail))
        if k < n:
            r2 = b.profile("b~d > c > a", *mid, *tail)
            b.add(f"R{k},3", r2.replace(k, b.order("a~c > b > d")))
    b.description = (
        "R1-R3 show that voter 2 is no nominator, which licenses NearUnanimitySeed "
        "(for an anonymous SCF with a non-nominator, Pareto-optimality plus strategyproofness "
        "give near unanimity). The second chain then forces {a} where b Pareto-dominates a."
    )
    return b.build(
        ["ParetoPrune", "StrategyproofArcs", "RankEquality", "NearUnanimitySeed"],
        Expectation("contradiction"),
    )


def near_unanimity_example() -> Scenario:
    """Worked push-down example: f(R0) = {a,d} forces {a} where a is voter 1's bottom."""
    b = ScenarioBuilder("lemma1-example", 4, 3)
    r0 = b.add("R0", b.profile("b > a~d > c", "d > a > b~c", "a~c > b~d"))
    r1 = b.alias(b.walk("R0-R1", r0, [2, 3], "a~d > b~c"), "R1")
    r2 = b.add("R2", r1.replace(0, b.order("b > a > d > c")))
    r3 = b.alias(b.walk("R2-R3", r2, [2, 3], "a > b > c~d"), "R3")
    b.add("R4", r3.replace(0, b.order("b > d > c > a")))
    b.seed("R0", [{A, D}], "R0 = {a,d}")
    b.description = "Seed f(R0)={a,d} is the hypothetical non-nominator outcome; no hypothesis seed is used."
    return b.build(
        ["ParetoPrune", "StrategyproofArcs"],
        Expectation("forced", _forced(b, ("R2", {A}), ("R4", {A}))),
    )


def _cl_chain(b: ScenarioBuilder, tag: str, perm: tuple[int, ...]) -> Profile:
    """Unanimity-to-R8 part of the Condorcet-loser push-down, renamed by ``perm``."""
    bc = (A, C, B, D)

    def o(text: str, swap: bool = False) -> WeakOrder:
        w = b.order(text)
        return (w.permuted(bc) if swap else w).permuted(perm)

    def sub_chain(prefix: str, swap: bool) -> Profile:
        r = b.ensure(f"{tag}{prefix}1", Profile((o("a > b > c > d", swap),) * 4))
        r = b.walk(f"{tag}{prefix}1-2", r, [1, 2, 3], o("a > c > d > b", swap))
        r = b.ensure(f"{tag}{prefix}3", r.replace(3, o("b > a > c > d", swap)))
        r = b.walk(f"{tag}{prefix}3-4", r, [1, 2, 3], o("a > d > b > c", swap))
        return b.ensure(f"{tag}{prefix}5", r.replace(3, o("c > a~b > d", swap)))

    r6 = b.walk(f"{tag}R5-R6", sub_chain("R", False), [1, 2, 3], o("a > b > c > d"))
    # voter 4 renaming b and c is the same chain with b and c exchanged
    r7 = b.walk(f"{tag}S5-R7", sub_chain("S", True), [1, 2, 3], o("a > b > c > d"))
    r8 = b.ensure(f"{tag}R8", r6.replace(3, o("d > a~b~c")))
    assert r7.replace(3, o("d > a~b~c")) == r8
    return r8


def condorcet_loser_example() -> Scenario:
    """Worked push-down under non-imposition and the Condorcet loser property."""
    b = ScenarioBuilder("lemma3-example", 4, 4)
    r8 = _cl_chain(b, "", (A, B, C, D))
    target = b.order("a > c > b > d")
    r11 = b.alias(b.walk("R8-R11", r8, [1, 2, 3], target), "R11")
    # images of the whole derivation with d renamed to b, and to c
    for tag, perm, label in (("B:", (A, D, C, B), "R9"), ("C:", (A, B, D, C), "R10")):
        end = _cl_chain(b, tag, perm)
        b.alias(b.walk(f"{tag}R8-end", end, [1, 2, 3], target), label)
    b.add("R12", r11.replace(3, b.order("b > c > d > a")))
    b.description = (
        "NonImpositionSeed: with strategyproofness, non-imposition makes a unanimously "
        "top-ranked alternative the unique winner."
    )
    return b.build(
        ["StrategyproofArcs", "CondorcetLoserPrune", "NonImpositionSeed"],
        Expectation("forced", _forced(b, ("R8", {A}), ("R12", {A}))),
    )


def _cl_base_chain(b: ScenarioBuilder, tag: str, vperm=None, aperm=None) -> Profile:
    """R1 to R5 of the n=4 base case, optionally mapped by a symmetry."""
    steps = [(1, "a~c > b"), (2, "a > c > b"), (4, "c > a~b"), (3, "b > a > c"), (4, "c > b > a")]

    def img(p: Profile) -> Profile:
        return p if vperm is None else transform(p, vperm, aperm)

    cur = b.profile("a > c > b", "a > b > c", "a > b > c", "b > c > a")
    b.ensure(f"{tag}R1", img(cur))
    for k, (voter, text) in enumerate(steps, start=2):
        cur = cur.replace(voter - 1, b.order(text))
        b.ensure(f"{tag}s{k}", img(cur))
    return img(cur)


def _path(b: ScenarioBuilder, tag: str, start: Profile, moves) -> Profile:
    p = start
    for voter, text in moves:
        p = b.ensure(f"{tag}.v{voter}", p.replace(voter - 1, b.order(text)))
    return p


def condorcet_loser_n4() -> Scenario:
    """No strategyproof, non-imposing SCF with the Condorcet loser property for n=4."""
    b = ScenarioBuilder("thm4-base", 3, 4)
    r5 = b.alias(_cl_base_chain(b, ""), "R5")
    targets = {
        "R6": (("b~c > a", "a > c > b", "b > a > c", "c > b > a"), {A, C}),
        "R7": (("a > b > c", "c > a > b", "b~c > a", "b > c > a"), {A, B}),
        "R8": (("a > b > c", "c > a > b", "a~c > b", "b > c > a"), {B, C}),
    }
    for label, (orders, claim) in targets.items():
        t = b.profile(*orders)
        vperm, aperm = find_symmetry(r5, t, {A, B}, claim)
        end = _cl_base_chain(b, f"{label}:", vperm, aperm)
        assert end == t
        b.alias(end, label)
    r7 = b.profile(*targets["R7"][0])
    p = _path(b, "R5-R9", r5, [(1, "a > b > c"), (2, "a > b > c"), (4, "b > a > c")])
    q = _path(b, "R7-R9", r7, [(3, "b > a > c"), (4, "b > a > c"), (2, "a > b > c")])
    assert p == q
    b.alias(p, "R9")
    b.description = (
        "AbsoluteMajoritySeed: under strategyproofness plus non-imposition, the Condorcet "
        "loser property with n >= 3 makes an alternative uniquely top-ranked by a strict majority "
        "the unique winner. Symmetric chains are explicit images under voter and "
        "alternative renamings."
    )
    return b.build(
        ["StrategyproofArcs", "CondorcetLoserPrune", "AbsoluteMajoritySeed"],
        Expectation("contradiction"),
    )


def condorcet_loser_odd() -> Scenario:
    """Odd-n variant without indifferent voters (n=5, l=3)."""
    n, l = 5, 3
    b = ScenarioBuilder("thm4-alt-odd", 3, n)
    r1 = b.add("R1", b.profile("a > b > c", *["a > c > b"] * (l - 1), *["b > a~c"] * (n - l)))
    r2 = b.add("R2", r1.replace(l - 1, b.order("c > a > b")))
    r3 = b.alias(b.walk("R2-R3", r2, range(l + 1, n + 1), "b > c > a"), "R3")
    b.add("R3'", r3.replace(0, b.order("b > a > c")))
    r4 = b.add("R4", b.profile(*["a > c > b"] * (l - 1), "c > a > b", *["c > b > a"] * (n - l)))
    r5 = b.alias(b.walk("R4-R5", r4, range(l + 1, n + 1), "b > c > a"), "R5")
    assert r5.replace(0, b.order("a > b > c")) == r3
    b.description = "AbsoluteMajoritySeed, licensed as in the n=4 base case."
    return b.build(
        ["StrategyproofArcs", "CondorcetLoserPrune", "AbsoluteMajoritySeed"],
        Expectation("contradiction"),
    )


def majority_based() -> Scenario:
    """No majority-based, non-imposing, strategyproof SCF for m=3, n=3."""
    b = ScenarioBuilder("thmC1", 3, 3)
    r1 = b.add("R1", b.profile("c > b > a", "a > b > c", "a > c > b"))
    b.add("R2", r1.replace(1, b.order("a~b > c")))
    r3 = b.add("R3", b.profile("c > a~b", "b > a > c", "a > c > b"))
    r4 = b.alias(b.add("R4", r3.replace(0, b.order("c > b > a"))), "R5")
    b.add("R6", r4.replace(0, b.order("b > c > a")))
    b.alias(_path(b, "R5-R7", r4, [(3, "c > b > a"), (2, "b > c > a")]), "R7")
    b.description = (
        "CondorcetWinnerSeed: for a majority-based SCF, strategyproofness plus "
        "non-imposition imply Condorcet-consistency."
    )
    return b.build(
        ["StrategyproofArcs", "MajorityEquality", "CondorcetWinnerSeed"],
        Expectation("contradiction"),
    )


def support_based_step(n: int, k: int = 1, global_quota: bool = False) -> Scenario:
    """One unrolled induction step of the nominator argument for support-based SCFs.

    The induction hypothesis ("n-k voters who uniquely top-rank x make x the
    unique winner") is used at R1 and R6 only.  By default it enters as
    explicit seeds on those two profiles; ``global_quota`` instead applies it
    to every profile through ``QuotaSeed``.  For n=3 the global form already
    contradicts the chain, since n-k is then a strict majority.
    """
    name = f"thm2-step-n{n}" + ("-global" if global_quota else "")
    b = ScenarioBuilder(name, 3, n)
    r = b.add("R1", b.profile(*["a > c > b"] * k, "c > b > a", *["a > b > c"] * (n - k - 1)))
    pivot = k  # 0-based index of voter k+1
    for j in range(k + 1, n):  # 0-based indices of voters k+2..n
        r = b.ensure(f"R2[{j + 1}]", r.replace(j, b.order("a~b > c")))
        swap = r.replace(pivot, b.order("c > a~b")).replace(j, b.order("b > a > c"))
        r = b.ensure(f"R3[{j + 1}]", swap)
        r = b.ensure(f"R4[{j + 1}]", r.replace(pivot, b.order("c > b > a")))
    r5 = b.alias(r, "R5")
    b.add("R6", r5.replace(pivot, b.order("b > a > c")))
    r7 = b.alias(b.walk("R5-R7", r5, range(1, k + 1), "c > a > b"), "R7")
    r8 = b.alias(b.walk("R7-R8", r7, range(k + 2, n + 1), "b > c > a"), "R8")
    b.add("R9", r8.replace(pivot, b.order("c > a > b")))
    axioms = ["ParetoPrune", "StrategyproofArcs", "SupportEquality"]
    if global_quota:
        axioms.append("QuotaSeed")
    else:
        b.seed("R1", [{A}], "R1 = {a}")
        b.seed("R6", [{B}], "R6 = {b}")
    b.description = (
        f"The induction hypothesis with quota n-k = {n - k} (for k=1 this is near unanimity, "
        "licensed by a non-nominator) fixes f(R1)={a} and f(R6)={b}. The final "
        "generalization to every profile where voters k+2..n top-rank b uses neutrality "
        "and voter reordering and is not replayed."
    )
    return b.build(
        axioms,
        Expectation("forced", _forced(b, ("R5", {B}), ("R9", {B}))),
        quota=n - k if global_quota else None,
    )


def rank_based_boundary() -> Scenario:
    """No rank-based, Pareto-optimal, strategyproof SCF for m=5, n=2."""
    b = ScenarioBuilder("thm1-boundaries", 5, 2)
    b.add("R1", b.profile("a~b > e > c~d", "c~d > a > b~e"))
    b.add("R2", b.profile("a~c > e > b~d", "b~d > a > c~e"))
    b.add("R3", b.profile("a~d > e > b~c", "b~c > a > d~e"))
    b.add("C", b.profile("a > b > c > d > e", "b > a > c > d > e"))
    b.description = (
        "R1-R3 force {a} although voter 2 top-ranks c and d, so voter 2 is no nominator; "
        "that licenses NearUnanimitySeed, which for n=2 lets each voter alone decide."
    )
    return b.build(
        ["ParetoPrune", "RankEquality", "NearUnanimitySeed"],
        Expectation("contradiction", _forced(b, ("R1", {A}))),
    )


def pairwise_corollary() -> Scenario:
    return full_domain_scenario(
        "pairwise-corollary",
        3,
        3,
        ["PairwiseEquality", "ParetoPrune", "StrategyproofArcs"],
        expect=Expectation("unsatisfiable"),
        description="Full weak domain; profiles with equal majority margins collapse to one variable.",
    )


_FACTORIES: dict[str, Callable[[], Scenario]] = {
    "lemma1-example": near_unanimity_example,
    "lemma3-example": condorcet_loser_example,
    "thm1": rank_based_m4,
    "thm2-step-n3": lambda: support_based_step(3),
    "thm2-step-n4": lambda: support_based_step(4),
    "thm4-base": condorcet_loser_n4,
    "thm4-alt-odd": condorcet_loser_odd,
    "thmC1": majority_based,
    "thm1-boundaries": rank_based_boundary,
    "pairwise-corollary": pairwise_corollary,
}

#: scenarios replayed by propagation alone (the rest need search)
REPLAY_SCENARIOS = tuple(k for k in _FACTORIES if k != "pairwise-corollary")


@lru_cache(maxsize=None)
def _build(name: str) -> Scenario:
    return _FACTORIES[name]()


def scenario_names() -> list[str]:
    return list(_FACTORIES)


def get_scenario(name: str) -> Scenario:
    if name not in _FACTORIES:
        import difflib

        hint = difflib.get_close_matches(name, _FACTORIES, n=1)
        raise KeyError(f"unknown scenario {name!r}" + (f"; did you mean {hint[0]}?" if hint else ""))
    return _build(name)


def scenario_library() -> dict[str, Scenario]:
    return {name: _build(name) for name in _FACTORIES}
