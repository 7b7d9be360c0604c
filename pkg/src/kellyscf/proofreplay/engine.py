"""Candidate-set propagation for an unknown SCF on a finite list of profiles.

Every profile of a scenario carries a set of still admissible choice sets,
stored as an int bitset where bit ``X`` stands for the choice set with mask
``X``.  Axioms shrink these sets:

* unary prunes (Pareto, weak Pareto, Condorcet loser) and hypothesis seeds
  act on one profile at a time;
* ``StrategyproofArcs`` links every pair of profiles that differ in exactly
  one voter and is enforced by arc consistency on the pair constraint
  "neither endpoint's voter gains by moving to the other endpoint";
* basedness and anonymity axioms link profiles with equal signatures, which
  must receive the same choice set.

Each removal is logged as a :class:`Step`.  :func:`audit` replays a trace
from the initial map and re-derives every removal from the scalar
definitions in :mod:`kellyscf.prefcore`, independently of the bitset tables
used here.
"""

from __future__ import annotations

import sys
import time
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from ..enumeration import canonical_voter_representative
from ..prefcore import (
    Profile,
    WeakOrder,
    condorcet_loser,
    condorcet_winner,
    from_mask,
    kelly_strictly_prefers,
    majority_relation,
    margin_matrix,
    pareto_dominates,
    rank_matrix,
    render_set,
    support_matrix,
    unique_top_counts,
)
from .scenario import EQUALITY_AXIOMS, HYPOTHESIS_SEEDS, UNARY_AXIOMS, Scenario

# ---------------------------------------------------------------------------
# bitsets over choice sets


def full_bitset(m: int) -> int:
    """All non-empty choice sets: bits ``1 .. 2^m - 1``."""
    return ((1 << (1 << m)) - 1) & ~1


def masks_of(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def bitset_of(masks: Iterable[int]) -> int:
    bits = 0
    for X in masks:
        bits |= 1 << X
    return bits


def _names(m: int) -> list[str]:
    return [chr(ord("a") + x) for x in range(m)]


def render_mask(X: int, m: int) -> str:
    return render_set(from_mask(X), _names(m))


@dataclass
class CandidateMap:
    """Admissible choice sets per profile index."""

    m: int
    domains: list[int]
    conflict: str | None = None  # seed that emptied a profile at init

    def copy(self) -> CandidateMap:
        return CandidateMap(self.m, list(self.domains), self.conflict)

    def candidates(self, i: int) -> list[int]:
        return masks_of(self.domains[i])

    def count(self, i: int) -> int:
        return bin(self.domains[i]).count("1")

    def total(self) -> int:
        return sum(self.count(i) for i in range(len(self.domains)))

    def contradiction(self) -> int | None:
        """First profile with no admissible choice set, if any."""
        for i, d in enumerate(self.domains):
            if d == 0:
                return i
        return None

    def is_forced(self, i: int, X: int) -> bool:
        return self.domains[i] == 1 << X

    def render(self, i: int) -> str:
        return "{" + ", ".join(render_mask(X, self.m) for X in self.candidates(i)) + "}"

    def to_record(self, scenario: Scenario) -> dict[str, list[str]]:
        return {
            scenario.label(i): [render_mask(X, self.m) for X in self.candidates(i)]
            for i in range(len(self.domains))
        }


# ---------------------------------------------------------------------------
# trace


@dataclass(frozen=True)
class Step:
    """One justified removal of candidates from ``profile``.

    ``partner`` and ``support`` are set for binary rules: ``support`` is the
    partner's candidate list at the time of the removal.  ``voter`` is the
    deviating voter of a strategyproofness arc.
    """

    rule: str
    profile: int
    removed: tuple[int, ...]
    partner: int | None = None
    voter: int | None = None
    support: tuple[int, ...] | None = None
    note: str = ""

    def to_record(self, scenario: Scenario) -> dict:
        m = scenario.m
        rec = {
            "rule": self.rule,
            "profile": scenario.label(self.profile),
            "removed": [render_mask(X, m) for X in self.removed],
        }
        if self.partner is not None:
            rec["partner"] = scenario.label(self.partner)
        if self.voter is not None:
            rec["voter"] = self.voter + 1
        if self.support is not None:
            rec["support"] = [render_mask(X, m) for X in self.support]
        if self.note:
            rec["note"] = self.note
        return rec


def trace_records(trace: Sequence[Step], scenario: Scenario) -> list[dict]:
    return [dict(step=k, **s.to_record(scenario)) for k, s in enumerate(trace)]


# ---------------------------------------------------------------------------
# per-order Kelly tables


@lru_cache(maxsize=None)
def _kelly_rows(order: WeakOrder) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``better[X]``: sets Kelly-above ``X``; ``worse[X]``: sets Kelly-below ``X``."""
    m = len(order.levels)
    size = 1 << m
    lo = [0] * size
    hi = [0] * size
    for X in range(1, size):
        lv = [order.levels[x] for x in range(m) if X >> x & 1]
        lo[X], hi[X] = min(lv), max(lv)
    better = [0] * size
    worse = [0] * size
    for X in range(1, size):
        for Y in range(1, size):
            # X above Y iff X's worst is no worse than Y's best, with some strict pair
            if hi[X] <= lo[Y] and lo[X] < hi[Y]:
                worse[X] |= 1 << Y
                better[Y] |= 1 << X
    return tuple(better), tuple(worse)


@lru_cache(maxsize=None)
def _allowed_rows(own: WeakOrder, other: WeakOrder) -> tuple[int, ...]:
    """``allowed[X]``: partner sets compatible with ``X`` on an arc.

    The voter holds ``own`` at this endpoint and ``other`` at the partner.
    ``(X here, Y there)`` is admissible iff ``Y`` is not Kelly-above ``X``
    under ``own`` and ``X`` is not Kelly-above ``Y`` under ``other``.
    """
    m = len(own.levels)
    full = full_bitset(m)
    better, _ = _kelly_rows(own)
    _, worse = _kelly_rows(other)
    return tuple(full & ~(better[X] | worse[X]) for X in range(1 << m))


# ---------------------------------------------------------------------------
# scalar signatures


def signature(relation: str, profile: Profile):
    if relation == "rank":
        return rank_matrix(profile).rows
    if relation == "support":
        return support_matrix(profile).s
    if relation == "margin":
        return margin_matrix(profile)
    if relation == "majority":
        return majority_relation(profile).rel
    if relation == "anonymity":
        return canonical_voter_representative(profile).voters
    raise ValueError(f"unknown relation {relation!r}")


_LINK_RELATION = dict(EQUALITY_AXIOMS, AnonymityLink="anonymity")


# ---------------------------------------------------------------------------
# unary rules


def _dominated_alternatives(profile: Profile, weak: bool) -> int:
    m, bad = profile.m, 0
    for y in range(m):
        for x in range(m):
            if x == y:
                continue
            if weak:
                if all(v.strictly_prefers(x, y) for v in profile.voters):
                    bad |= 1 << y
            elif pareto_dominates(profile, x, y):
                bad |= 1 << y
    return bad


def _excluded_alternatives(rule: str, profile: Profile) -> int:
    if rule == "ParetoPrune":
        return _dominated_alternatives(profile, weak=False)
    if rule == "WeakParetoPrune":
        return _dominated_alternatives(profile, weak=True)
    if rule == "CondorcetLoserPrune":
        z = condorcet_loser(profile)
        return 0 if z is None else 1 << z
    raise ValueError(rule)


def _sets_meeting(alts: int, m: int) -> int:
    """Bitset of the choice sets that contain some alternative of ``alts``."""
    return bitset_of(X for X in range(1, 1 << m) if X & alts)


def seed_alternatives(rule: str, profile: Profile, quota: int | None = None) -> list[int]:
    """Alternatives a hypothesis seed forces as the singleton outcome."""
    n = profile.n
    if rule == "CondorcetWinnerSeed":
        w = condorcet_winner(profile)
        return [] if w is None else [w]
    counts = unique_top_counts(profile)
    if rule == "NearUnanimitySeed":
        if n < 2:
            return []
        need = n - 1
    elif rule == "NonImpositionSeed":
        need = n
    elif rule == "AbsoluteMajoritySeed":
        need = n // 2 + 1
    elif rule == "QuotaSeed":
        need = quota
    else:
        raise ValueError(rule)
    return [x for x, c in enumerate(counts) if c >= need]


# ---------------------------------------------------------------------------
# initial map and single-rule passes


def init(scenario: Scenario) -> CandidateMap:
    """All non-empty choice sets everywhere, intersected with the seeds."""
    full = full_bitset(scenario.m)
    cmap = CandidateMap(scenario.m, [full] * len(scenario.profiles))
    for s in scenario.seeds:
        cmap.domains[s.index] &= bitset_of(s.allowed)
        if cmap.domains[s.index] == 0 and cmap.conflict is None:
            cmap.conflict = s.text or f"seed on {scenario.label(s.index)}"
    return cmap


def _unary_pass(cmap: CandidateMap, scenario: Scenario, rule: str) -> CandidateMap:
    out = cmap.copy()
    for i, p in enumerate(scenario.profiles):
        out.domains[i] &= ~_sets_meeting(_excluded_alternatives(rule, p), scenario.m)
    return out


def prune_pareto(cmap: CandidateMap, scenario: Scenario) -> CandidateMap:
    return _unary_pass(cmap, scenario, "ParetoPrune")


def prune_weak_pareto(cmap: CandidateMap, scenario: Scenario) -> CandidateMap:
    return _unary_pass(cmap, scenario, "WeakParetoPrune")


def prune_condorcet_loser(cmap: CandidateMap, scenario: Scenario) -> CandidateMap:
    return _unary_pass(cmap, scenario, "CondorcetLoserPrune")


def _seed_pass(cmap: CandidateMap, scenario: Scenario, rule: str) -> CandidateMap:
    out = cmap.copy()
    for i, p in enumerate(scenario.profiles):
        for x in seed_alternatives(rule, p, scenario.quota):
            out.domains[i] &= 1 << (1 << x)
    return out


def seed_near_unanimity(cmap: CandidateMap, scenario: Scenario) -> CandidateMap:
    return _seed_pass(cmap, scenario, "NearUnanimitySeed")


def seed_absolute_majority(cmap: CandidateMap, scenario: Scenario) -> CandidateMap:
    return _seed_pass(cmap, scenario, "AbsoluteMajoritySeed")


def arc_strategyproof(cmap: CandidateMap, scenario: Scenario) -> CandidateMap:
    """One revision of every strategyproofness arc in both directions."""
    out = cmap.copy()
    for u, v, i in _sp_arcs(scenario):
        pu, pv = scenario.profiles[u], scenario.profiles[v]
        for s, t, os_, ot in ((u, v, pu.voters[i], pv.voters[i]), (v, u, pv.voters[i], pu.voters[i])):
            rows = _allowed_rows(os_, ot)
            for X in masks_of(out.domains[s]):
                if out.domains[t] & rows[X] == 0:
                    out.domains[s] &= ~(1 << X)
    return out


def link_equalities(cmap: CandidateMap, scenario: Scenario) -> CandidateMap:
    """Intersect the candidates of every linked group."""
    out = cmap.copy()
    for group in _link_groups(scenario):
        common = -1
        for i in group:
            common &= out.domains[i]
        for i in group:
            out.domains[i] = common
    return out


# ---------------------------------------------------------------------------
# constraint discovery


def _sp_arcs(scenario: Scenario) -> list[tuple[int, int, int]]:
    """``(u, v, voter)`` with ``u < v`` for every pair differing in one voter."""
    if "StrategyproofArcs" not in scenario.axioms:
        return []
    arcs = []
    profiles = scenario.profiles
    for i in range(scenario.n):
        groups: dict[tuple, list[int]] = {}
        for idx, p in enumerate(profiles):
            groups.setdefault(p.voters[:i] + p.voters[i + 1:], []).append(idx)
        for members in groups.values():
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    arcs.append((members[a], members[b], i))
    arcs.sort()
    return arcs


def _link_groups_by(scenario: Scenario) -> list[tuple[str, list[int]]]:
    out = []
    for axiom in sorted(_LINK_RELATION):
        if axiom not in scenario.axioms:
            continue
        relation = _LINK_RELATION[axiom]
        groups: dict = {}
        for idx, p in enumerate(scenario.profiles):
            groups.setdefault(signature(relation, p), []).append(idx)
        out.extend((axiom, g) for g in groups.values() if len(g) > 1)
    return out


def _link_groups(scenario: Scenario) -> list[list[int]]:
    return [g for _, g in _link_groups_by(scenario)]


@dataclass(frozen=True)
class Constraint:
    rule: str
    u: int
    v: int
    voter: int | None = None


def constraints(scenario: Scenario) -> list[Constraint]:
    out = [Constraint("StrategyproofArcs", u, v, i) for u, v, i in _sp_arcs(scenario)]
    for axiom, group in _link_groups_by(scenario):
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                out.append(Constraint(axiom, group[a], group[b]))
    return out


# ---------------------------------------------------------------------------
# propagation


class _Propagator:
    def __init__(self, scenario: Scenario, cmap: CandidateMap):
        self.sc = scenario
        self.cmap = cmap
        self.trace: list[Step] = []
        self.cons = constraints(scenario)
        self.incident: list[list[int]] = [[] for _ in scenario.profiles]
        for k, c in enumerate(self.cons):
            self.incident[c.u].append(k)
            self.incident[c.v].append(k)

    def remove(self, i: int, bits: int, rule: str, **kw) -> bool:
        gone = self.cmap.domains[i] & bits
        if not gone:
            return False
        self.cmap.domains[i] &= ~gone
        self.trace.append(Step(rule, i, tuple(masks_of(gone)), **kw))
        return True

    def prunes(self) -> None:
        m = self.sc.m
        for rule in UNARY_AXIOMS:
            if rule not in self.sc.axioms:
                continue
            for i, p in enumerate(self.sc.profiles):
                alts = _excluded_alternatives(rule, p)
                if alts:
                    note = "excluded " + render_set(from_mask(alts), _names(m))
                    self.remove(i, _sets_meeting(alts, m), rule, note=note)
                    if self.cmap.domains[i] == 0:
                        return

    def seeds(self) -> None:
        m = self.sc.m
        for rule in HYPOTHESIS_SEEDS:
            if rule not in self.sc.axioms:
                continue
            for i, p in enumerate(self.sc.profiles):
                for x in seed_alternatives(rule, p, self.sc.quota):
                    keep = 1 << (1 << x)
                    self.remove(i, ~keep & full_bitset(m), rule, note=f"forces {{{_names(m)[x]}}}")
                    if self.cmap.domains[i] == 0:
                        return

    def revise(self, c: Constraint, s: int, t: int) -> int:
        """Bits of ``s`` without support in ``t``."""
        dom = self.cmap.domains
        if c.rule != "StrategyproofArcs":
            return dom[s] & ~dom[t]
        ps, pt = self.sc.profiles[s], self.sc.profiles[t]
        rows = _allowed_rows(ps.voters[c.voter], pt.voters[c.voter])
        dt = dom[t]
        gone = 0
        for X in masks_of(dom[s]):
            if dt & rows[X] == 0:
                gone |= 1 << X
        return gone

    def fixpoint(self) -> None:
        queue: deque[tuple[int, int]] = deque()
        queued: set[tuple[int, int]] = set()
        for k in range(len(self.cons)):
            for side in (0, 1):
                queue.append((k, side))
                queued.add((k, side))
        dom = self.cmap.domains
        while queue:
            item = queue.popleft()
            queued.discard(item)
            k, side = item
            c = self.cons[k]
            s, t = (c.u, c.v) if side == 0 else (c.v, c.u)
            gone = self.revise(c, s, t)
            if not gone:
                continue
            self.remove(s, gone, c.rule, partner=t, voter=c.voter, support=tuple(masks_of(dom[t])))
            if dom[s] == 0:
                return
            for j in self.incident[s]:
                cj = self.cons[j]
                nxt = (j, 1 if cj.u == s else 0)  # revise the other endpoint against s
                if nxt not in queued:
                    queued.add(nxt)
                    queue.append(nxt)

    def run(self) -> None:
        # raw axioms reach their fixpoint before any hypothesis seed fires,
        # so everything derivable without the extra hypotheses shows up first
        for phase in (self.prunes, self.fixpoint, self.seeds, self.fixpoint):
            if self.cmap.contradiction() is not None:
                return
            phase()


def propagate(cmap: CandidateMap, scenario: Scenario) -> tuple[CandidateMap, list[Step]]:
    """Unary prunes, arc consistency, hypothesis seeds, arc consistency again.

    Stops at the first empty candidate set.
    Deterministic: constraints are discovered and queued in a fixed order.
    """
    prop = _Propagator(scenario, cmap.copy())
    prop.run()
    return prop.cmap, prop.trace


# ---------------------------------------------------------------------------
# audit


@dataclass
class AuditReport:
    steps: int
    removals: int
    unsound: list[tuple[int, str]]
    final: CandidateMap
    first_forced: dict[tuple[int, int], int]  # (profile, mask) -> step index, -1 = initially

    @property
    def sound(self) -> bool:
        return not self.unsound


def _check_step(sc: Scenario, dom: list[int], step: Step) -> str | None:
    """Why ``step`` is not licensed by the literal definitions, or None."""
    i = step.profile
    if not 0 <= i < len(sc.profiles):
        return "profile index out of range"
    if not step.removed:
        return "empty removal"
    current = set(masks_of(dom[i]))
    if not set(step.removed) <= current:
        return "removes candidates that are already gone"
    p = sc.profiles[i]
    m, n = sc.m, sc.n
    if step.rule not in sc.axioms:
        return f"rule {step.rule} is not active"

    if step.rule in UNARY_AXIOMS:
        for X in step.removed:
            xs = from_mask(X)
            if step.rule == "ParetoPrune":
                ok = any(pareto_dominates(p, y, x) for x in xs for y in range(m) if y != x)
            elif step.rule == "WeakParetoPrune":
                ok = any(all(v.strictly_prefers(y, x) for v in p.voters)
                         for x in xs for y in range(m) if y != x)
            else:
                ok = condorcet_loser(p) in xs
            if not ok:
                return f"{render_mask(X, m)} contains no excluded alternative"
        return None

    if step.rule in HYPOTHESIS_SEEDS:
        counts = unique_top_counts(p)
        if step.rule == "CondorcetWinnerSeed":
            w = condorcet_winner(p)
            forced = [] if w is None else [w]
        else:
            need = {
                "NearUnanimitySeed": n - 1,
                "NonImpositionSeed": n,
                "QuotaSeed": sc.quota,
            }.get(step.rule)
            if step.rule == "NearUnanimitySeed" and n < 2:
                forced = []
            elif step.rule == "AbsoluteMajoritySeed":
                forced = [x for x in range(m) if 2 * counts[x] > n]
            else:
                forced = [x for x in range(m) if counts[x] >= need]
        for X in step.removed:
            if not any(X != 1 << x for x in forced):
                return f"{step.rule} does not exclude {render_mask(X, m)}"
        return None

    # binary rules
    t = step.partner
    if t is None or step.support is None:
        return "binary step without partner"
    if set(step.support) != set(masks_of(dom[t])):
        return "support differs from the partner's candidates"
    q = sc.profiles[t]
    if step.rule == "StrategyproofArcs":
        v = step.voter
        if v is None or [k for k in range(n) if p.voters[k] != q.voters[k]] != [v]:
            return "profiles do not differ in exactly the named voter"
        own, other = p.voters[v], q.voters[v]
        for X in step.removed:
            xs = from_mask(X)
            for Y in step.support:
                ys = from_mask(Y)
                if not (kelly_strictly_prefers(own, ys, xs) or kelly_strictly_prefers(other, xs, ys)):
                    return f"{render_mask(X, m)} is compatible with {render_mask(Y, m)}"
        return None
    relation = _LINK_RELATION.get(step.rule)
    if relation is None:
        return f"unknown rule {step.rule}"
    if signature(relation, p) != signature(relation, q):
        return f"{relation} signatures differ"
    if set(step.removed) & set(step.support):
        return "removes a candidate the linked profile still admits"
    return None


def audit(scenario: Scenario, trace: Sequence[Step], watch: Iterable[tuple[int, int]] = ()) -> AuditReport:
    """Replay ``trace`` from :func:`init`, re-deriving each removal.

    ``watch`` lists (profile, mask) pairs; the report records the first step
    after which each profile's candidates were exactly that one set.
    """
    cmap = init(scenario)
    dom = cmap.domains
    watch = list(watch)
    first: dict[tuple[int, int], int] = {}

    def look(k: int) -> None:
        for i, X in watch:
            if (i, X) not in first and dom[i] == 1 << X:
                first[(i, X)] = k

    look(-1)
    unsound = []
    removals = 0
    for k, step in enumerate(trace):
        why = _check_step(scenario, dom, step)
        if why is not None:
            unsound.append((k, why))
        if 0 <= step.profile < len(dom):
            dom[step.profile] &= ~bitset_of(step.removed)
        removals += len(step.removed)
        look(k)
    return AuditReport(len(trace), removals, unsound, cmap, first)


# ---------------------------------------------------------------------------
# verification against the scenario's expectation


@dataclass
class Verification:
    scenario: Scenario
    matched: bool
    state: str  # contradiction | consistent | unsatisfiable | satisfiable | budget-exceeded
    final: CandidateMap | None = None
    trace: list[Step] = field(default_factory=list)
    audit: AuditReport | None = None
    solve: SolveResult | None = None
    problems: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def to_record(self, with_trace: bool = False, tail: int = 10, timing: bool = True) -> dict:
        sc = self.scenario
        rec: dict = {
            "kind": "verify",
            "scenario": sc.name,
            "m": sc.m,
            "n": sc.n,
            "profiles": len(sc.profiles),
            "expect": sc.expect.kind if sc.expect else None,
            "state": self.state,
            "matched": self.matched,
        }
        if self.final is not None:
            c = self.final.contradiction()
            if c is not None:
                rec["empty_profile"] = sc.label(c)
        if self.audit is not None:
            rec["audit"] = {
                "steps": self.audit.steps,
                "removals": self.audit.removals,
                "unsound": len(self.audit.unsound),
                "replay_matches": self.final is not None and self.audit.final.domains == self.final.domains,
            }
        if self.solve is not None:
            rec["solve"] = self.solve.to_record(timing=timing)
        if self.problems:
            rec["problems"] = self.problems
            if self.final is not None:
                rec["candidates"] = self.final.to_record(sc)
        if with_trace:
            rec["trace"] = trace_records(self.trace, sc)
        elif self.problems and self.trace:
            rec["trace_tail"] = trace_records(self.trace, sc)[-tail:]
        if timing:
            rec["elapsed_ms"] = round(self.elapsed * 1000, 3)
        return rec


def verify(scenario: Scenario, budget: Budget | None = None) -> Verification:
    """Run the scenario and compare the terminal state with its expectation."""
    t0 = time.perf_counter()
    expect = scenario.expect
    if expect is not None and expect.kind in ("unsatisfiable", "satisfiable"):
        res = solve(scenario, budget)
        ok = res.status == expect.kind
        problems = [] if ok else [f"solver returned {res.status}, expected {expect.kind}"]
        return Verification(scenario, ok, res.status, solve=res, problems=problems,
                            elapsed=time.perf_counter() - t0)

    start = init(scenario)
    final, trace = propagate(start, scenario)
    forced = expect.forced if expect else ()
    rep = audit(scenario, trace, forced)
    problems = [f"step {k}: {why}" for k, why in rep.unsound]
    if rep.final.domains != final.domains:
        problems.append("replaying the trace does not reproduce the final map")
    empty = final.contradiction()
    state = "contradiction" if empty is not None else "consistent"
    if start.conflict is not None and (expect is None or expect.kind != "contradiction"):
        problems.append(f"seed conflict at init: {start.conflict}")
    if expect is not None:
        if expect.kind == "contradiction" and empty is None:
            problems.append("no contradiction reached")
        if expect.kind == "forced" and empty is not None:
            problems.append(f"unexpected contradiction at {scenario.label(empty)}")
        for i, X in forced:
            if (i, X) not in rep.first_forced:
                problems.append(
                    f"{scenario.label(i)} never forced to {render_mask(X, scenario.m)}; "
                    f"final candidates {final.render(i)}"
                )
    return Verification(scenario, not problems, state, final, trace, rep, problems=problems,
                        elapsed=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# backtracking search


@dataclass(frozen=True)
class Budget:
    nodes: int | None = None
    seconds: float | None = None


class BudgetExceeded(Exception):
    pass


@dataclass
class SolveResult:
    status: str  # satisfiable | unsatisfiable | budget-exceeded
    assignment: dict[int, int] | None
    nodes: int
    variables: int
    arcs: int
    elapsed: float

    def to_record(self, scenario: Scenario | None = None, timing: bool = True) -> dict:
        rec = {"status": self.status, "nodes": self.nodes, "variables": self.variables, "arcs": self.arcs}
        if self.assignment is not None and scenario is not None and len(self.assignment) <= 64:
            rec["assignment"] = {
                scenario.label(i): render_mask(X, scenario.m) for i, X in sorted(self.assignment.items())
            }
        if timing:
            rec["elapsed_ms"] = round(self.elapsed * 1000, 3)
        return rec


def _union_find(size: int):
    parent = list(range(size))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    return find, union


def solve(scenario: Scenario, budget: Budget | None = None, collapse: bool = True) -> SolveResult:
    """Search for one choice set per profile satisfying every active axiom.

    With ``collapse`` the profiles of each equality class become a single
    variable, which is sound because the linking axiom forces equal outcomes.
    Branching picks the variable with the fewest candidates and tries
    singletons first, then larger sets by mask.
    """
    t0 = time.perf_counter()
    budget = budget or Budget()
    sc = scenario
    P, m = len(sc.profiles), sc.m
    find, union = _union_find(P)
    groups = _link_groups(sc)
    if collapse:
        for g in groups:
            for i in g[1:]:
                union(g[0], i)
    cls = [find(i) for i in range(P)]
    reps = sorted(set(cls))
    var_of = {r: k for k, r in enumerate(reps)}
    V = len(reps)

    dom = [full_bitset(m)] * V
    base = init(sc)
    for rule in UNARY_AXIOMS:
        if rule in sc.axioms:
            for i, p in enumerate(sc.profiles):
                base.domains[i] &= ~_sets_meeting(_excluded_alternatives(rule, p), m)
    for rule in HYPOTHESIS_SEEDS:
        if rule in sc.axioms:
            for i, p in enumerate(sc.profiles):
                for x in seed_alternatives(rule, p, sc.quota):
                    base.domains[i] &= 1 << (1 << x)
    for i in range(P):
        dom[var_of[cls[i]]] &= base.domains[i]

    # lifted constraints: (a, b, rows_ab, rows_ba) or equality (rows None)
    cons: list[tuple[int, int, tuple | None, tuple | None]] = []
    seen = set()
    for u, v, i in _sp_arcs(sc):
        a, b = var_of[cls[u]], var_of[cls[v]]
        if a == b:
            continue  # same outcome on both ends never lets the voter gain
        ou, ov = sc.profiles[u].voters[i], sc.profiles[v].voters[i]
        if a > b:
            a, b, ou, ov = b, a, ov, ou
        key = (a, b, ou, ov)
        if key in seen:
            continue
        seen.add(key)
        cons.append((a, b, _allowed_rows(ou, ov), _allowed_rows(ov, ou)))
    if not collapse:
        for g in groups:
            for k in range(1, len(g)):
                a, b = var_of[cls[g[0]]], var_of[cls[g[k]]]
                if a != b:
                    cons.append((min(a, b), max(a, b), None, None))
    incident: list[list[int]] = [[] for _ in range(V)]
    for k, (a, b, _, _) in enumerate(cons):
        incident[a].append(k)
        incident[b].append(k)

    def revise(d: list[int], s: int, t: int, rows) -> int:
        if rows is None:
            return d[s] & ~d[t]
        dt, gone = d[t], 0
        for X in masks_of(d[s]):
            if dt & rows[X] == 0:
                gone |= 1 << X
        return gone

    def ac3(d: list[int], start: Iterable[int]) -> bool:
        queue = deque()
        queued = set()
        for k in start:
            for side in (0, 1):
                queue.append((k, side))
                queued.add((k, side))
        while queue:
            item = queue.popleft()
            queued.discard(item)
            k, side = item
            a, b, rab, rba = cons[k]
            s, t, rows = (a, b, rab) if side == 0 else (b, a, rba)
            gone = revise(d, s, t, rows)
            if not gone:
                continue
            d[s] &= ~gone
            if d[s] == 0:
                return False
            for j in incident[s]:
                nxt = (j, 1 if cons[j][0] == s else 0)
                if nxt not in queued:
                    queued.add(nxt)
                    queue.append(nxt)
        return True

    nodes = 0

    def charge() -> None:
        nonlocal nodes
        nodes += 1
        if budget.nodes is not None and nodes > budget.nodes:
            raise BudgetExceeded
        if budget.seconds is not None and nodes % 64 == 0 and time.perf_counter() - t0 > budget.seconds:
            raise BudgetExceeded

    def order_values(bits: int) -> list[int]:
        return sorted(masks_of(bits), key=lambda X: (bin(X).count("1"), X))

    def search(d: list[int]) -> list[int] | None:
        best, best_count = -1, None
        for k in range(V):
            c = bin(d[k]).count("1")
            if c > 1 and (best_count is None or c < best_count):
                best, best_count = k, c
                if c == 2:
                    break
        if best < 0:
            return d
        for X in order_values(d[best]):
            charge()
            nd = list(d)
            nd[best] = 1 << X
            if ac3(nd, incident[best]):
                found = search(nd)
                if found is not None:
                    return found
        return None

    status, assignment = "unsatisfiable", None
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, V + 1000))
    try:
        if all(dom) and ac3(dom, range(len(cons))):
            found = search(dom)
            if found is not None:
                status = "satisfiable"
                assignment = {i: masks_of(found[var_of[cls[i]]])[0] for i in range(P)}
    except BudgetExceeded:
        status = "budget-exceeded"
    finally:
        sys.setrecursionlimit(limit)
    return SolveResult(status, assignment, nodes, V, len(cons), time.perf_counter() - t0)


def check_assignment(scenario: Scenario, assignment: dict[int, int]) -> list[str]:
    """Literal re-check of a solver assignment against the active axioms."""
    sc, m = scenario, scenario.m
    bad = []
    for i, p in enumerate(sc.profiles):
        X = assignment[i]
        xs = from_mask(X)
        for rule in UNARY_AXIOMS:
            if rule in sc.axioms and X & _excluded_alternatives(rule, p):
                bad.append(f"{sc.label(i)}: {rule} violated by {render_mask(X, m)}")
        for rule in HYPOTHESIS_SEEDS:
            if rule in sc.axioms:
                for x in seed_alternatives(rule, p, sc.quota):
                    if X != 1 << x:
                        bad.append(f"{sc.label(i)}: {rule} violated")
    for s in sc.seeds:
        if assignment[s.index] not in s.allowed:
            bad.append(f"{sc.label(s.index)}: seed violated")
    for u, v, i in _sp_arcs(sc):
        pu, pv = sc.profiles[u], sc.profiles[v]
        Xu, Xv = from_mask(assignment[u]), from_mask(assignment[v])
        if kelly_strictly_prefers(pu.voters[i], Xv, Xu) or kelly_strictly_prefers(pv.voters[i], Xu, Xv):
            bad.append(f"{sc.label(u)} / {sc.label(v)}: voter {i + 1} manipulates")
    for g in _link_groups(sc):
        if len({assignment[i] for i in g}) > 1:
            bad.append(f"linked profiles {[sc.label(i) for i in g]} differ")
    return bad
