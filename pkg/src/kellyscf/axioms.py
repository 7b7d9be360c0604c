"""Exhaustive axiom checkers over finite domains.

Every checker evaluates a rule on each profile of a :class:`DomainSpec` and
returns a :class:`CheckResult`.  A failing result always carries a witness
object whose :meth:`revalidate` method re-derives the violation from the
witness alone with the scalar definitions, without touching the domain.

Scans are vectorized: the rule is evaluated once per profile into an
outcome table of bitmasks (indexed by ProfileId), and the axioms are then
checked with array operations on that table.  When several profiles violate
an axiom, the witness is the one with the smallest ProfileId.
"""

from __future__ import annotations

import enum
import time
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .enumeration import DomainSpec
from .prefcore import (
    DomainError,
    Profile,
    alt_name,
    condorcet_loser,
    condorcet_winner,
    kelly_strictly_prefers,
    majority_relation,
    margin_matrix,
    pareto_dominates,
    rank_matrix,
    render_set,
    support_matrix,
)
from .rules import REGISTRY, RuleDescriptor

CHUNK = 1 << 16


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"


# ---------------------------------------------------------------------------
# witnesses


def _set(xs) -> str:
    return render_set(sorted(xs))


@dataclass(frozen=True)
class ManipulationWitness:
    """Voter ``voter`` gains by reporting ``deviation`` instead of the truth."""

    profile: Profile
    voter: int
    deviation: Profile
    outcome: frozenset[int]
    deviated_outcome: frozenset[int]

    def revalidate(self, rule: Callable[[Profile], frozenset[int]]) -> bool:
        truth = self.profile.voters[self.voter]
        others_same = all(
            a == b
            for i, (a, b) in enumerate(zip(self.profile.voters, self.deviation.voters))
            if i != self.voter
        )
        return (
            others_same
            and self.profile != self.deviation
            and rule(self.profile) == self.outcome
            and rule(self.deviation) == self.deviated_outcome
            and kelly_strictly_prefers(truth, self.deviated_outcome, self.outcome)
        )

    def to_record(self) -> dict:
        return {
            "profile": self.profile.render(),
            "voter": self.voter,
            "deviation": self.deviation.render(),
            "outcome": _set(self.outcome),
            "deviated_outcome": _set(self.deviated_outcome),
        }


_SIGNATURES: dict[str, Callable[[Profile], object]] = {
    "rank": rank_matrix,
    "support": support_matrix,
    "margin": margin_matrix,
    "majority": majority_relation,
}


@dataclass(frozen=True)
class PairWitness:
    """Two profiles that an invariance axiom identifies but the rule separates.

    ``relation`` names the invariant (``rank``, ``support``, ``margin``,
    ``majority``) or is ``anonymity`` with ``swap`` the exchanged voters.
    """

    relation: str
    first: Profile
    second: Profile
    first_outcome: frozenset[int]
    second_outcome: frozenset[int]
    swap: tuple[int, int] | None = None

    def related(self) -> bool:
        if self.relation == "anonymity":
            i, j = self.swap
            perm = list(range(self.first.n))
            perm[i], perm[j] = j, i
            return Profile(tuple(self.first.voters[p] for p in perm)) == self.second
        sig = _SIGNATURES[self.relation]
        return sig(self.first) == sig(self.second)

    def revalidate(self, rule) -> bool:
        return (
            self.related()
            and rule(self.first) == self.first_outcome
            and rule(self.second) == self.second_outcome
            and self.first_outcome != self.second_outcome
        )

    def to_record(self) -> dict:
        rec = {
            "relation": self.relation,
            "first": self.first.render(),
            "second": self.second.render(),
            "first_outcome": _set(self.first_outcome),
            "second_outcome": _set(self.second_outcome),
        }
        if self.swap is not None:
            rec["swap"] = list(self.swap)
        return rec


@dataclass(frozen=True)
class ProfileWitness:
    """A single profile on which a pointwise axiom fails.

    ``kind`` is one of ``pareto`` (``x`` chosen although ``y`` dominates it),
    ``condorcet-winner`` (``x`` is the winner, not returned alone),
    ``condorcet-loser`` (``x`` is the loser and returned) or
    ``near-unanimity`` (``x`` is uniquely top for n-1 voters).
    """

    kind: str
    profile: Profile
    outcome: frozenset[int]
    x: int
    y: int | None = None

    def revalidate(self, rule) -> bool:
        p, x = self.profile, self.x
        if rule(p) != self.outcome:
            return False
        if self.kind == "pareto":
            return x in self.outcome and pareto_dominates(p, self.y, x)
        if self.kind == "condorcet-winner":
            return condorcet_winner(p) == x and self.outcome != {x}
        if self.kind == "condorcet-loser":
            return condorcet_loser(p) == x and x in self.outcome
        if self.kind == "near-unanimity":
            tops = sum(v.unique_top() == x for v in p.voters)
            return tops >= p.n - 1 and self.outcome != {x}
        raise ValueError(f"unknown witness kind {self.kind!r}")

    def to_record(self) -> dict:
        rec = {"kind": self.kind, "profile": self.profile.render(),
               "outcome": _set(self.outcome), "x": alt_name(self.x)}
        if self.y is not None:
            rec["y"] = alt_name(self.y)
        return rec


@dataclass(frozen=True)
class ImpositionWitness:
    """``alternative`` is never the unique outcome; certified by the full scan."""

    alternative: int
    spec: DomainSpec

    def revalidate(self, rule) -> bool:
        # a negative existential has no single-profile certificate, so the
        # re-check is an independent scalar rescan of the domain
        from .enumeration import all_profiles

        return all(rule(p) != {self.alternative} for p in all_profiles(self.spec))

    def to_record(self) -> dict:
        return {"alternative": alt_name(self.alternative)}


@dataclass
class CheckResult:
    axiom: str
    rule: str
    spec: DomainSpec
    verdict: Verdict
    witness: object | None = None
    profiles_scanned: int = 0
    elapsed: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_record(self, timing: bool = True) -> dict:
        rec = {
            "kind": "check",
            "axiom": self.axiom,
            "rule": self.rule,
            "domain": self.spec.describe(),
            "verdict": self.verdict.value,
            "witness": self.witness.to_record() if self.witness is not None else None,
            "profiles_scanned": self.profiles_scanned,
            **self.detail,
        }
        if timing:
            rec["elapsed_ms"] = round(self.elapsed * 1000, 3)
        return rec


# ---------------------------------------------------------------------------
# outcome tables


def _chunks(total: int, size: int = CHUNK) -> Iterable[tuple[int, int]]:
    for start in range(0, total, size):
        yield start, min(total, start + size)


def level_block(spec: DomainSpec, start: int, stop: int) -> np.ndarray:
    return spec.level_table[spec.id_block(start, stop)]


def _outcome_chunk(args) -> np.ndarray:
    name, spec, start, stop = args
    return REGISTRY[name].batch_masks(level_block(spec, start, stop))


_OUTCOME_CACHE: "OrderedDict[tuple, np.ndarray]" = OrderedDict()


def outcome_table(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> np.ndarray:
    """``(N,)`` array with the bitmask of ``rule`` on every ProfileId."""
    rule.check_domain(spec.m, spec.n, spec.strict_only)
    spec.check_capacity()
    key = (rule, spec)
    if key in _OUTCOME_CACHE:
        _OUTCOME_CACHE.move_to_end(key)
        return _OUTCOME_CACHE[key]
    total = spec.profile_count
    parts: list[np.ndarray]
    if jobs > 1 and REGISTRY.get(rule.name) is rule and total > CHUNK:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_outcome_chunk, [(rule.name, spec, a, b) for a, b in _chunks(total)]))
    else:
        parts = [rule.batch_masks(level_block(spec, a, b)) for a, b in _chunks(total)]
    outs = np.concatenate(parts)
    _OUTCOME_CACHE[key] = outs
    while len(_OUTCOME_CACHE) > 4:
        _OUTCOME_CACHE.popitem(last=False)
    return outs


def _from_mask(mask) -> frozenset[int]:
    mask = int(mask)
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def _timed(axiom, rule, spec):
    t0 = time.perf_counter()

    def finish(verdict, witness=None, scanned=None, **detail):
        return CheckResult(
            axiom=axiom,
            rule=rule.name,
            spec=spec,
            verdict=verdict,
            witness=witness,
            profiles_scanned=spec.profile_count if scanned is None else scanned,
            elapsed=time.perf_counter() - t0,
            detail=detail,
        )

    return finish


# ---------------------------------------------------------------------------
# strategyproofness


def _kelly_flat(spec: DomainSpec) -> tuple[np.ndarray, int]:
    table = kernels.kelly_table(spec.level_table.astype(np.int16))
    return table.reshape(-1), table.shape[1]


def check_strategyproof(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1,
                        symmetric: bool = False) -> CheckResult:
    """Search for a voter who obtains a Kelly-preferred set by misreporting.

    With ``symmetric=True`` only voter-sorted truthful profiles are examined;
    this is sound only for anonymous rules and exists to cross-check the full
    scan.
    """
    finish = _timed("strategyproof", rule, spec)
    outs = outcome_table(rule, spec, jobs)
    if symmetric:
        return _strategyproof_symmetric(rule, spec, outs, finish)
    K, n = spec.order_count, spec.n
    flat, F = _kelly_flat(spec)
    grid = outs.astype(np.int64).reshape((K,) * n)
    o_idx = np.arange(K, dtype=np.int64)
    best: tuple[int, int, int] | None = None  # (pid, voter, deviation order)
    for voter in range(n):
        moved = np.moveaxis(grid, voter, -1).reshape(-1, K)  # (contexts, K)
        step = max(1, (1 << 22) // (K * K))
        for c0 in range(0, moved.shape[0], step):
            block = moved[c0:c0 + step]
            truth = block[:, :, None]  # (c, o, 1)
            dev = block[:, None, :]  # (c, 1, d)
            gain = flat[(o_idx[None, :, None] * F + dev) * F + truth]
            hits = np.nonzero(gain.any(axis=2))
            if hits[0].size == 0:
                continue
            ctx = hits[0] + c0
            o = hits[1]
            # reassemble ProfileIds: context digits with o inserted at voter
            digits = np.empty((ctx.size, n), dtype=np.int64)
            rest = ctx.copy()
            others = [i for i in range(n) if i != voter]
            for i in reversed(others):
                rest, digits[:, i] = np.divmod(rest, K)
            digits[:, voter] = o
            pids = spec.ids_of(digits)
            j = int(np.argmin(pids))
            d = int(np.argmax(gain[hits[0][j], hits[1][j]]))
            cand = (int(pids[j]), voter, d)
            if best is None or cand < best:
                best = cand
    if best is None:
        return finish(Verdict.PASS)
    return finish(Verdict.FAIL, _manipulation(rule, spec, outs, *best))


def _manipulation(rule, spec, outs, pid, voter, d) -> ManipulationWitness:
    prof = spec.decode(pid)
    dev = prof.replace(voter, spec.orders[d])
    return ManipulationWitness(
        profile=prof,
        voter=voter,
        deviation=dev,
        outcome=_from_mask(outs[pid]),
        deviated_outcome=_from_mask(outs[spec.encode(dev)]),
    )


def _strategyproof_symmetric(rule, spec, outs, finish) -> CheckResult:
    import itertools

    K, n = spec.order_count, spec.n
    flat, F = _kelly_flat(spec)
    reps = np.array(list(itertools.combinations_with_replacement(range(K), n)), dtype=np.int64)
    pids = spec.ids_of(reps)
    truth_out = outs[pids].astype(np.int64)
    best = None
    for voter in range(n):
        devs = np.repeat(reps[:, None, :], K, axis=1)  # (R, K, n)
        devs[:, :, voter] = np.arange(K)
        dev_out = outs[spec.ids_of(devs.reshape(-1, n)).reshape(len(reps), K)].astype(np.int64)
        gain = flat[(reps[:, voter, None] * F + dev_out) * F + truth_out[:, None]]
        rows, cols = np.nonzero(gain)
        if rows.size:
            cand = (int(pids[rows[0]]), voter, int(cols[0]))
            best = cand if best is None or cand < best else best
    scanned = len(reps)
    if best is None:
        return finish(Verdict.PASS, scanned=scanned, symmetric=True)
    return finish(Verdict.FAIL, _manipulation(rule, spec, outs, *best), scanned=scanned, symmetric=True)


# ---------------------------------------------------------------------------
# pointwise axioms


def _first_violation(rule, spec, jobs, test) -> tuple[int, np.ndarray, np.ndarray] | None:
    """Smallest ProfileId where ``test(levels, masks)`` flags a violation."""
    outs = outcome_table(rule, spec, jobs)
    for a, b in _chunks(spec.profile_count):
        lv = level_block(spec, a, b)
        bad = test(lv, outs[a:b])
        idx = np.flatnonzero(bad)
        if idx.size:
            i = int(idx[0])
            return a + i, lv[i:i + 1], outs[a + i]
    return None


def check_pareto_optimal(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> CheckResult:
    finish = _timed("pareto-optimal", rule, spec)
    m = spec.m

    def test(lv, masks):
        dominated = kernels.bits_to_mask(kernels.pareto_dominated(lv))
        return (masks & dominated) != 0

    hit = _first_violation(rule, spec, jobs, test)
    if hit is None:
        return finish(Verdict.PASS)
    pid, lv, mask = hit
    chosen = _from_mask(mask)
    dom = kernels.pareto_dominance(lv)[0]
    x = next(x for x in range(m) if x in chosen and dom[:, x].any())
    y = int(np.flatnonzero(dom[:, x])[0])
    return finish(Verdict.FAIL, ProfileWitness("pareto", spec.decode(pid), chosen, x, y))


def check_condorcet_consistent(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> CheckResult:
    finish = _timed("condorcet-consistent", rule, spec)

    def test(lv, masks):
        w = kernels.condorcet_winner(lv)
        return (w >= 0) & (masks.astype(np.int64) != (1 << np.maximum(w, 0)))

    hit = _first_violation(rule, spec, jobs, test)
    if hit is None:
        return finish(Verdict.PASS)
    pid, lv, mask = hit
    w = int(kernels.condorcet_winner(lv)[0])
    return finish(Verdict.FAIL, ProfileWitness("condorcet-winner", spec.decode(pid), _from_mask(mask), w))


def check_condorcet_loser_property(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> CheckResult:
    finish = _timed("condorcet-loser", rule, spec)

    def test(lv, masks):
        loser = kernels.condorcet_loser(lv)
        return (loser >= 0) & ((masks.astype(np.int64) >> np.maximum(loser, 0)) & 1 == 1)

    hit = _first_violation(rule, spec, jobs, test)
    if hit is None:
        return finish(Verdict.PASS)
    pid, lv, mask = hit
    x = int(kernels.condorcet_loser(lv)[0])
    return finish(Verdict.FAIL, ProfileWitness("condorcet-loser", spec.decode(pid), _from_mask(mask), x))


def check_non_imposing(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> CheckResult:
    finish = _timed("non-imposing", rule, spec)
    outs = outcome_table(rule, spec, jobs)
    singletons = {int(v) for v in np.unique(outs)}
    for x in range(spec.m):
        if (1 << x) not in singletons:
            return finish(Verdict.FAIL, ImpositionWitness(x, spec))
    return finish(Verdict.PASS)


def check_near_unanimity(rule: RuleDescriptor, spec: DomainSpec,
                         alternatives: Sequence[int] | None = None) -> CheckResult:
    """Scan only profiles where n-1 voters uniquely top-rank some ``x``.

    ``alternatives`` restricts the near-unanimous alternative (all by default).
    """
    finish = _timed("near-unanimity", rule, spec)
    if spec.n < 2:
        raise DomainError("near-unanimity needs n >= 2")
    rule.check_domain(spec.m, spec.n, spec.strict_only)
    K, n = spec.order_count, spec.n
    tops = np.array([o.unique_top() if o.unique_top() is not None else -1 for o in spec.orders])
    xs = range(spec.m) if alternatives is None else alternatives
    pid_parts = []
    for x in xs:
        mine = np.flatnonzero(tops == x)
        if mine.size == 0:
            continue
        for dissenter in range(n):
            axes = [np.arange(K) if i == dissenter else mine for i in range(n)]
            digits = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
            pid_parts.append(spec.ids_of(digits))
    if not pid_parts:
        return finish(Verdict.PASS, scanned=0)
    pids = np.unique(np.concatenate(pid_parts))
    best = None
    for a in range(0, pids.size, CHUNK):
        ids = pids[a:a + CHUNK]
        dg = np.empty((ids.size, n), dtype=np.int64)
        rest = ids.copy()
        for i in range(n - 1, -1, -1):
            rest, dg[:, i] = np.divmod(rest, K)
        lv = spec.level_table[dg]
        masks = rule.batch_masks(lv).astype(np.int64)
        utop = (lv == 0).sum(axis=2) == 1  # voter has a unique top
        counts = ((lv == 0) & utop[:, :, None]).sum(axis=1)  # (P, m)
        qualifies = counts >= n - 1
        if alternatives is not None:
            qualifies &= np.isin(np.arange(spec.m), list(alternatives))[None, :]
        bad = qualifies & (masks[:, None] != (1 << np.arange(spec.m))[None, :])
        rows, cols = np.nonzero(bad)
        if rows.size:
            best = (int(ids[rows[0]]), int(cols[0]), int(masks[rows[0]]))
            break
    if best is None:
        return finish(Verdict.PASS, scanned=int(pids.size))
    pid, x, mask = best
    witness = ProfileWitness("near-unanimity", spec.decode(pid), _from_mask(mask), x)
    return finish(Verdict.FAIL, witness, scanned=int(pids.size))


def nominators(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> set[int]:
    """Voters whose top class always meets the outcome (elimination scan)."""
    outs = outcome_table(rule, spec, jobs)
    alive = set(range(spec.n))
    for a, b in _chunks(spec.profile_count):
        lv = level_block(spec, a, b)
        masks = outs[a:b].astype(np.int64)
        for i in sorted(alive):
            top = kernels.bits_to_mask(lv[:, i, :] == 0).astype(np.int64)
            if ((masks & top) == 0).any():
                alive.discard(i)
        if not alive:
            break
    return alive


# ---------------------------------------------------------------------------
# invariance axioms


def _signature_rank(lv):
    return kernels.rank_signature(lv)


def _signature_support(lv):
    return kernels.supports(lv).reshape(lv.shape[0], -1)


def _signature_margin(lv):
    return kernels.margins(lv).reshape(lv.shape[0], -1)


def _signature_majority(lv):
    return kernels.majority(lv).reshape(lv.shape[0], -1)


SIGNATURE_KERNELS = {
    "rank": _signature_rank,
    "support": _signature_support,
    "margin": _signature_margin,
    "majority": _signature_majority,
}


def _void_rows(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    return a.view(np.dtype((np.void, a.dtype.itemsize * a.shape[1]))).ravel()


def _check_invariance(axiom, relation, rule, spec, jobs) -> CheckResult:
    finish = _timed(axiom, rule, spec)
    outs = outcome_table(rule, spec, jobs)
    sig_of = SIGNATURE_KERNELS[relation]
    seen: dict[bytes, tuple[int, int]] = {}  # signature -> (first pid, its mask)
    for a, b in _chunks(spec.profile_count):
        keys = _void_rows(sig_of(level_block(spec, a, b)))
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        rep_pid = first.astype(np.int64) + a
        rep_out = outs[a:b][first].astype(np.int64)
        for g, key in enumerate(uniq):
            k = key.tobytes()
            if k in seen:
                rep_pid[g], rep_out[g] = seen[k]
            else:
                seen[k] = (int(rep_pid[g]), int(rep_out[g]))
        clash = np.flatnonzero(outs[a:b].astype(np.int64) != rep_out[inverse.ravel()])
        if clash.size:
            j = int(clash[0])
            p1 = int(rep_pid[inverse.ravel()[j]])
            p2 = a + j
            witness = PairWitness(relation, spec.decode(p1), spec.decode(p2),
                                  _from_mask(outs[p1]), _from_mask(outs[p2]))
            return finish(Verdict.FAIL, witness, scanned=p2 + 1, groups=len(seen))
    return finish(Verdict.PASS, groups=len(seen))


def check_rank_based(rule, spec, jobs: int = 1) -> CheckResult:
    return _check_invariance("rank-based", "rank", rule, spec, jobs)


def check_support_based(rule, spec, jobs: int = 1) -> CheckResult:
    return _check_invariance("support-based", "support", rule, spec, jobs)


def check_pairwise(rule, spec, jobs: int = 1) -> CheckResult:
    return _check_invariance("pairwise", "margin", rule, spec, jobs)


def check_majority_based(rule, spec, jobs: int = 1) -> CheckResult:
    return _check_invariance("majority-based", "majority", rule, spec, jobs)


def check_anonymous(rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> CheckResult:
    """Compare outputs across every adjacent voter transposition."""
    finish = _timed("anonymous", rule, spec)
    outs = outcome_table(rule, spec, jobs)
    K, n = spec.order_count, spec.n
    grid = outs.reshape((K,) * n)
    best = None
    for i in range(n - 1):
        diff = np.flatnonzero((grid != np.swapaxes(grid, i, i + 1)).ravel())
        if diff.size and (best is None or int(diff[0]) < best[0]):
            best = (int(diff[0]), i)
    if best is None:
        return finish(Verdict.PASS)
    pid, i = best
    first = spec.decode(pid)
    perm = list(range(n))
    perm[i], perm[i + 1] = i + 1, i
    second = Profile(tuple(first.voters[p] for p in perm))
    witness = PairWitness("anonymity", first, second, _from_mask(outs[pid]),
                          _from_mask(outs[spec.encode(second)]), swap=(i, i + 1))
    return finish(Verdict.FAIL, witness)


CHECKERS: dict[str, Callable[..., CheckResult]] = {
    "strategyproof": check_strategyproof,
    "pareto-optimal": check_pareto_optimal,
    "anonymous": check_anonymous,
    "rank-based": check_rank_based,
    "support-based": check_support_based,
    "pairwise": check_pairwise,
    "majority-based": check_majority_based,
    "non-imposing": check_non_imposing,
    "condorcet-consistent": check_condorcet_consistent,
    "condorcet-loser": check_condorcet_loser_property,
    "near-unanimity": lambda rule, spec, jobs=1: check_near_unanimity(rule, spec),
}


def run_check(axiom: str, rule: RuleDescriptor, spec: DomainSpec, jobs: int = 1) -> CheckResult:
    try:
        checker = CHECKERS[axiom]
    except KeyError:
        import difflib

        close = difflib.get_close_matches(axiom, CHECKERS, n=3)
        hint = f"; did you mean {', '.join(close)}?" if close else ""
        raise KeyError(f"unknown axiom {axiom!r}{hint}") from None
    return checker(rule, spec, jobs=jobs)
