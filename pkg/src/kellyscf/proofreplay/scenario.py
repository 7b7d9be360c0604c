"""Scenarios: the finite profile sets a proof talks about, and their text form.

A scenario names its profiles with labels (one profile may carry several
labels when a proof reaches the same profile twice) and lists the active
axioms together with optional seeds (hypothetical choice-set restrictions).
It also records the terminal state the derivation is expected to reach.

Text format::

    scenario: lemma1-example
    m: 4
    n: 3
    axioms: ParetoPrune StrategyproofArcs
    seed: R0 = {a,d}          # exactly this set
    seed: R5 <= {a,b}         # some non-empty subset
    expect: forced            # contradiction | forced | unsatisfiable | satisfiable
    forced: R4 = {a}
    note: free text, kept as the description

    profile R0
    b > a~d > c
    d > a > b~c
    a~c > b~d

``domain: full`` replaces the profile blocks by the entire weak domain
(``domain: strict`` by the strict one); ``quota: q`` parameterizes
``QuotaSeed``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..enumeration import DomainSpec
from ..prefcore import (
    ParseError,
    Profile,
    WeakOrder,
    alt_name,
    parse_order,
    parse_set,
    render_set,
    to_mask,
)

RAW_AXIOMS = (
    "ParetoPrune",
    "WeakParetoPrune",
    "CondorcetLoserPrune",
    "StrategyproofArcs",
    "RankEquality",
    "SupportEquality",
    "PairwiseEquality",
    "MajorityEquality",
    "AnonymityLink",
)

# seeds that are only valid under extra hypotheses, licensed per scenario
HYPOTHESIS_SEEDS = (
    "NearUnanimitySeed",
    "NonImpositionSeed",
    "AbsoluteMajoritySeed",
    "CondorcetWinnerSeed",
    "QuotaSeed",
)

AXIOM_NAMES = RAW_AXIOMS + HYPOTHESIS_SEEDS

UNARY_AXIOMS = ("ParetoPrune", "WeakParetoPrune", "CondorcetLoserPrune")

EQUALITY_AXIOMS = {
    "RankEquality": "rank",
    "SupportEquality": "support",
    "PairwiseEquality": "margin",
    "MajorityEquality": "majority",
}

EXPECT_KINDS = ("contradiction", "forced", "unsatisfiable", "satisfiable")


@dataclass(frozen=True)
class Seed:
    """Restrict profile ``index`` to the choice-set masks ``allowed``."""

    index: int
    allowed: frozenset[int]
    text: str = ""


@dataclass(frozen=True)
class Expectation:
    kind: str
    forced: tuple[tuple[int, int], ...] = ()  # (profile index, mask)


@dataclass
class Scenario:
    name: str
    m: int
    n: int
    profiles: list[Profile]
    labels: list[tuple[str, ...]]
    axioms: frozenset[str]
    seeds: list[Seed] = field(default_factory=list)
    expect: Expectation | None = None
    quota: int | None = None
    domain: str | None = None
    description: str = ""

    def __post_init__(self):
        unknown = set(self.axioms) - set(AXIOM_NAMES)
        if unknown:
            raise ValueError(f"unknown scenario axioms: {sorted(unknown)}")
        for p in self.profiles:
            if p.m != self.m or p.n != self.n:
                raise ValueError(f"profile {p} does not have m={self.m}, n={self.n}")
        if len(self.labels) != len(self.profiles):
            raise ValueError("one label tuple per profile is required")
        full = (1 << self.m) - 1
        for s in self.seeds:
            if not s.allowed or any(not 0 < X <= full for X in s.allowed):
                raise ValueError(f"seed {s.text!r} must allow non-empty subsets of the alternatives")
        if "QuotaSeed" in self.axioms and self.quota is None:
            raise ValueError("QuotaSeed needs a quota")

    @property
    def spec(self) -> DomainSpec:
        return DomainSpec(self.m, self.n, strict_only=self.domain == "strict")

    def index(self, label: str) -> int:
        for i, ls in enumerate(self.labels):
            if label in ls:
                return i
        raise KeyError(f"scenario {self.name!r} has no profile labelled {label!r}")

    def label(self, i: int) -> str:
        return self.labels[i][0]


# ---------------------------------------------------------------------------
# building


class ScenarioBuilder:
    """Collects labelled profiles, merging labels of repeated profiles."""

    def __init__(self, name: str, m: int, n: int):
        self.name, self.m, self.n = name, m, n
        self.profiles: list[Profile] = []
        self.labels: list[list[str]] = []
        self._where: dict[Profile, int] = {}
        self.seeds: list[Seed] = []
        self.description = ""

    def order(self, text: str) -> WeakOrder:
        return parse_order(text, m=self.m)

    def profile(self, *orders: str | WeakOrder) -> Profile:
        if len(orders) != self.n:
            raise ValueError(f"expected {self.n} orders, got {len(orders)}")
        return Profile(tuple(o if isinstance(o, WeakOrder) else self.order(o) for o in orders))

    def add(self, label: str, profile: Profile) -> Profile:
        if any(label in ls for ls in self.labels):
            raise ValueError(f"duplicate label {label!r}")
        i = self._where.get(profile)
        if i is None:
            self._where[profile] = len(self.profiles)
            self.profiles.append(profile)
            self.labels.append([label])
        else:
            self.labels[i].append(label)
        return profile

    def ensure(self, label: str, profile: Profile) -> Profile:
        """Add ``profile`` under ``label`` unless it is already present."""
        if profile not in self._where:
            self.add(label, profile)
        return profile

    def alias(self, profile: Profile, label: str) -> Profile:
        """Give an existing profile one more label."""
        if any(label in ls for ls in self.labels):
            raise ValueError(f"duplicate label {label!r}")
        self.labels[self._where[profile]].append(label)
        return profile

    def walk(self, label: str, start: Profile, voters: Iterable[int], order: str | WeakOrder) -> Profile:
        """Let ``voters`` switch to ``order`` one at a time, labelling each stop.

        Voters are numbered from 1.  Returns the last profile.
        """
        new = order if isinstance(order, WeakOrder) else self.order(order)
        cur = start
        for v in voters:
            if cur.voters[v - 1] == new:
                continue
            cur = self.ensure(f"{label}.v{v}", cur.replace(v - 1, new))
        return cur

    def index(self, label: str) -> int:
        for i, ls in enumerate(self.labels):
            if label in ls:
                return i
        raise KeyError(label)

    def seed(self, label: str, allowed: Iterable[Iterable[int]], text: str = "") -> None:
        self.seeds.append(Seed(self.index(label), frozenset(to_mask(s) for s in allowed), text))

    def build(self, axioms: Iterable[str], expect: Expectation | None, quota: int | None = None) -> Scenario:
        return Scenario(
            name=self.name,
            m=self.m,
            n=self.n,
            profiles=list(self.profiles),
            labels=[tuple(ls) for ls in self.labels],
            axioms=frozenset(axioms),
            seeds=list(self.seeds),
            expect=expect,
            quota=quota,
            description=self.description,
        )


def transform(profile: Profile, voter_perm: Sequence[int], alt_perm: Sequence[int]) -> Profile:
    """Rename alternatives by ``alt_perm`` and put old voter ``voter_perm[i]`` at ``i``."""
    renamed = [v.permuted(alt_perm) for v in profile.voters]
    return Profile(tuple(renamed[voter_perm[i]] for i in range(profile.n)))


def find_symmetry(source: Profile, target: Profile, claim_from: Iterable[int] | None = None,
                  claim_to: Iterable[int] | None = None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Brute-force a (voter, alternative) permutation pair mapping source to target.

    When claims are given, the alternative permutation must also map the set
    ``claim_from`` onto ``claim_to``.
    """
    n, m = source.n, source.m
    for alt_perm in itertools.permutations(range(m)):
        if claim_from is not None and {alt_perm[x] for x in claim_from} != set(claim_to):
            continue
        renamed = [v.permuted(alt_perm) for v in source.voters]
        for voter_perm in itertools.permutations(range(n)):
            if all(renamed[voter_perm[i]] == target.voters[i] for i in range(n)):
                return tuple(voter_perm), tuple(alt_perm)
    raise ValueError(f"no symmetry maps {source} to {target}")


# ---------------------------------------------------------------------------
# text format


def _names(m: int) -> list[str]:
    return [alt_name(x) for x in range(m)]


def render_scenario(sc: Scenario) -> str:
    names = _names(sc.m)
    lines = [f"scenario: {sc.name}", f"m: {sc.m}", f"n: {sc.n}"]
    for note in sc.description.splitlines():
        lines.append(f"note: {note}")
    lines.append("axioms: " + " ".join(a for a in AXIOM_NAMES if a in sc.axioms))
    if sc.quota is not None:
        lines.append(f"quota: {sc.quota}")
    full = (1 << sc.m) - 1
    for s in sc.seeds:
        subsets = frozenset(X for X in range(1, full + 1))
        label = sc.label(s.index)
        if len(s.allowed) == 1:
            (X,) = s.allowed
            lines.append(f"seed: {label} = {render_set(_bits(X), names)}")
        else:
            union = 0
            for X in s.allowed:
                union |= X
            if s.allowed == frozenset(X for X in subsets if X & ~union == 0):
                lines.append(f"seed: {label} <= {render_set(_bits(union), names)}")
            else:
                opts = " | ".join(render_set(_bits(X), names) for X in sorted(s.allowed))
                lines.append(f"seed: {label} in {opts}")
    if sc.expect is not None:
        lines.append(f"expect: {sc.expect.kind}")
        for i, X in sc.expect.forced:
            lines.append(f"forced: {sc.label(i)} = {render_set(_bits(X), names)}")
    if sc.domain is not None:
        lines.append(f"domain: {sc.domain}")
        return "\n".join(lines) + "\n"
    for p, ls in zip(sc.profiles, sc.labels):
        lines.append("")
        lines.append("profile " + " ".join(ls))
        lines.extend(p.render(names))
    return "\n".join(lines) + "\n"


def _bits(X: int) -> list[int]:
    return [x for x in range(X.bit_length()) if X >> x & 1]


def parse_scenario(text: str) -> Scenario:
    header: dict[str, str] = {}
    notes: list[str] = []
    seeds_raw: list[tuple[int, str]] = []
    forced_raw: list[tuple[int, str]] = []
    blocks: list[tuple[int, list[str], list[tuple[int, str]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("profile"):
            labels = line.split()[1:]
            if not labels:
                raise ParseError("profile block needs a label", lineno, 1)
            blocks.append((lineno, labels, []))
            continue
        if blocks:
            blocks[-1][2].append((lineno, line))
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError(f"expected 'key: value', got {line!r}", lineno, 1)
        key, value = key.strip(), value.strip()
        if key == "note":
            notes.append(value)
        elif key == "seed":
            seeds_raw.append((lineno, value))
        elif key == "forced":
            forced_raw.append((lineno, value))
        elif key in ("scenario", "m", "n", "axioms", "expect", "quota", "domain", "alternatives"):
            if key in header:
                raise ParseError(f"duplicate header {key!r}", lineno, 1)
            header[key] = value
        else:
            raise ParseError(f"unknown header {key!r}", lineno, 1)
    for req in ("scenario", "m", "n", "axioms"):
        if req not in header:
            raise ParseError(f"missing header {req!r}")
    try:
        m, n = int(header["m"]), int(header["n"])
    except ValueError as exc:
        raise ParseError(f"m and n must be integers ({exc})") from None
    names = header["alternatives"].split() if "alternatives" in header else _names(m)
    if len(names) != m:
        raise ParseError(f"alternatives header lists {len(names)} names for m={m}")
    axioms = header["axioms"].split()
    bad = [a for a in axioms if a not in AXIOM_NAMES]
    if bad:
        import difflib

        hint = difflib.get_close_matches(bad[0], AXIOM_NAMES, n=1)
        raise ParseError(f"unknown axiom {bad[0]!r}" + (f"; did you mean {hint[0]}?" if hint else ""))

    domain = header.get("domain")
    profiles: list[Profile] = []
    labels: list[tuple[str, ...]] = []
    if domain is not None:
        if domain not in ("full", "strict"):
            raise ParseError(f"domain must be 'full' or 'strict', got {domain!r}")
        if blocks:
            raise ParseError("profile blocks are not allowed with a domain header", blocks[0][0], 1)
        spec = DomainSpec(m, n, strict_only=domain == "strict")
        from ..enumeration import all_profiles

        profiles = list(all_profiles(spec))
        labels = [(f"P{i}",) for i in range(len(profiles))]
    else:
        seen: dict[Profile, int] = {}
        for lineno, ls, rows in blocks:
            if len(rows) != n:
                raise ParseError(f"profile {ls[0]} has {len(rows)} voters, expected {n}", lineno, 1)
            orders = []
            for rl, row in rows:
                try:
                    orders.append(parse_order(row, names))
                except ParseError as exc:
                    raise ParseError(str(exc), rl, 1) from None
            p = Profile(tuple(orders))
            if p in seen:
                raise ParseError(f"profile {ls[0]} repeats an earlier profile; merge the labels", lineno, 1)
            seen[p] = len(profiles)
            profiles.append(p)
            labels.append(tuple(ls))

    def lookup(label: str, lineno: int) -> int:
        for i, ls in enumerate(labels):
            if label in ls:
                return i
        raise ParseError(f"unknown profile label {label!r}", lineno, 1)

    full = (1 << m) - 1
    seeds = []
    for lineno, value in seeds_raw:
        for op in ("<=", "=", " in "):
            if op in value:
                label, rhs = (t.strip() for t in value.split(op, 1))
                break
        else:
            raise ParseError(f"seed needs '=', '<=' or 'in': {value!r}", lineno, 1)
        idx = lookup(label, lineno)
        try:
            if op == "=":
                allowed = frozenset({to_mask(parse_set(rhs, names))})
            elif op == "<=":
                bound = to_mask(parse_set(rhs, names))
                allowed = frozenset(X for X in range(1, full + 1) if X & ~bound == 0)
            else:
                allowed = frozenset(to_mask(parse_set(t, names)) for t in rhs.split("|"))
        except ParseError as exc:
            raise ParseError(str(exc), lineno, 1) from None
        seeds.append(Seed(idx, allowed, value))
    expect = None
    if "expect" in header:
        kind = header["expect"]
        if kind not in EXPECT_KINDS:
            raise ParseError(f"expect must be one of {', '.join(EXPECT_KINDS)}")
        forced = []
        for lineno, value in forced_raw:
            label, _, rhs = value.partition("=")
            forced.append((lookup(label.strip(), lineno), to_mask(parse_set(rhs, names))))
        expect = Expectation(kind, tuple(forced))
    elif forced_raw:
        raise ParseError("forced lines need an expect header", forced_raw[0][0], 1)
    quota = int(header["quota"]) if "quota" in header else None
    try:
        return Scenario(
            name=header["scenario"],
            m=m,
            n=n,
            profiles=profiles,
            labels=labels,
            axioms=frozenset(axioms),
            seeds=seeds,
            expect=expect,
            quota=quota,
            domain=domain,
            description="\n".join(notes),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def full_domain_scenario(name: str, m: int, n: int, axioms: Iterable[str], strict: bool = False,
                         expect: Expectation | None = None, description: str = "") -> Scenario:
    from ..enumeration import all_profiles

    spec = DomainSpec(m, n, strict_only=strict)
    profiles = list(all_profiles(spec))
    return Scenario(
        name=name,
        m=m,
        n=n,
        profiles=profiles,
        labels=[(f"P{i}",) for i in range(len(profiles))],
        axioms=frozenset(axioms),
        expect=expect,
        domain="strict" if strict else "full",
        description=description,
    )
