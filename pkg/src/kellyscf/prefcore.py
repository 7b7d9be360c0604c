"""Weak preferences and the structures derived from profiles of them.

Alternatives are plain integers ``0..m-1``; letters only appear when an
order or a set is rendered as text.  A :class:`WeakOrder` stores one level
per alternative (level 0 is the top indifference class) in canonical form,
so two orders inducing the same relation are equal and hash alike.

Choice sets are ``frozenset[int]``.  Internally the scanning code works with
bitmasks (bit ``x`` set iff alternative ``x`` is chosen); :func:`to_mask` and
:func:`from_mask` convert between the two.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

ChoiceSet = frozenset


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ParseError(ValueError):
    """Text that does not parse as an order or a choice set."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# names


def alt_name(x: int) -> str:
    if x < 26:
        return string.ascii_lowercase[x]
    return f"x{x}"


def alt_index(name: str) -> int:
    if len(name) == 1 and name in string.ascii_lowercase:
        return string.ascii_lowercase.index(name)
    if name.startswith("x") and name[1:].isdigit():
        return int(name[1:])
    raise ParseError(f"unknown alternative name {name!r}")


def to_mask(xs: Iterable[int]) -> int:
    mask = 0
    for x in xs:
        mask |= 1 << x
    return mask


def from_mask(mask: int) -> frozenset[int]:
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return frozenset(out)


def render_set(xs: Iterable[int], names: Sequence[str] | None = None) -> str:
    name = (lambda x: names[x]) if names is not None else alt_name
    return "{" + ",".join(name(x) for x in sorted(xs)) + "}"


def parse_set(text: str, names: Sequence[str] | None = None) -> frozenset[int]:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ParseError(f"expected a set like {{a,b}}, got {text!r}")
    items = [t.strip() for t in body[1:-1].split(",") if t.strip()]
    if not items:
        raise ParseError("choice sets must be non-empty")
    lookup = {nm: i for i, nm in enumerate(names)} if names is not None else None
    out = set()
    for it in items:
        if lookup is not None:
            if it not in lookup:
                raise ParseError(f"unknown alternative {it!r}")
            out.add(lookup[it])
        else:
            out.add(alt_index(it))
    return frozenset(out)


# ---------------------------------------------------------------------------
# weak orders


@dataclass(frozen=True)
class WeakOrder:
    """A complete, transitive, reflexive ranking of ``m`` alternatives.

    ``levels[x]`` is the index of the indifference class containing ``x``;
    smaller levels are better.  Any integer vector is accepted and brought
    into canonical form (levels ``0..L-1``, none empty), so for example
    ``WeakOrder((5, 5, 9))`` equals ``WeakOrder((0, 0, 1))``.
    """

    levels: tuple[int, ...]

    def __post_init__(self):
        levels = tuple(int(v) for v in self.levels)
        if not levels:
            raise DomainError("a weak order needs at least one alternative")
        dense = {v: i for i, v in enumerate(sorted(set(levels)))}
        object.__setattr__(self, "levels", tuple(dense[v] for v in levels))

    @classmethod
    def from_classes(cls, classes: Sequence[Iterable[int]], m: int | None = None) -> "WeakOrder":
        """Build from indifference classes listed best first."""
        classes = [list(c) for c in classes]
        flat = [x for c in classes for x in c]
        m = len(flat) if m is None else m
        if sorted(flat) != list(range(m)):
            raise DomainError(f"classes {classes} do not partition 0..{m - 1}")
        levels = [0] * m
        for lvl, cls_ in enumerate(classes):
            for x in cls_:
                levels[x] = lvl
        return cls(tuple(levels))

    @classmethod
    def from_relation(cls, geq: Sequence[Sequence[bool]]) -> "WeakOrder":
        """Build from a complete, transitive relation matrix ``geq[x][y]``."""
        m = len(geq)
        above = [sum(1 for y in range(m) if geq[y][x] and not geq[x][y]) for x in range(m)]
        order = cls(tuple(above))
        if order.relation() != [list(map(bool, row)) for row in geq]:
            raise DomainError("relation is not a complete preorder")
        return order

    @property
    def m(self) -> int:
        return len(self.levels)

    def _check(self, x: int) -> None:
        if not 0 <= x < self.m:
            raise DomainError(f"alternative {x} outside 0..{self.m - 1}")

    def weakly_prefers(self, x: int, y: int) -> bool:
        return self.levels[x] <= self.levels[y]

    def strictly_prefers(self, x: int, y: int) -> bool:
        return self.levels[x] < self.levels[y]

    def indifferent(self, x: int, y: int) -> bool:
        return self.levels[x] == self.levels[y]

    def relation(self) -> list[list[bool]]:
        lv = self.levels
        return [[lv[x] <= lv[y] for y in range(self.m)] for x in range(self.m)]

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(max(self.levels) + 1)]
        for x, lvl in enumerate(self.levels):
            out[lvl].append(x)
        return out

    def top_class(self) -> frozenset[int]:
        return frozenset(x for x, lvl in enumerate(self.levels) if lvl == 0)

    def bottom_class(self) -> frozenset[int]:
        low = max(self.levels)
        return frozenset(x for x, lvl in enumerate(self.levels) if lvl == low)

    def is_strict(self) -> bool:
        return len(set(self.levels)) == self.m

    def is_indifferent(self) -> bool:
        return max(self.levels) == 0

    def unique_top(self) -> int | None:
        top = self.top_class()
        return next(iter(top)) if len(top) == 1 else None

    def permuted(self, perm: Sequence[int]) -> "WeakOrder":
        """Relabel alternative ``x`` as ``perm[x]``."""
        levels = [0] * self.m
        for x, lvl in enumerate(self.levels):
            levels[perm[x]] = lvl
        return WeakOrder(tuple(levels))

    def render(self, names: Sequence[str] | None = None) -> str:
        name = (lambda x: names[x]) if names is not None else alt_name
        return " > ".join("~".join(name(x) for x in c) for c in self.classes())

    def __str__(self) -> str:
        return self.render()


def parse_order(text: str, names: Sequence[str] | None = None, m: int | None = None) -> WeakOrder:
    """Parse ``"a~b > c > d"``; exact inverse of :meth:`WeakOrder.render`.

    ``names`` pins the alternative order (as a file header does); otherwise
    letters map to their alphabet position.
    """
    lookup = {nm: i for i, nm in enumerate(names)} if names is not None else None
    classes = []
    for part in text.split(">"):
        tokens = [t.strip() for t in part.split("~")]
        if not tokens or any(not t for t in tokens):
            raise ParseError(f"empty indifference class in {text!r}")
        cls_ = []
        for tok in tokens:
            if lookup is not None:
                if tok not in lookup:
                    raise ParseError(f"unknown alternative {tok!r}")
                cls_.append(lookup[tok])
            else:
                cls_.append(alt_index(tok))
        classes.append(cls_)
    if m is None:
        m = len(names) if names is not None else len([x for c in classes for x in c])
    flat = [x for c in classes for x in c]
    if len(set(flat)) != len(flat):
        raise ParseError(f"alternative repeated in {text!r}")
    if sorted(flat) != list(range(m)):
        raise ParseError(f"order {text!r} does not rank exactly the {m} alternatives")
    return WeakOrder.from_classes(classes, m)


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """An ``n``-tuple of weak orders over the same ``m`` alternatives."""

    voters: tuple[WeakOrder, ...]

    def __post_init__(self):
        voters = tuple(self.voters)
        if not voters:
            raise DomainError("a profile needs at least one voter")
        ms = {v.m for v in voters}
        if len(ms) != 1:
            raise DomainError(f"voters disagree on the number of alternatives: {sorted(ms)}")
        object.__setattr__(self, "voters", voters)

    @classmethod
    def from_text(cls, lines: Iterable[str], names: Sequence[str] | None = None) -> "Profile":
        return cls(tuple(parse_order(line, names) for line in lines))

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def m(self) -> int:
        return self.voters[0].m

    def __len__(self) -> int:
        return len(self.voters)

    def __iter__(self) -> Iterator[WeakOrder]:
        return iter(self.voters)

    def __getitem__(self, i: int) -> WeakOrder:
        return self.voters[i]

    def is_strict(self) -> bool:
        return all(v.is_strict() for v in self.voters)

    def replace(self, voter: int, order: WeakOrder) -> "Profile":
        if not 0 <= voter < self.n:
            raise DomainError(f"voter {voter} outside 0..{self.n - 1}")
        voters = list(self.voters)
        voters[voter] = order
        return Profile(tuple(voters))

    def render(self, names: Sequence[str] | None = None) -> list[str]:
        return [v.render(names) for v in self.voters]

    def __str__(self) -> str:
        return " | ".join(self.render())


# ---------------------------------------------------------------------------
# rank data


class RankTuple(NamedTuple):
    strict_above: int
    tie_class: int


def rank_tuple(order: WeakOrder, x: int) -> RankTuple:
    """Number of alternatives strictly above ``x`` and size of ``x``'s class."""
    order._check(x)
    lvl = order.levels[x]
    above = sum(1 for v in order.levels if v < lvl)
    ties = sum(1 for v in order.levels if v == lvl)
    return RankTuple(above, ties)


@dataclass(frozen=True)
class RankMatrix:
    rows: tuple[tuple[RankTuple, ...], ...]

    def row(self, x: int) -> tuple[RankTuple, ...]:
        return self.rows[x]

    def render(self, names: Sequence[str] | None = None) -> list[str]:
        name = (lambda x: names[x]) if names is not None else alt_name
        return [
            f"{name(x)}: " + " ".join(f"({s},{t})" for s, t in row)
            for x, row in enumerate(self.rows)
        ]


def rank_matrix(profile: Profile) -> RankMatrix:
    rows = []
    for x in range(profile.m):
        rows.append(tuple(sorted(rank_tuple(v, x) for v in profile.voters)))
    return RankMatrix(tuple(rows))


# ---------------------------------------------------------------------------
# pairwise data


@dataclass(frozen=True)
class SupportMatrix:
    s: tuple[tuple[int, ...], ...]

    def __getitem__(self, xy: tuple[int, int]) -> int:
        x, y = xy
        return self.s[x][y]

    @property
    def m(self) -> int:
        return len(self.s)

    def margins(self) -> tuple[tuple[int, ...], ...]:
        m = self.m
        return tuple(tuple(self.s[x][y] - self.s[y][x] for y in range(m)) for x in range(m))

    def render(self, names: Sequence[str] | None = None) -> list[str]:
        return render_grid(self.s, names)


def support_matrix(profile: Profile) -> SupportMatrix:
    m = profile.m
    s = [[0] * m for _ in range(m)]
    for v in profile.voters:
        lv = v.levels
        for x in range(m):
            for y in range(m):
                if lv[x] < lv[y]:
                    s[x][y] += 1
    return SupportMatrix(tuple(tuple(r) for r in s))


def margin_matrix(profile: Profile) -> tuple[tuple[int, ...], ...]:
    return support_matrix(profile).margins()


@dataclass(frozen=True)
class MajorityRelation:
    rel: tuple[tuple[bool, ...], ...]

    def __getitem__(self, xy: tuple[int, int]) -> bool:
        x, y = xy
        return self.rel[x][y]

    def render(self, names: Sequence[str] | None = None) -> list[str]:
        return render_grid([[int(v) for v in row] for row in self.rel], names)


def majority_relation(profile: Profile) -> MajorityRelation:
    s = support_matrix(profile).s
    m = len(s)
    return MajorityRelation(tuple(tuple(s[x][y] >= s[y][x] for y in range(m)) for x in range(m)))


def render_grid(grid, names: Sequence[str] | None) -> list[str]:
    m = len(grid)
    name = (lambda x: names[x]) if names is not None else alt_name
    width = max(3, max(len(str(v)) for row in grid for v in row) + 1)
    header = " " * 3 + "".join(name(y).rjust(width) for y in range(m))
    lines = [header]
    for x in range(m):
        lines.append(name(x).ljust(3) + "".join(str(v).rjust(width) for v in grid[x]))
    return lines


# ---------------------------------------------------------------------------
# Pareto and Condorcet


def pareto_dominates(profile: Profile, x: int, y: int) -> bool:
    if x == y:
        raise DomainError("an alternative is not compared with itself")
    strict = False
    for v in profile.voters:
        if v.levels[x] > v.levels[y]:
            return False
        if v.levels[x] < v.levels[y]:
            strict = True
    return strict


def pareto_optimal_set(profile: Profile) -> frozenset[int]:
    m = profile.m
    return frozenset(
        y for y in range(m) if not any(pareto_dominates(profile, x, y) for x in range(m) if x != y)
    )


def weak_pareto_optimal_set(profile: Profile) -> frozenset[int]:
    m = profile.m
    out = []
    for y in range(m):
        beaten = any(
            all(v.levels[x] < v.levels[y] for v in profile.voters) for x in range(m) if x != y
        )
        if not beaten:
            out.append(y)
    return frozenset(out)


def condorcet_winner(profile: Profile) -> int | None:
    s = support_matrix(profile).s
    m = len(s)
    for a in range(m):
        if all(s[a][x] > s[x][a] for x in range(m) if x != a):
            return a
    return None


def condorcet_loser(profile: Profile) -> int | None:
    s = support_matrix(profile).s
    m = len(s)
    for a in range(m):
        if all(s[x][a] > s[a][x] for x in range(m) if x != a):
            return a
    return None


def top_counts(profile: Profile) -> list[int]:
    """How many voters have each alternative in their top class."""
    counts = [0] * profile.m
    for v in profile.voters:
        for x in v.top_class():
            counts[x] += 1
    return counts


def unique_top_counts(profile: Profile) -> list[int]:
    counts = [0] * profile.m
    for v in profile.voters:
        top = v.unique_top()
        if top is not None:
            counts[top] += 1
    return counts


# ---------------------------------------------------------------------------
# Kelly extension


def kelly_strictly_prefers(order: WeakOrder, X: Iterable[int], Y: Iterable[int]) -> bool:
    """``X`` is Kelly-better than ``Y``: every x weakly above every y, one pair strict."""
    X = tuple(X)
    Y = tuple(Y)
    if not X or not Y:
        raise DomainError("Kelly comparison needs non-empty sets")
    lv = order.levels
    strict = False
    for x in X:
        for y in Y:
            if lv[x] > lv[y]:
                return False
            if lv[x] < lv[y]:
                strict = True
    return strict
