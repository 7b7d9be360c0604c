"""Exhaustive generation of orders and profiles, with single-voter deviations.

Profiles of a domain are numbered by a mixed-radix ProfileId: voter 0 is the
most significant digit and each digit is the index of the voter's order in
:func:`all_orders`.  Ids therefore follow lexicographic order on the tuples
of order indices, which keeps witnesses reproducible across runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .prefcore import DomainError, Profile, WeakOrder

#: Largest profile space the scanners agree to index.
MAX_PROFILES = 2**62


class CapacityError(OverflowError):
    """The requested profile space cannot be indexed."""


@dataclass(frozen=True)
class DomainSpec:
    """A finite domain of ``n`` voters with orders over ``m`` alternatives.

    ``strict_only`` restricts voters to linear orders; ``exclude_indifferent``
    drops the order that ties every alternative.
    """

    m: int
    n: int
    strict_only: bool = False
    exclude_indifferent: bool = False

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DomainError(f"need m >= 1 and n >= 1, got m={self.m}, n={self.n}")

    @cached_property
    def orders(self) -> tuple[WeakOrder, ...]:
        return tuple(all_orders(self))

    @cached_property
    def order_index(self) -> dict[WeakOrder, int]:
        return {o: i for i, o in enumerate(self.orders)}

    @cached_property
    def order_count(self) -> int:
        # counted, not enumerated, so capacity checks stay cheap
        count = math.factorial(self.m) if self.strict_only else ordered_bell(self.m)
        if self.exclude_indifferent and self.m > 1 and not self.strict_only:
            count -= 1
        return count

    @property
    def profile_count(self) -> int:
        return self.order_count**self.n

    @cached_property
    def level_table(self) -> np.ndarray:
        """``(K, m)`` array of canonical level vectors, one row per order."""
        return np.array([o.levels for o in self.orders], dtype=np.int8).reshape(-1, self.m)

    def check_capacity(self) -> None:
        if self.profile_count > MAX_PROFILES:
            raise CapacityError(
                f"{self.order_count}^{self.n} profiles exceed the index capacity {MAX_PROFILES}"
            )

    def contains(self, profile: Profile) -> bool:
        return profile.n == self.n and profile.m == self.m and all(
            o in self.order_index for o in profile.voters
        )

    def describe(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "strict": self.strict_only,
            "exclude_indifferent": self.exclude_indifferent,
            "orders": self.order_count,
            "profiles": self.profile_count,
        }

    # -- ProfileId ---------------------------------------------------------

    def encode(self, profile: Profile) -> int:
        if profile.n != self.n or profile.m != self.m:
            raise DomainError(f"profile shape (n={profile.n}, m={profile.m}) does not match {self}")
        K = self.order_count
        pid = 0
        for v in profile.voters:
            try:
                pid = pid * K + self.order_index[v]
            except KeyError:
                raise DomainError(f"order {v} is not in the domain") from None
        return pid

    def decode(self, pid: int) -> Profile:
        return Profile(tuple(self.orders[k] for k in self.digits(pid)))

    def digits(self, pid: int) -> tuple[int, ...]:
        if not 0 <= pid < self.profile_count:
            raise DomainError(f"ProfileId {pid} outside 0..{self.profile_count - 1}")
        K = self.order_count
        out = [0] * self.n
        for i in range(self.n - 1, -1, -1):
            pid, out[i] = divmod(pid, K)
        return tuple(out)

    def id_block(self, start: int, stop: int) -> np.ndarray:
        """Order indices for ProfileIds ``start..stop-1`` as an ``(P, n)`` array."""
        K = self.order_count
        ids = np.arange(start, stop, dtype=np.int64)
        out = np.empty((len(ids), self.n), dtype=np.int64)
        for i in range(self.n - 1, -1, -1):
            ids, out[:, i] = np.divmod(ids, K)
        return out

    def ids_of(self, digits: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`id_block`."""
        K = self.order_count
        pid = np.zeros(digits.shape[0], dtype=np.int64)
        for i in range(self.n):
            pid = pid * K + digits[:, i]
        return pid


# ---------------------------------------------------------------------------


def ordered_bell(m: int) -> int:
    """Number of weak orders on ``m`` alternatives (ordered set partitions)."""
    a = [1]
    for k in range(1, m + 1):
        a.append(sum(math.comb(k, j) * a[k - j] for j in range(1, k + 1)))
    return a[m]


def _weak_level_vectors(m: int) -> Iterator[tuple[int, ...]]:
    # lexicographic over level vectors whose used levels are 0..L-1
    vec = [0] * m

    def rec(pos: int, used: frozenset[int]):
        if pos == m:
            if max(used) + 1 == len(used):
                yield tuple(vec)
            return
        remaining = m - pos - 1
        for v in range(m):
            new = used | {v}
            if max(new) + 1 - len(new) > remaining:
                continue
            vec[pos] = v
            yield from rec(pos + 1, new)

    yield from rec(0, frozenset())


def all_orders(spec: DomainSpec) -> list[WeakOrder]:
    """Every admissible order of the domain, sorted by level vector."""
    if spec.strict_only:
        vectors = itertools.permutations(range(spec.m))
    else:
        vectors = _weak_level_vectors(spec.m)
    orders = [WeakOrder(v) for v in vectors]
    if spec.exclude_indifferent and spec.m > 1:
        orders = [o for o in orders if not o.is_indifferent()]
    return orders


def all_profiles(spec: DomainSpec, start: int = 0) -> Iterator[Profile]:
    """Stream every profile of ``spec`` from ProfileId ``start`` on.

    Resuming is just passing the last processed id plus one.
    """
    spec.check_capacity()
    orders = spec.orders
    total = spec.profile_count
    if not 0 <= start <= total:
        raise DomainError(f"start id {start} outside 0..{total}")
    if start == total:
        return
    digits = list(spec.digits(start))
    K = spec.order_count
    current = [orders[d] for d in digits]
    for _ in range(total - start):
        yield Profile(tuple(current))
        i = spec.n - 1
        while i >= 0:
            digits[i] += 1
            if digits[i] < K:
                current[i] = orders[digits[i]]
                break
            digits[i] = 0
            current[i] = orders[0]
            i -= 1


def deviations(profile: Profile, voter: int, spec: DomainSpec) -> Iterator[Profile]:
    if not 0 <= voter < profile.n:
        raise DomainError(f"voter {voter} outside 0..{profile.n - 1}")
    own = profile.voters[voter]
    for order in spec.orders:
        if order != own:
            yield profile.replace(voter, order)


def _check_perm(perm: Sequence[int], size: int, what: str) -> None:
    if sorted(perm) != list(range(size)):
        raise DomainError(f"{list(perm)} is not a permutation of the {size} {what}")


def permute_voters(profile: Profile, perm: Sequence[int]) -> Profile:
    """Voter ``i`` of the result holds the order of voter ``perm[i]``."""
    _check_perm(perm, profile.n, "voters")
    return Profile(tuple(profile.voters[perm[i]] for i in range(profile.n)))


def permute_alternatives(profile: Profile, perm: Sequence[int]) -> Profile:
    """Rename alternative ``x`` to ``perm[x]`` in every order."""
    _check_perm(perm, profile.m, "alternatives")
    return Profile(tuple(v.permuted(perm) for v in profile.voters))


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def canonical_voter_representative(profile: Profile) -> Profile:
    """The voter-sorted member of the profile's anonymity class."""
    return Profile(tuple(sorted(profile.voters, key=lambda o: o.levels)))


def anonymous_representatives(spec: DomainSpec) -> Iterator[Profile]:
    """One profile per anonymity class (multisets of orders).

    Only sound for properties that do not depend on voter identities.
    """
    for combo in itertools.combinations_with_replacement(spec.orders, spec.n):
        yield Profile(combo)
