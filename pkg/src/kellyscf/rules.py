"""Named set-valued social choice functions.

Each rule exists twice: a scalar ``Profile -> frozenset`` function, which is
the definition, and (where scans need speed) a vectorized kernel over level
blocks returning bitmasks.  :data:`REGISTRY` maps the stable CLI names to
:class:`RuleDescriptor` records.

Conventions for weak orders that the scoring rules need:

* plurality gives one point to every alternative in a voter's top class;
* Copeland scores wins minus losses in strict pairwise majority comparisons;
* the "two" rules keep everything scoring at least the second entry of the
  descending score multiset, so two tied maxima select exactly the maxima.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .prefcore import (
    DomainError,
    Profile,
    condorcet_loser,
    pareto_dominates,
    pareto_optimal_set,
    rank_tuple,
    support_matrix,
    top_counts,
)

# Number of times pareto_minus_condorcet_loser had to fall back to the
# plain Pareto set; stays 0 for m >= 2 (the tests assert this).
GUARD_HITS = 0


# ---------------------------------------------------------------------------
# scalar definitions


def pareto_rule(profile: Profile) -> frozenset[int]:
    return pareto_optimal_set(profile)


def omninomination(profile: Profile) -> frozenset[int]:
    out: set[int] = set()
    for v in profile.voters:
        out |= v.top_class()
    return frozenset(out)


def top_pareto(profile: Profile) -> frozenset[int]:
    out = omninomination(profile) & pareto_optimal_set(profile)
    if not out:
        raise RuntimeError(f"empty top-Pareto set on {profile}")
    return out


def _argmax(scores: Sequence[int]) -> frozenset[int]:
    best = max(scores)
    return frozenset(x for x, s in enumerate(scores) if s == best)


def borda_scores(profile: Profile) -> list[int]:
    m, n = profile.m, profile.n
    return [
        m * n - sum(rank_tuple(v, x).strict_above for v in profile.voters) for x in range(m)
    ]


def borda(profile: Profile) -> frozenset[int]:
    return _argmax(borda_scores(profile))


def plurality_scores(profile: Profile) -> list[int]:
    return top_counts(profile)


def plurality(profile: Profile) -> frozenset[int]:
    return _argmax(plurality_scores(profile))


def copeland_scores(profile: Profile) -> list[int]:
    s = support_matrix(profile).s
    m = profile.m
    return [sum((s[x][y] > s[y][x]) - (s[y][x] > s[x][y]) for y in range(m)) for x in range(m)]


def copeland(profile: Profile) -> frozenset[int]:
    return _argmax(copeland_scores(profile))


def two_threshold(scores: Sequence[int]) -> frozenset[int]:
    """Everything scoring at least the second-highest entry of ``scores``."""
    if len(scores) == 1:
        return frozenset({0})
    second = sorted(scores, reverse=True)[1]
    return frozenset(x for x, s in enumerate(scores) if s >= second)


def two_plurality(profile: Profile) -> frozenset[int]:
    return two_threshold(plurality_scores(profile))


def two_borda(profile: Profile) -> frozenset[int]:
    return two_threshold(borda_scores(profile))


def two_copeland(profile: Profile) -> frozenset[int]:
    return two_threshold(copeland_scores(profile))


def two_star_plurality(profile: Profile) -> frozenset[int]:
    """Positive plurality score at least that of the runner-up; strict profiles only."""
    if not profile.is_strict():
        raise DomainError("two-star-plurality is only defined for strict profiles")
    pl = plurality_scores(profile)
    if profile.m == 1:
        return frozenset({0})
    runner_up = sorted(pl, reverse=True)[1]
    return frozenset(x for x, s in enumerate(pl) if s >= runner_up and s > 0)


def fstar_dominates(profile: Profile, a: int, b: int) -> bool:
    """Pareto dominance, or ``a`` is top for n-1 voters with s_ab >= 2 and s_ba <= 1."""
    if pareto_dominates(profile, a, b):
        return True
    s = support_matrix(profile).s
    return top_counts(profile)[a] >= profile.n - 1 and s[a][b] >= 2 and s[b][a] <= 1


def fstar(profile: Profile) -> frozenset[int]:
    m = profile.m
    return frozenset(
        b for b in range(m) if not any(fstar_dominates(profile, a, b) for a in range(m) if a != b)
    )


def lex_pareto(profile: Profile) -> frozenset[int]:
    return frozenset({min(pareto_optimal_set(profile))})


def trivial_rule(profile: Profile) -> frozenset[int]:
    return frozenset(range(profile.m))


def constant_rule(x: int) -> Callable[[Profile], frozenset[int]]:
    def rule(profile: Profile) -> frozenset[int]:
        if not 0 <= x < profile.m:
            raise DomainError(f"constant alternative {x} outside 0..{profile.m - 1}")
        return frozenset({x})

    rule.__name__ = f"constant_{x}"
    return rule


def all_but_condorcet_loser(profile: Profile) -> frozenset[int]:
    loser = condorcet_loser(profile)
    everything = frozenset(range(profile.m))
    if profile.m == 1 or loser is None:
        return everything
    return everything - {loser}


def pareto_minus_condorcet_loser(profile: Profile) -> frozenset[int]:
    global GUARD_HITS
    pareto = pareto_optimal_set(profile)
    loser = condorcet_loser(profile)
    if loser is None:
        return pareto
    out = pareto - {loser}
    if not out:
        GUARD_HITS += 1
        return pareto
    return out


def majority_rule_m2(profile: Profile) -> frozenset[int]:
    if profile.m != 2:
        raise DomainError("the majority rule is only registered for m = 2")
    s = support_matrix(profile).s
    if s[0][1] > s[1][0]:
        return frozenset({0})
    if s[1][0] > s[0][1]:
        return frozenset({1})
    return frozenset({0, 1})


def dictator(profile: Profile) -> frozenset[int]:
    """Top class of voter 0; the stock example of a non-anonymous rule."""
    return profile.voters[0].top_class()


# ---------------------------------------------------------------------------
# vectorized kernels: (P, n, m) levels -> (P,) masks


def _full(lv):
    return np.ones(lv.shape[0:1] + lv.shape[2:], dtype=bool)


def _argmax_bits(scores):
    return scores == scores.max(axis=1, keepdims=True)


def _two_bits(scores):
    if scores.shape[1] == 1:
        return np.ones_like(scores, dtype=bool)
    second = np.sort(scores, axis=1)[:, -2:-1]
    return scores >= second


def _pareto_bits(lv):
    return ~kernels.pareto_dominated(lv)


def _omni_bits(lv):
    return (lv == 0).any(axis=1)


def _borda_scores(lv):
    m, n = lv.shape[2], lv.shape[1]
    return m * n - kernels.strict_above(lv).sum(axis=1)


def _plurality_scores(lv):
    return (lv == 0).sum(axis=1)


def _copeland_scores(lv):
    marg = kernels.margins(lv)
    return np.sign(marg).sum(axis=2)


def _two_star_bits(lv):
    pl = _plurality_scores(lv)
    if pl.shape[1] == 1:
        return np.ones_like(pl, dtype=bool)
    runner_up = np.sort(pl, axis=1)[:, -2:-1]
    return (pl >= runner_up) & (pl > 0)


def _fstar_bits(lv):
    n = lv.shape[1]
    s = kernels.supports(lv)
    tops = (lv == 0).sum(axis=1)  # (P, m)
    extra = (tops[:, :, None] >= n - 1) & (s >= 2) & (s.transpose(0, 2, 1) <= 1)
    dom = kernels.pareto_dominance(lv) | extra
    m = lv.shape[2]
    dom &= ~np.eye(m, dtype=bool)
    return ~dom.any(axis=1)


def _lex_pareto_bits(lv):
    bits = _pareto_bits(lv)
    first = bits.argmax(axis=1)
    out = np.zeros_like(bits)
    out[np.arange(len(first)), first] = True
    return out


def _loser_removed(lv, base):
    loser = kernels.condorcet_loser(lv)
    out = base.copy()
    has = loser >= 0
    out[np.nonzero(has)[0], loser[has]] = False
    return out


def _abcl_bits(lv):
    return _loser_removed(lv, _full(lv))


def _pmcl_bits(lv):
    global GUARD_HITS
    pareto = _pareto_bits(lv)
    out = _loser_removed(lv, pareto)
    empty = ~out.any(axis=1)
    if empty.any():
        GUARD_HITS += int(empty.sum())
        out[empty] = pareto[empty]
    return out


def _majority_m2_bits(lv):
    marg = kernels.margins(lv)
    return np.stack([marg[:, 0, 1] >= 0, marg[:, 1, 0] >= 0], axis=1)


def _dictator_bits(lv):
    return lv[:, 0, :] == 0


def _constant_bits(x):
    def kernel(lv):
        out = np.zeros(lv.shape[0:1] + lv.shape[2:], dtype=bool)
        out[:, x] = True
        return out

    return kernel


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class RuleDescriptor:
    """A registered rule and the domain it is declared on."""

    name: str
    evaluate: Callable[[Profile], frozenset[int]]
    batch: Callable[[np.ndarray], np.ndarray] | None = None
    requires_strict: bool = False
    min_m: int = 1
    max_m: int | None = None
    min_n: int = 1
    description: str = ""

    def check_domain(self, m: int, n: int, strict: bool) -> None:
        if self.requires_strict and not strict:
            raise DomainError(f"rule {self.name!r} is declared for strict preferences only")
        if m < self.min_m or (self.max_m is not None and m > self.max_m):
            hi = self.max_m if self.max_m is not None else "inf"
            raise DomainError(f"rule {self.name!r} needs {self.min_m} <= m <= {hi}, got m={m}")
        if n < self.min_n:
            raise DomainError(f"rule {self.name!r} needs n >= {self.min_n}, got n={n}")

    def __call__(self, profile: Profile) -> frozenset[int]:
        self.check_domain(profile.m, profile.n, profile.is_strict())
        return self.evaluate(profile)

    def batch_masks(self, lv: np.ndarray) -> np.ndarray:
        """Bitmask outputs for a level block; falls back to the scalar rule."""
        if self.batch is not None:
            return kernels.bits_to_mask(self.batch(lv))
        from .prefcore import WeakOrder, to_mask

        out = np.empty(lv.shape[0], dtype=kernels.mask_dtype(lv.shape[2]))
        for p in range(lv.shape[0]):
            prof = Profile(tuple(WeakOrder(tuple(row)) for row in lv[p].tolist()))
            out[p] = to_mask(self.evaluate(prof))
        return out


def _r(name, evaluate, batch=None, **kw) -> RuleDescriptor:
    return RuleDescriptor(name=name, evaluate=evaluate, batch=batch, **kw)


REGISTRY: dict[str, RuleDescriptor] = {
    r.name: r
    for r in [
        _r("pareto", pareto_rule, _pareto_bits, description="all Pareto-optimal alternatives"),
        _r("omninomination", omninomination, _omni_bits, description="union of top classes"),
        _r("top-pareto", top_pareto, lambda lv: _omni_bits(lv) & _pareto_bits(lv),
           description="top-ranked and Pareto-optimal"),
        _r("borda", borda, lambda lv: _argmax_bits(_borda_scores(lv)),
           description="maximal m*n minus total strict-above count"),
        _r("plurality", plurality, lambda lv: _argmax_bits(_plurality_scores(lv)),
           description="most top-class memberships"),
        _r("copeland", copeland, lambda lv: _argmax_bits(_copeland_scores(lv)),
           description="maximal pairwise wins minus losses"),
        _r("two-plurality", two_plurality, lambda lv: _two_bits(_plurality_scores(lv))),
        _r("two-borda", two_borda, lambda lv: _two_bits(_borda_scores(lv))),
        _r("two-copeland", two_copeland, lambda lv: _two_bits(_copeland_scores(lv))),
        _r("two-star-plurality", two_star_plurality, _two_star_bits, requires_strict=True,
           description="positive plurality score at least the runner-up's"),
        _r("fstar", fstar, _fstar_bits,
           description="maximal elements of Pareto dominance plus near-unanimous dominance"),
        _r("lex-pareto", lex_pareto, _lex_pareto_bits,
           description="lowest-index Pareto-optimal alternative"),
        _r("trivial", trivial_rule, _full, description="all alternatives"),
        _r("constant", constant_rule(0), _constant_bits(0), description="always {a}"),
        _r("all-but-condorcet-loser", all_but_condorcet_loser, _abcl_bits),
        _r("pareto-minus-condorcet-loser", pareto_minus_condorcet_loser, _pmcl_bits),
        _r("majority", majority_rule_m2, _majority_m2_bits, min_m=2, max_m=2,
           description="pairwise majority winner(s), m = 2"),
        _r("dictator", dictator, _dictator_bits, description="top class of voter 0"),
    ]
}


def get_rule(name: str) -> RuleDescriptor:
    try:
        return REGISTRY[name]
    except KeyError:
        import difflib

        close = difflib.get_close_matches(name, REGISTRY, n=3)
        hint = f"; did you mean {', '.join(close)}?" if close else ""
        raise KeyError(f"unknown rule {name!r}{hint}") from None
