"""Vectorized counterparts of the prefcore structures for whole-domain scans.

Every function takes a block of profiles as an ``(P, n, m)`` integer array of
canonical levels (see :meth:`DomainSpec.level_table`).  The scalar functions
in :mod:`kellyscf.prefcore` are the reference; the test-suite compares the two
on complete small domains.
"""

from __future__ import annotations

import numpy as np


def mask_dtype(m: int):
    if m <= 8:
        return np.uint8
    if m <= 16:
        return np.uint16
    if m <= 32:
        return np.uint32
    return np.uint64


def bits_to_mask(chosen: np.ndarray) -> np.ndarray:
    """``(P, m)`` booleans to ``(P,)`` bitmasks."""
    m = chosen.shape[-1]
    weights = (1 << np.arange(m, dtype=np.int64))
    return (chosen.astype(np.int64) @ weights).astype(mask_dtype(m))


def mask_to_bits(masks: np.ndarray, m: int) -> np.ndarray:
    return ((masks.astype(np.int64)[..., None] >> np.arange(m)) & 1).astype(bool)


def supports(lv: np.ndarray) -> np.ndarray:
    """``s[p, x, y]``: voters strictly preferring ``x`` to ``y``."""
    return (lv[:, :, :, None] < lv[:, :, None, :]).sum(axis=1, dtype=np.int16)


def margins(lv: np.ndarray) -> np.ndarray:
    s = supports(lv)
    return s - s.transpose(0, 2, 1)


def majority(lv: np.ndarray) -> np.ndarray:
    s = supports(lv)
    return s >= s.transpose(0, 2, 1)


def strict_above(lv: np.ndarray) -> np.ndarray:
    """``(P, n, m)``: alternatives each voter ranks strictly above ``x``."""
    return (lv[:, :, None, :] < lv[:, :, :, None]).sum(axis=-1, dtype=np.int16)


def tie_class(lv: np.ndarray) -> np.ndarray:
    return (lv[:, :, None, :] == lv[:, :, :, None]).sum(axis=-1, dtype=np.int16)


def rank_signature(lv: np.ndarray) -> np.ndarray:
    """Rank matrix flattened to ``(P, m * n)``; rows sorted like the scalar one."""
    m = lv.shape[2]
    codes = strict_above(lv) * (m + 1) + tie_class(lv)
    codes = np.sort(codes.transpose(0, 2, 1), axis=-1)
    return codes.reshape(lv.shape[0], -1).astype(np.uint16)


def pareto_dominance(lv: np.ndarray) -> np.ndarray:
    """``d[p, x, y]``: ``x`` Pareto-dominates ``y``."""
    weak = (lv[:, :, :, None] <= lv[:, :, None, :]).all(axis=1)
    strict = (lv[:, :, :, None] < lv[:, :, None, :]).any(axis=1)
    return weak & strict


def pareto_dominated(lv: np.ndarray) -> np.ndarray:
    return pareto_dominance(lv).any(axis=1)


def top_class(lv: np.ndarray) -> np.ndarray:
    return lv == 0


def condorcet_winner(lv: np.ndarray) -> np.ndarray:
    """``(P,)`` index of the Condorcet winner, ``-1`` where none exists."""
    return _unique_index(_beats_all(lv, winner=True))


def condorcet_loser(lv: np.ndarray) -> np.ndarray:
    return _unique_index(_beats_all(lv, winner=False))


def _beats_all(lv: np.ndarray, winner: bool) -> np.ndarray:
    marg = margins(lv)
    if not winner:
        marg = -marg
    m = lv.shape[2]
    off = ~np.eye(m, dtype=bool)
    return ((marg > 0) | ~off).all(axis=2) if m > 1 else np.ones(marg.shape[:2], bool)


def _unique_index(flags: np.ndarray) -> np.ndarray:
    out = np.full(flags.shape[0], -1, dtype=np.int64)
    rows, cols = np.nonzero(flags)
    out[rows] = cols
    return out


def kelly_table(levels: np.ndarray) -> np.ndarray:
    """``T[o, X, Y]``: order ``o`` Kelly-strictly prefers mask ``X`` to mask ``Y``.

    Masks run over ``0..2^m-1``; row and column 0 (the empty set) are False.
    Uses that ``X`` beats ``Y`` iff the worst level in ``X`` is no worse than
    the best level in ``Y`` and the best level in ``X`` beats the worst in ``Y``.
    """
    K, m = levels.shape
    full = 1 << m
    bits = mask_to_bits(np.arange(full), m)  # (full, m)
    big = np.int16(1 << 10)
    lv = levels.astype(np.int16)[:, None, :]  # (K, 1, m)
    lo = np.where(bits[None], lv, big).min(axis=-1)  # best level in set
    hi = np.where(bits[None], lv, -big).max(axis=-1)  # worst level in set
    table = (hi[:, :, None] <= lo[:, None, :]) & (lo[:, :, None] < hi[:, None, :])
    table[:, 0, :] = False
    table[:, :, 0] = False
    return table
