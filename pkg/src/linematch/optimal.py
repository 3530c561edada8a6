"""The left-to-right greedy optimum M* and an exhaustive oracle for it."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .core import DomainError, Instance, Matching, cost_profile, matched_distances

BRUTE_FORCE_LIMIT = 8
_INT64_HEADROOM = 2**62


@dataclass(frozen=True)
class OptResult:
    matching: Matching
    cost_per_k: tuple[Fraction, ...]  # cost_per_k[k-1] == SC_k

    def cost(self, k: int) -> Fraction:
        return self.cost_per_k[k - 1]


def sorted_agents(instance: Instance) -> list[int]:
    return sorted(range(instance.n), key=lambda a: (instance.agents[a], a))


def sorted_items(instance: Instance) -> list[int]:
    return sorted(range(instance.n), key=lambda g: (instance.items[g], g))


def greedy_matching(instance: Instance) -> Matching:
    item_of = [0] * instance.n
    for a, g in zip(sorted_agents(instance), sorted_items(instance)):
        item_of[a] = g
    return Matching(item_of)


def greedy_optimal(instance: Instance) -> OptResult:
    """Match the i-th leftmost agent to the i-th leftmost item.

    The result minimises SC_k for every k simultaneously. Coincident points
    are ordered by id, which makes M* canonical.
    """
    m = greedy_matching(instance)
    return OptResult(m, tuple(cost_profile(instance, m)))


def integer_distance_matrix(instance: Instance) -> tuple[np.ndarray, int] | None:
    """Distances scaled by the common denominator, or None if int64 could overflow."""
    denom = 1
    for x in instance.agents + instance.items:
        denom = math.lcm(denom, x.denominator)
    pts_a = [int(x * denom) for x in instance.agents]
    pts_g = [int(x * denom) for x in instance.items]
    span = max(pts_a + pts_g) - min(pts_a + pts_g)
    if span * instance.n >= _INT64_HEADROOM:
        return None
    dist = np.abs(np.array(pts_a, dtype=np.int64)[:, None] - np.array(pts_g, dtype=np.int64)[None, :])
    return dist, denom


def brute_force_all_k(instance: Instance, limit: int = BRUTE_FORCE_LIMIT, backend: str | None = None):
    """Exhaustive minimum of SC_k for every k.

    Returns a list of ``(Matching, cost)`` indexed by k-1; each matching is the
    lexicographically smallest minimiser for its k.
    """
    n = instance.n
    if n > limit:
        raise DomainError(f"brute force refuses n={n} > limit {limit}")
    scaled = integer_distance_matrix(instance)
    if scaled is not None:
        dist, denom = scaled
        best, perms = kernels.kcentrum_brute_force(dist, backend=backend)
        return [(Matching(perms[k]), Fraction(int(best[k]), denom)) for k in range(n)]
    return _brute_force_fractions(instance)


def _brute_force_fractions(instance: Instance):
    n = instance.n
    best: list = [None] * n
    for perm in itertools.permutations(range(n)):
        m = Matching(perm)
        for k, c in enumerate(cost_profile(instance, m)):
            if best[k] is None or c < best[k][1]:
                best[k] = (m, c)
    return best


def brute_force_optimal(instance: Instance, k: int, limit: int = BRUTE_FORCE_LIMIT, backend: str | None = None):
    """Enumerate all n! matchings; return ``(matching, SC_k)`` of the best one."""
    if not 1 <= k <= instance.n:
        raise DomainError(f"k={k} outside [1, {instance.n}]")
    return brute_force_all_k(instance, limit=limit, backend=backend)[k - 1]


def all_minimisers(instance: Instance, k: int, limit: int = BRUTE_FORCE_LIMIT) -> list[Matching]:
    """Every matching attaining the minimum SC_k (used to test uniqueness)."""
    if instance.n > limit:
        raise DomainError(f"brute force refuses n={instance.n} > limit {limit}")
    out, best = [], None
    for perm in itertools.permutations(range(instance.n)):
        m = Matching(perm)
        c = sum(sorted(matched_distances(instance, m), reverse=True)[:k], Fraction(0))
        if best is None or c < best:
            out, best = [m], c
        elif c == best:
            out.append(m)
    return out
