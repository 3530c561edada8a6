"""OrderMatch: a distortion-3 one-sided matching from ordinal data alone.

Pipeline: find the extreme positive-plurality items, pick the anchor pair
maximising |G_in|, recover the left-to-right order of G_in from the
rankings, order agents by where their favourite item sits in that order,
and match rank for rank. Items outside G_in go to the leftover agents.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._exact_lp import strictly_feasible
from .core import DomainError, InconsistentProfileError, Matching, OrdinalProfile

log = logging.getLogger(__name__)

FALLBACK_CAP = 8


class UnresolvedOrderError(RuntimeError):
    """Too many items left unordered for the exhaustive fallback."""


@dataclass(frozen=True)
class Partition:
    g_ell: int
    g_r: int
    a_ell: int
    a_r: int
    g_in: tuple[int, ...]
    g_out: tuple[int, ...]


@dataclass(frozen=True)
class ItemOrder:
    """Recovered order of G_in, oriented so that g_ell comes before g_r."""

    items: tuple[int, ...]
    g_ell_first: bool = True
    used_fallback: bool = False
    contracted: int = 0  # items merged into an indistinguishable neighbour


@dataclass(frozen=True)
class OrderMatchResult:
    partition: Partition
    order: ItemOrder
    matching: Matching


def identify_extremes(profile: OrdinalProfile) -> tuple[int, int]:
    """The (at most two) items of G_+ that some agent ranks last within G_+."""
    plus = set(profile.positive_plurality())
    bottoms = sorted({profile.restricted(a, plus)[-1] for a in range(profile.n)})
    if len(bottoms) > 2:
        raise InconsistentProfileError(f"{len(bottoms)} distinct last choices within G_+: {bottoms}")
    return bottoms[0], bottoms[-1]


def _preferred_over(profile: OrdinalProfile, agent: int, pivot: int) -> set[int]:
    row = profile.rankings[agent]
    return set(row[: row.index(pivot)])


def g_in_of(profile: OrdinalProfile, a_i: int, a_j: int, g_ell: int, g_r: int) -> set[int]:
    return _preferred_over(profile, a_i, g_r) | _preferred_over(profile, a_j, g_ell)


def build_partition(profile: OrdinalProfile, anchors: tuple[int, int] | None = None) -> Partition:
    """Split items into G_in / G_out.

    Without ``anchors`` the pair (a_ell, a_r) maximises |G_in|, ties going
    to the lexicographically smallest pair. With ``anchors`` that pair is
    used as given (the tie-break-free variant).
    """
    g_ell, g_r = identify_extremes(profile)
    tops = profile.tops()
    left = [a for a in range(profile.n) if tops[a] == g_ell]
    right = [a for a in range(profile.n) if tops[a] == g_r]
    if anchors is not None:
        a_i, a_j = anchors
        if not (0 <= a_i < profile.n and 0 <= a_j < profile.n):
            raise DomainError(f"anchor ids {anchors} out of range")
        if tops[a_i] != g_ell or tops[a_j] != g_r:
            raise DomainError(
                f"anchors {anchors} must have favourites {g_ell} and {g_r}, got {tops[a_i]} and {tops[a_j]}"
            )
    if g_ell == g_r:
        a_i, a_j = anchors if anchors is not None else (left[0], left[0])
        return Partition(g_ell, g_r, a_i, a_j, (), tuple(range(profile.n)))
    if anchors is None:
        best = None
        lsets = {a: _preferred_over(profile, a, g_r) for a in left}
        rsets = {b: _preferred_over(profile, b, g_ell) for b in right}
        for a in left:
            for b in right:
                size = len(lsets[a] | rsets[b])
                if best is None or size > best[0]:
                    best = (size, a, b)
        a_i, a_j = best[1], best[2]
    g_in = g_in_of(profile, a_i, a_j, g_ell, g_r)
    g_out = set(range(profile.n)) - g_in
    return Partition(g_ell, g_r, a_i, a_j, tuple(sorted(g_in)), tuple(sorted(g_out)))


# --------------------------------------------------------------------------
# order recovery


def _rank_positions(profile: OrdinalProfile, items: list[int]) -> np.ndarray:
    """``pos[a, i]``: rank of ``items[i]`` within agent a's ranking restricted to ``items``."""
    table = np.array(profile.position_table(), dtype=np.int64)[:, items]
    return np.argsort(np.argsort(table, axis=1), axis=1)


def _twins(pos: np.ndarray) -> np.ndarray:
    """Pairs every agent ranks adjacently and in the same direction."""
    diff = pos[:, :, None] - pos[:, None, :]
    return (diff == 1).all(axis=0) | (diff == -1).all(axis=0)


def _twin_classes(twin: np.ndarray, among: np.ndarray | None = None) -> list[list[int]]:
    """Connected components of the twin graph (optionally restricted to ``among`` edges)."""
    m = twin.shape[0]
    edges = twin if among is None else twin & among
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in zip(*np.nonzero(edges)):
        parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda c: c[0])


def _same_class(classes: list[list[int]], m: int) -> np.ndarray:
    out = np.zeros((m, m), dtype=bool)
    for c in classes:
        out[np.ix_(c, c)] = len(c) > 1
    np.fill_diagonal(out, False)
    return out


def _propagate(profile: OrdinalProfile, items: list[int], partition: Partition, pos: np.ndarray, skip: np.ndarray):
    m = len(items)
    idx = {g: i for i, g in enumerate(items)}
    try:
        top_idx = np.array([idx[g] for g in profile.tops()], dtype=np.int64)
    except KeyError as exc:
        raise InconsistentProfileError(f"favourite item {exc.args[0]} lies outside G_in") from None
    pref = pos[:, :, None] < pos[:, None, :]
    nb = kernels.not_between_table(pos, skip)
    seed = np.zeros((profile.n, profile.n), dtype=np.bool_)
    seed[partition.a_ell, partition.a_r] = True
    rel = np.zeros((m, m), dtype=np.bool_)
    while True:
        agent_before = seed | rel[top_idx[:, None], top_idx[None, :]]
        new = rel | kernels.disagreement_rule(agent_before, pref) | kernels.betweenness_rule(rel, nb)
        new = kernels.transitive_closure(new)
        if (new & new.T).any():
            raise InconsistentProfileError("ordering rules derived a cycle; profile is not line-consistent")
        if (new == rel).all():
            return rel
        rel = new


def _linear_extensions(rel: np.ndarray, accept=lambda prefix: True):
    """Linear extensions of a strict partial order, lexicographic by index.

    ``accept(prefix)`` prunes: a rejected prefix is not extended.
    """
    m = rel.shape[0]
    placed = np.zeros(m, dtype=bool)
    order: list[int] = []

    def rec():
        if len(order) == m:
            yield list(order)
            return
        for i in range(m):
            if placed[i]:
                continue
            if any(rel[j, i] and not placed[j] for j in range(m)):
                continue
            placed[i] = True
            order.append(i)
            if accept(order):
                yield from rec()
            order.pop()
            placed[i] = False

    yield from rec()


def realizability_rows(rankings: list[list[int]], order: list[int]) -> list[tuple[int, ...]]:
    """Constraints on consecutive gaps making each ranking nearest-first.

    With items placed left to right in ``order``, an agent preferring the
    left item of a pair sits left of the pair's midpoint, and vice versa.
    Each returned row r must satisfy r . gaps > 0.
    """
    m = len(order)
    at = {g: p for p, g in enumerate(order)}

    def coord(p):
        return np.array([1] * p + [0] * (m - 1 - p), dtype=np.int64)

    rows = set()
    for row in rankings:
        upper, lower = [], []
        for g, h in zip(row, row[1:]):
            pg, ph = at[g], at[h]
            (upper if pg < ph else lower).append(coord(pg) + coord(ph))
        for u in upper:
            for lo in lower:
                rows.add(tuple(int(v) for v in (u - lo)))
    return sorted(rows)


def _single_peaked(rankings: list[list[int]], axis: list) -> bool:
    """Every ranking, restricted to ``axis``, grows its top set as an interval of the axis."""
    at = {g: p for p, g in enumerate(axis) if g is not None}
    for row in rankings:
        lo = hi = None
        for g in row:
            p = at.get(g)
            if p is None:
                continue
            if lo is None:
                lo = hi = p
            elif p == lo - 1:
                lo = p
            elif p == hi + 1:
                hi = p
            else:
                return False
    return True


def _fallback(profile: OrdinalProfile, items: list[int], rel: np.ndarray, cap: int) -> list[int]:
    loose = ~(rel | rel.T | np.eye(len(items), dtype=bool))
    unresolved = int(loose.any(axis=1).sum())
    if unresolved > cap:
        raise UnresolvedOrderError(f"{unresolved} unordered items exceed the fallback cap of {cap}")
    log.info("order fallback: %d unresolved items among %d", unresolved, len(items))

    full = [list(row) for row in profile.rankings]

    def realizable(prefix):
        # the prefix holds the leftmost items, so every unplaced item lies to its
        # right; single-peakedness is a cheap necessary test, the LP the exact one
        order = [items[i] for i in prefix]
        rest = [items[i] for i in range(len(items)) if i not in prefix]
        if not all(_single_peaked(full, order + [h]) for h in rest or [None]):
            return False
        if rest:
            return True
        rankings = [profile.restricted(a, order) for a in range(profile.n)]
        return strictly_feasible(realizability_rows(rankings, order), len(order) - 1)

    for ext in _linear_extensions(rel, accept=realizable):
        return ext
    raise InconsistentProfileError("no ordering of G_in is realizable on a line")


def _contract(rel: np.ndarray, classes: list[list[int]]):
    """Relation between classes, or None if some class is split by an outside item."""
    k = len(classes)
    crel = np.zeros((k, k), dtype=bool)
    for p, cp in enumerate(classes):
        for q, cq in enumerate(classes):
            if p == q:
                continue
            block = rel[np.ix_(cp, cq)]
            if block.any() and not block.all():
                return None
            crel[p, q] = block.all()
    if (crel & crel.T).any():
        return None
    return crel


def _orient_class(members: list[int], before: set[int], after: set[int], pos: np.ndarray) -> list[int]:
    """Left-to-right order inside a block of items every agent ranks alike.

    ``members`` is the common preference order. If an agent ranks an item
    lying to the right above the block's last member, that member cannot
    sit between the first member and that item, so the block runs
    right-to-left (and symmetrically on the left). Conflicting evidence
    means the members coincide and any order will do.
    """
    last = members[-1]
    hit_after = any((pos[:, z] < pos[:, last]).any() for z in after)
    hit_before = any((pos[:, z] < pos[:, last]).any() for z in before)
    if hit_after and not hit_before:
        return members[::-1]
    return members


def _topological(rel: np.ndarray) -> list[int]:
    return sorted(range(rel.shape[0]), key=lambda i: int(rel[:, i].sum()))


def _complete(rel: np.ndarray) -> bool:
    return bool((rel | rel.T | np.eye(rel.shape[0], dtype=bool)).all())


def recover_item_order(
    profile: OrdinalProfile, partition: Partition, fallback_cap: int = FALLBACK_CAP, force_fallback: bool = False
) -> ItemOrder:
    """Left-to-right order of G_in (up to reversal; g_ell precedes g_r).

    Deduction rules run to a fixpoint: anchor / ordered-agent disagreement,
    the no-middle-item-ranked-last rule and transitivity. If coincident
    items make the rules contradict themselves, they are re-run without
    betweenness inferences inside blocks that every agent ranks as one
    unit. Such blocks, when still unordered, are merged and oriented
    afterwards. Anything left is settled by testing linear extensions for
    exact realizability on a line. ``force_fallback`` skips the rules
    (keeping only g_ell before g_r) so the exhaustive path can be exercised;
    blocks are still merged first, since coincident items admit no strict
    layout.
    """
    items = list(partition.g_in)
    m = len(items)
    if m <= 1:
        return ItemOrder(tuple(items))
    pos = _rank_positions(profile, items)
    twin = _twins(pos)
    if force_fallback:
        # only g_ell before g_r, stated for whole blocks so merging still works
        rel = np.zeros((m, m), dtype=bool)
        cls = {i: c for c in _twin_classes(twin) for i in c}
        left, right = cls[items.index(partition.g_ell)], cls[items.index(partition.g_r)]
        if left is not right:
            rel[np.ix_(left, right)] = True
    else:
        try:
            rel = _propagate(profile, items, partition, pos, np.zeros((m, m), dtype=bool))
        except InconsistentProfileError:
            rel = _propagate(profile, items, partition, pos, _same_class(_twin_classes(twin), m))
        if _complete(rel):
            return ItemOrder(tuple(items[i] for i in _topological(rel)))

    classes = _twin_classes(twin, among=~(rel | rel.T))
    for c in classes:
        c.sort(key=lambda i: pos[0, i])
    crel = _contract(rel, classes) if any(len(c) > 1 for c in classes) else None
    if crel is None:
        classes, crel = [[i] for i in range(m)], rel
    reps = [items[c[0]] for c in classes]
    used_fallback = False
    if _complete(crel) and not force_fallback:
        class_order = _topological(crel)
    else:
        used_fallback = True
        class_order = _fallback(profile, reps, crel, fallback_cap)
    order: list[int] = []
    for p, c in enumerate(class_order):
        members = classes[c]
        if len(members) > 1:
            before = {i for q in class_order[:p] for i in classes[q]}
            after = {i for q in class_order[p + 1 :] for i in classes[q]}
            members = _orient_class(members, before, after, pos)
        order.extend(items[i] for i in members)
    merged = sum(len(c) - 1 for c in classes)
    return ItemOrder(tuple(order), used_fallback=used_fallback, contracted=merged)


# --------------------------------------------------------------------------
# matching


def _assign(profile: OrdinalProfile, partition: Partition, order: ItemOrder) -> Matching:
    n = profile.n
    item_of = [-1] * n
    if order.items:
        rank = {g: i for i, g in enumerate(order.items)}
        tops = profile.tops()
        if any(t not in rank for t in tops):
            raise InconsistentProfileError("a favourite item is missing from G_in")
        agents = sorted(range(n), key=lambda a: (rank[tops[a]], a))
        for g, a in zip(order.items, agents):
            item_of[a] = g
    free = [a for a in range(n) if item_of[a] < 0]
    for g, a in zip(partition.g_out, free):
        item_of[a] = g
    return Matching(item_of)


def run_order_match(profile: OrdinalProfile, anchors: tuple[int, int] | None = None) -> OrderMatchResult:
    partition = build_partition(profile, anchors)
    order = recover_item_order(profile, partition)
    return OrderMatchResult(partition, order, _assign(profile, partition, order))


def order_match(profile: OrdinalProfile) -> Matching:
    return run_order_match(profile).matching


def order_match_naive(profile: OrdinalProfile, anchor_choice: tuple[int, int]) -> Matching:
    """OrderMatch with caller-chosen anchors instead of the |G_in| maximiser."""
    return run_order_match(profile, anchors=tuple(anchor_choice)).matching


def plurality_inside_g_in(profile: OrdinalProfile, partition: Partition) -> bool:
    """Every item some agent ranks first lies in G_in (vacuous when G_in is empty)."""
    if not partition.g_in:
        return True
    return set(profile.positive_plurality()) <= set(partition.g_in)


def argmax_anchor_pairs(profile: OrdinalProfile) -> list[tuple[int, int]]:
    """Every anchor pair attaining the maximal |G_in| (diagnostic)."""
    g_ell, g_r = identify_extremes(profile)
    tops = profile.tops()
    pairs = list(
        itertools.product(
            [a for a in range(profile.n) if tops[a] == g_ell],
            [b for b in range(profile.n) if tops[b] == g_r],
        )
    )
    sizes = {p: len(g_in_of(profile, p[0], p[1], g_ell, g_r)) for p in pairs}
    best = max(sizes.values())
    return [p for p in pairs if sizes[p] == best]


def worst_anchor_pair(profile: OrdinalProfile) -> tuple[int, int]:
    """Valid anchors minimising |G_in| (smallest pair on ties): the worst arbitrary choice."""
    g_ell, g_r = identify_extremes(profile)
    tops = profile.tops()
    pairs = itertools.product(
        [a for a in range(profile.n) if tops[a] == g_ell],
        [b for b in range(profile.n) if tops[b] == g_r],
    )
    return min(pairs, key=lambda p: (len(g_in_of(profile, p[0], p[1], g_ell, g_r)), p))
