"""Two-sided matching on the line: exact optimum from ordinal data, and query-bounded elicitation.

Takers (side ``"A"``) rank givers; givers (side ``"B"``) rank takers. A
matching maps taker -> giver. Both sides' orders can be read off the
rankings up to reversal; once the two are oriented alike, matching
rank-for-rank is optimal for every k.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    DomainError,
    Instance,
    InconsistentProfileError,
    Matching,
    as_rational,
    derive_profile,
    ranking_consistent,
)

TAKERS, GIVERS = "A", "B"


@dataclass(frozen=True)
class TwoSidedInstance:
    takers: tuple[Fraction, ...]
    givers: tuple[Fraction, ...]

    def __init__(self, takers: Iterable, givers: Iterable):
        a = tuple(as_rational(x) for x in takers)
        b = tuple(as_rational(x) for x in givers)
        if len(a) != len(b):
            raise DomainError(f"{len(a)} takers but {len(b)} givers")
        if not a:
            raise DomainError("an instance needs at least one taker")
        object.__setattr__(self, "takers", a)
        object.__setattr__(self, "givers", b)

    @property
    def n(self) -> int:
        return len(self.takers)

    def as_one_sided(self) -> Instance:
        """Takers as agents, givers as items (same distances)."""
        return Instance(self.takers, self.givers)

    def taker_rankings(self) -> list[list[int]]:
        return [list(r) for r in derive_profile(Instance(self.takers, self.givers)).rankings]

    def giver_rankings(self) -> list[list[int]]:
        return [list(r) for r in derive_profile(Instance(self.givers, self.takers)).rankings]


@dataclass(frozen=True)
class SideOrder:
    """Agents of one side in line order, up to reversal unless ``oriented``."""

    agents: tuple[int, ...]
    oriented: bool = False

    def reversed(self) -> "SideOrder":
        return SideOrder(self.agents[::-1], self.oriented)


@dataclass(frozen=True)
class QueryResult:
    matching: Matching
    rank_queries: int
    full_queries: int
    bound: int

    @property
    def within_bound(self) -> bool:
        return self.rank_queries <= self.bound


class QueryOracle:
    """Query-counting access to a hidden two-sided instance.

    ``rank(side, agent, t)`` reveals the t-th choice (1-based) of one agent,
    ``full(side, agent)`` its whole ranking. Each distinct question is
    counted once; repeats are served from the cache for free.
    """

    def __init__(self, instance: TwoSidedInstance):
        self._hidden = {TAKERS: instance.taker_rankings(), GIVERS: instance.giver_rankings()}
        self.n = instance.n
        self._rank_cache: dict[tuple[str, int, int], int] = {}
        self._full_cache: dict[tuple[str, int], tuple[int, ...]] = {}

    @property
    def rank_queries(self) -> int:
        return len(self._rank_cache)

    @property
    def full_queries(self) -> int:
        return len(self._full_cache)

    def _check(self, side: str, agent: int):
        if side not in (TAKERS, GIVERS):
            raise DomainError(f"unknown side {side!r}")
        if not 0 <= agent < self.n:
            raise DomainError(f"agent {agent} out of range")

    def rank(self, side: str, agent: int, t: int) -> int:
        self._check(side, agent)
        if not 1 <= t <= self.n:
            raise DomainError(f"rank position {t} outside [1, {self.n}]")
        key = (side, agent, t)
        if key not in self._rank_cache:
            self._rank_cache[key] = self._hidden[side][agent][t - 1]
        return self._rank_cache[key]

    def full(self, side: str, agent: int) -> tuple[int, ...]:
        self._check(side, agent)
        key = (side, agent)
        if key not in self._full_cache:
            self._full_cache[key] = tuple(self._hidden[side][agent])
        return self._full_cache[key]

    def ranking_via_ranks(self, side: str, agent: int) -> list[int]:
        """Whole ranking from rank queries; the last unknown position is inferred, not asked."""
        self._check(side, agent)
        known = {t: g for (s, a, t), g in self._rank_cache.items() if s == side and a == agent}
        for t in range(1, self.n + 1):
            if len(known) >= self.n - 1:
                break
            if t not in known:
                known[t] = self.rank(side, agent, t)
        missing = [t for t in range(1, self.n + 1) if t not in known]
        if missing:
            (left,) = set(range(self.n)) - set(known.values())
            known[missing[0]] = left
        return [known[t] for t in range(1, self.n + 1)]


# --------------------------------------------------------------------------
# order recovery and the exact optimum


def recover_side_order(own_rankings: Sequence[Sequence[int]], other_rankings: Mapping[int, Sequence[int]]) -> SideOrder:
    """Line order of one side.

    ``own_rankings[x]`` is agent x's ranking of the other side; it decides
    the case. ``other_rankings`` maps other-side agents to their rankings of
    this side and needs only the one or two bottom agents.

    One common bottom b: everyone is on one side of b, so b's ranking is the
    order. Two bottoms: agents topping the first bottom are ordered by the
    second bottom's ranking (reversed) and the rest by the first's.
    """
    n = len(own_rankings)
    if n == 1:
        return SideOrder((0,))
    bottoms = sorted({row[-1] for row in own_rankings})
    if len(bottoms) > 2:
        raise InconsistentProfileError(f"{len(bottoms)} distinct last choices: {bottoms}")
    for b in bottoms:
        if b not in other_rankings:
            raise DomainError(f"ranking of bottom agent {b} is required")
    if len(bottoms) == 1:
        return SideOrder(tuple(other_rankings[bottoms[0]]))
    b_ell, b_r = bottoms
    near = {x for x in range(n) if own_rankings[x][0] == b_ell}
    first = [x for x in other_rankings[b_r] if x in near][::-1]
    rest = [x for x in other_rankings[b_ell] if x not in near]
    return SideOrder(tuple(first + rest))


def _orient(
    takers: SideOrder, givers: SideOrder, taker_rankings, giver_rankings
) -> tuple[SideOrder, SideOrder]:
    """Reverse the giver order where needed so both run the same way."""
    n = len(takers.agents)
    t, g = takers.agents, givers.agents
    if n == 1:
        return SideOrder(t, True), SideOrder(g, True)
    if len({row[-1] for row in taker_rankings}) == 2:
        # the last taker's least-preferred giver is at the opposite end
        flip = taker_rankings[t[-1]][-1] != g[0]
    elif len({row[-1] for row in giver_rankings}) == 2:
        flip = giver_rankings[g[-1]][-1] != t[0]
    else:
        # all givers sit on one side of their common bottom taker, an end taker;
        # its favourite giver is the end giver on the same side
        a = giver_rankings[0][-1]
        fav = taker_rankings[a][0]
        flip = (a == t[-1]) != (fav == g[-1])
    return SideOrder(t, True), SideOrder(g[::-1] if flip else g, True)


def _greedy(takers: SideOrder, givers: SideOrder) -> Matching:
    item_of = [0] * len(takers.agents)
    for a, b in zip(takers.agents, givers.agents):
        item_of[a] = b
    return Matching(item_of)


def two_sided_orders(taker_rankings, giver_rankings) -> tuple[SideOrder, SideOrder]:
    givers_full = dict(enumerate(giver_rankings))
    takers_full = dict(enumerate(taker_rankings))
    t = recover_side_order(taker_rankings, givers_full)
    g = recover_side_order(giver_rankings, takers_full)
    return _orient(t, g, taker_rankings, giver_rankings)


def two_sided_optimal(taker_rankings: Sequence[Sequence[int]], giver_rankings: Sequence[Sequence[int]]) -> Matching:
    """Optimal matching for every k, from both sides' rankings alone."""
    if len(taker_rankings) != len(giver_rankings):
        raise DomainError("both sides need the same number of agents")
    return _greedy(*two_sided_orders(taker_rankings, giver_rankings))


def _order_by_split(first_end: int, other: int, split: set[int], rank_first, rank_other) -> list[int]:
    """Order one side left to right given an end agent on the other side.

    ``first_end`` is the rightmost agent of the other side; ``split`` holds
    the agents whose favourite it is. Those lie right of everyone else and
    of ``other``, which orders them outward; the rest lie left of
    ``first_end``, whose ranking orders them right to left.
    """
    rest = [x for x in rank_first if x not in split][::-1]
    near = [x for x in rank_other if x in split]
    return rest + near


def _one_side_from_extreme(oracle: QueryOracle, side: str, extreme: int, other: int, tops: dict[int, int]) -> list[int]:
    """Order ``side`` left to right, taking ``extreme`` (other side) as the rightmost."""
    other_side = GIVERS if side == TAKERS else TAKERS
    split = {x for x, t in tops.items() if t == extreme}
    rank_ext = oracle.ranking_via_ranks(other_side, extreme)
    rank_oth = oracle.ranking_via_ranks(other_side, other) if split else []
    return _order_by_split(extreme, other, split, rank_ext, rank_oth)


def one_sided_bound(n: int, taker_rankings) -> int:
    if len({row[-1] for row in taker_rankings}) == 2:
        return max(3 * n - 4, 0)
    return 2 * n - 2


def solve_one_sided_ranks(oracle: QueryOracle, taker_rankings: Sequence[Sequence[int]]) -> QueryResult:
    """Optimum with the takers' rankings known, using at most 3n-4 rank queries.

    The bottom givers' rankings (asked rank by rank) order the takers. Every
    other giver's favourite is then asked, and the givers are ordered from
    the last taker's ranking and one more taker's.
    """
    n = oracle.n
    bound = one_sided_bound(n, taker_rankings)
    if n == 1:
        return QueryResult(Matching([0]), oracle.rank_queries, oracle.full_queries, bound)
    bottoms = sorted({row[-1] for row in taker_rankings})
    if len(bottoms) > 2:
        raise InconsistentProfileError(f"{len(bottoms)} distinct last choices: {bottoms}")
    answers = {b: oracle.ranking_via_ranks(GIVERS, b) for b in bottoms}
    t_order = recover_side_order(taker_rankings, answers).agents
    a = t_order[-1]
    other = min(x for x in range(n) if x != a)
    tops = {b: oracle.rank(GIVERS, b, 1) for b in range(n)}
    split = {b for b, t in tops.items() if t == a}
    g_order = _order_by_split(a, other, split, taker_rankings[a], taker_rankings[other])
    m = _greedy(SideOrder(t_order), SideOrder(tuple(g_order)))
    return QueryResult(m, oracle.rank_queries, oracle.full_queries, bound)


def solve_zero_knowledge(oracle: QueryOracle) -> QueryResult:
    """Optimum from rank queries alone, at most 5n-4 of them.

    Taker 0's least-preferred giver b1 is an end giver. If some taker's
    favourite is b1, that taker's ranking orders the givers and b1's plus
    one more giver's order the takers. Otherwise every taker sits on one
    side of b1, whose ranking orders the takers, and the givers are ordered
    from the end taker as in the one-sided case.
    """
    n = oracle.n
    bound = 5 * n - 4
    if n == 1:
        return QueryResult(Matching([0]), oracle.rank_queries, oracle.full_queries, bound)
    b1 = oracle.rank(TAKERS, 0, n)
    tops = {a: oracle.rank(TAKERS, a, 1) for a in range(1, n)}
    hits = sorted(a for a, t in tops.items() if t == b1)
    if hits:
        a1 = hits[0]
        g_order = oracle.ranking_via_ranks(TAKERS, a1)[::-1]
        other = min(b for b in range(n) if b != b1)
        # taker 0 ranks b1 last, so it is not among b1's fans
        t_order = _one_side_from_extreme(oracle, TAKERS, b1, other, tops)
    else:
        t_order = oracle.ranking_via_ranks(GIVERS, b1)[::-1]
        a_r = t_order[-1]
        g_tops = {b: oracle.rank(GIVERS, b, 1) for b in range(n) if b != b1}
        g_tops[b1] = a_r
        other = min(a for a in range(n) if a != a_r)
        g_order = _one_side_from_extreme(oracle, GIVERS, a_r, other, g_tops)
    m = _greedy(SideOrder(tuple(t_order)), SideOrder(tuple(g_order)))
    return QueryResult(m, oracle.rank_queries, oracle.full_queries, bound)


# --------------------------------------------------------------------------
# full-preference lower bound


def unqueried_pair(n: int, queried: Iterable[int]) -> tuple[int, int]:
    q = set(queried)
    if any(not 0 <= b < n for b in q):
        raise DomainError("queried giver id out of range")
    if len(q) > n - 2:
        raise DomainError(f"{len(q)} queried givers leave fewer than two unqueried (n={n})")
    free = [b for b in range(n) if b not in q]
    return free[0], free[1]


def _witness_metric(n: int, displaced: int) -> TwoSidedInstance:
    takers = [Fraction(k) for k in range(n)]
    givers = []
    for b in range(n):
        ell = b + 1
        givers.append(Fraction(n - 1 + n * ell) if b == displaced else Fraction(-ell * n))
    return TwoSidedInstance(takers, givers)


def fullpref_lb_witness(n: int, queried: Iterable[int]) -> tuple[TwoSidedInstance, TwoSidedInstance]:
    """Two metrics agreeing with the reported rankings whose optima pair the last taker differently.

    All takers report b_1 > ... > b_n and every queried giver reports
    a_1 > ... > a_n. Givers sit at -n*l, except one unqueried giver moved
    to n*l beyond the last taker: b_i in the first metric, b_j in the second.
    """
    if n < 2:
        raise DomainError("the witness needs n >= 2")
    i, j = unqueried_pair(n, queried)
    return _witness_metric(n, i), _witness_metric(n, j)


def witness_answers(n: int, queried: Iterable[int]) -> tuple[list[list[int]], dict[int, list[int]]]:
    """The reported taker rankings and the queried givers' answers."""
    takers = [list(range(n)) for _ in range(n)]
    givers = {b: list(range(n)) for b in sorted(set(queried))}
    return takers, givers


def consistent_with_answers(
    instance: TwoSidedInstance, taker_rankings: Sequence[Sequence[int]], giver_answers: Mapping[int, Sequence[int]]
) -> bool:
    """Every known ranking is weakly nearest-first under ``instance``."""
    if len(taker_rankings) != instance.n:
        raise DomainError("taker rankings and instance sizes differ")
    ok = all(ranking_consistent(instance.takers[a], row, instance.givers) for a, row in enumerate(taker_rankings))
    return ok and all(ranking_consistent(instance.givers[b], row, instance.takers) for b, row in giver_answers.items())
