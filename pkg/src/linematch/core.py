"""Exact data model: rational points on a line, ordinal profiles, matchings.

Agents and items are addressed by 0-based ids inside the library. The JSON
formats (see :mod:`linematch.instances`) use 1-based ids.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


class DomainError(ValueError):
    """An argument is outside the domain of an operation."""


class InconsistentProfileError(ValueError):
    """The ordinal data cannot come from points on a line."""


class InvariantViolation(RuntimeError):
    """A structural invariant that should hold by construction failed."""


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / decimal strings to a Fraction.

    Floats are rejected: every coordinate must be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} as an exact coordinate")


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Instance:
    """Agents and items on a line; ``agents[i]`` is the coordinate of agent i."""

    agents: tuple[Fraction, ...]
    items: tuple[Fraction, ...]

    def __init__(self, agents: Iterable, items: Iterable):
        a = tuple(as_rational(x) for x in agents)
        g = tuple(as_rational(x) for x in items)
        if len(a) != len(g):
            raise DomainError(f"{len(a)} agents but {len(g)} items")
        if not a:
            raise DomainError("an instance needs at least one agent")
        object.__setattr__(self, "agents", a)
        object.__setattr__(self, "items", g)

    @property
    def n(self) -> int:
        return len(self.agents)

    def distance(self, agent: int, item: int) -> Fraction:
        return abs(self.agents[agent] - self.items[item])

    def mirrored(self) -> "Instance":
        return Instance([-x for x in self.agents], [-x for x in self.items])

    def scaled(self, factor) -> "Instance":
        f = as_rational(factor)
        return Instance([f * x for x in self.agents], [f * x for x in self.items])


@dataclass(frozen=True)
class OrdinalProfile:
    """One strict ranking (best first) of all items per agent."""

    rankings: tuple[tuple[int, ...], ...]

    def __init__(self, rankings: Iterable[Sequence[int]]):
        r = tuple(tuple(int(g) for g in row) for row in rankings)
        if not r:
            raise DomainError("a profile needs at least one agent")
        n = len(r)
        expected = set(range(n))
        for a, row in enumerate(r):
            if len(row) != n or set(row) != expected:
                raise DomainError(f"ranking of agent {a} is not a permutation of {n} items")
        object.__setattr__(self, "rankings", r)

    @property
    def n(self) -> int:
        return len(self.rankings)

    def top(self, agent: int) -> int:
        return self.rankings[agent][0]

    def tops(self) -> list[int]:
        return [row[0] for row in self.rankings]

    def plurality(self) -> list[int]:
        score = [0] * self.n
        for row in self.rankings:
            score[row[0]] += 1
        return score

    def positive_plurality(self) -> list[int]:
        return [g for g, s in enumerate(self.plurality()) if s > 0]

    def position_table(self) -> list[list[int]]:
        """``table[a][g]`` is the 0-based rank of item g for agent a."""
        table = []
        for row in self.rankings:
            pos = [0] * self.n
            for r, g in enumerate(row):
                pos[g] = r
            table.append(pos)
        return table

    def prefers(self, agent: int, g: int, h: int) -> bool:
        row = self.rankings[agent]
        return row.index(g) < row.index(h)

    def restricted(self, agent: int, subset) -> list[int]:
        keep = set(subset)
        return [g for g in self.rankings[agent] if g in keep]


@dataclass(frozen=True)
class Matching:
    """Bijection agents -> items; ``item_of[a]`` is agent a's item."""

    item_of: tuple[int, ...]

    def __init__(self, item_of: Iterable[int]):
        m = tuple(int(g) for g in item_of)
        if sorted(m) != list(range(len(m))):
            raise DomainError(f"{m} is not a bijection")
        object.__setattr__(self, "item_of", m)

    @property
    def n(self) -> int:
        return len(self.item_of)

    def agent_of(self) -> list[int]:
        inv = [0] * self.n
        for a, g in enumerate(self.item_of):
            inv[g] = a
        return inv

    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(enumerate(self.item_of))


def derive_profile(instance: Instance) -> OrdinalProfile:
    """Rank items nearest-first; ties go to the smaller coordinate, then the smaller id."""
    rankings = []
    for y in instance.agents:
        order = sorted(
            range(instance.n),
            key=lambda g: (abs(y - instance.items[g]), instance.items[g], g),
        )
        rankings.append(order)
    return OrdinalProfile(rankings)


def matched_distances(instance: Instance, matching: Matching) -> list[Fraction]:
    if matching.n != instance.n:
        raise DomainError("matching and instance sizes differ")
    return [instance.distance(a, g) for a, g in enumerate(matching.item_of)]


def top_k_sum(values: Sequence[Fraction], k: int) -> Fraction:
    if not 1 <= k <= len(values):
        raise DomainError(f"k={k} outside [1, {len(values)}]")
    return sum(sorted(values, reverse=True)[:k], Fraction(0))


def k_centrum_cost(instance: Instance, matching: Matching, k: int) -> Fraction:
    """Sum of the k largest agent-to-item distances."""
    return top_k_sum(matched_distances(instance, matching), k)


def cost_profile(instance: Instance, matching: Matching) -> list[Fraction]:
    """SC_k for k = 1..n as a list (index 0 holds SC_1)."""
    out, acc = [], Fraction(0)
    for d in sorted(matched_distances(instance, matching), reverse=True):
        acc += d
        out.append(acc)
    return out


def ranking_consistent(position: Fraction, ranking: Sequence[int], targets: Sequence[Fraction]) -> bool:
    for g, h in zip(ranking, ranking[1:]):
        if abs(position - targets[g]) > abs(position - targets[h]):
            return False
    return True


def check_consistency(profile: OrdinalProfile, instance: Instance) -> bool:
    """True iff every agent's ranking is weakly nearest-first under ``instance``."""
    if profile.n != instance.n:
        raise DomainError(f"profile has {profile.n} agents, instance {instance.n}")
    return all(
        ranking_consistent(y, row, instance.items)
        for y, row in zip(instance.agents, profile.rankings)
    )
