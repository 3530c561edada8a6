"""Instance families and JSON persistence.

Random families are seeded through ``numpy.random.SeedSequence([seed, index])``
so instance ``index`` of a sweep can be regenerated on its own. The
adversarial families reproduce the lower-bound metrics with exact rationals;
coincident points are kept coincident unless a perturbation ``delta`` is
given.

JSON uses 1-based ids and rationals written as integers or ``"p/q"``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core import (
    DomainError,
    Instance,
    Matching,
    OrdinalProfile,
    check_consistency,
    cost_profile,
    derive_profile,
    format_rational,
)
from .optimal import greedy_optimal
from .twosided import TwoSidedInstance

DEFAULT_EPS = Fraction(1, 1000)
K1, KGEQ2 = "k1", "kgeq2"


class ParseError(ValueError):
    """A file could not be read as an instance, profile or matching."""


@dataclass(frozen=True)
class GenSpec:
    n: int
    seed: int = 0
    distribution: str = "uniform"  # or "clustered"
    side: str = "one"  # or "two"
    distinct: bool = False
    low: int = 0
    high: int = 1000
    clusters: int = 3
    spread: int = 5

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if self.distribution not in ("uniform", "clustered"):
            raise DomainError(f"unknown distribution {self.distribution!r}")
        if self.side not in ("one", "two"):
            raise DomainError(f"unknown side {self.side!r}")
        if self.high < self.low:
            raise DomainError("empty coordinate range")


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _draw(spec: GenSpec, rng: np.random.Generator, count: int) -> list[int]:
    if spec.distribution == "uniform":
        return [int(x) for x in rng.integers(spec.low, spec.high, size=count, endpoint=True)]
    centres = rng.integers(spec.low, spec.high, size=max(spec.clusters, 1), endpoint=True)
    which = rng.integers(0, len(centres), size=count)
    noise = rng.integers(-spec.spread, spec.spread, size=count, endpoint=True)
    return [int(np.clip(centres[w] + e, spec.low, spec.high)) for w, e in zip(which, noise)]


def gen_random(spec: GenSpec, index: int = 0, max_tries: int = 1000) -> Instance | TwoSidedInstance:
    """Integer coordinates drawn from ``spec``; ``index`` selects the instance within a sweep."""
    count = 2 * spec.n
    if spec.distinct and spec.high - spec.low + 1 < count:
        raise DomainError(f"range [{spec.low}, {spec.high}] has fewer than {count} distinct points")
    rng = _rng(spec.seed, index)
    for _ in range(max_tries):
        pts = _draw(spec, rng, count)
        if not spec.distinct or len(set(pts)) == count:
            break
    else:
        raise DomainError(f"no distinct draw after {max_tries} tries; widen the range or spread")
    cls = Instance if spec.side == "one" else TwoSidedInstance
    return cls(pts[: spec.n], pts[spec.n :])


def _check_eps(eps: Fraction) -> Fraction:
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return eps


def _perturb(instance: Instance, delta: Fraction | None) -> Instance:
    """Spread coincident points apart: the m-th repeat of a coordinate moves by m*delta."""
    if not delta:
        return instance
    seen: dict[Fraction, int] = {}
    out = []
    for x in instance.agents + instance.items:
        m = seen.get(x, 0)
        seen[x] = m + 1
        out.append(x + m * Fraction(delta))
    return Instance(out[: instance.n], out[instance.n :])


def gen_lower_bound(n: int, k_mode: str = K1, eps=DEFAULT_EPS, victim: int | None = None, slot: int | None = None) -> Instance:
    """The lower-bound metric with ``slot`` in a_1's place and ``victim`` among the others.

    Everyone ranks g_1 > ... > g_n. In ``k1`` mode the non-slot agents sit at
    0, g_1..g_{n-1} at 1, the slot agent at 2-eps and g_n at 3-eps. In
    ``kgeq2`` mode the non-slot agents and g_1..g_{n-1} share 0, the slot
    agent is at 1-eps and g_n at 2-eps. ``slot`` defaults to the smallest
    id other than ``victim``.
    """
    if n < 2:
        raise DomainError("the lower-bound family needs n >= 2")
    eps = _check_eps(eps)
    if slot is None:
        slot = min(a for a in range(n) if a != victim)
    if not 0 <= slot < n or (victim is not None and not 0 <= victim < n):
        raise DomainError("agent id out of range")
    if victim == slot:
        raise DomainError("the victim cannot take the a_1 slot")
    if k_mode == K1:
        rest, g_mid, slot_x, g_last = Fraction(0), Fraction(1), 2 - eps, 3 - eps
    elif k_mode == KGEQ2:
        rest, g_mid, slot_x, g_last = Fraction(0), Fraction(0), 1 - eps, 2 - eps
    else:
        raise DomainError(f"unknown k mode {k_mode!r}")
    agents = [slot_x if a == slot else rest for a in range(n)]
    items = [g_mid] * (n - 1) + [g_last]
    return Instance(agents, items)


def common_ranking_profile(n: int) -> OrdinalProfile:
    return OrdinalProfile([list(range(n))] * n)


def mode_k(k_mode: str) -> int:
    return 1 if k_mode == K1 else 2


def adversarial_ratio(
    profile: OrdinalProfile, matching: Matching, k_mode: str = K1, eps=DEFAULT_EPS, slot: int | None = None
) -> tuple[Instance, Fraction]:
    """Answer an algorithm's matching with the worst lower-bound metric.

    The agent that received g_n becomes a victim: the a_1 slot goes to
    someone else (smallest other id unless ``slot`` is given). Returns the
    metric and the exact ratio SC_k(matching) / SC_k(optimum) at k = 1
    (``k1``) or k = 2 (``kgeq2``).
    """
    n = profile.n
    if profile != common_ranking_profile(n):
        raise DomainError("the responder needs the common ranking g_1 > ... > g_n")
    if matching.n != n:
        raise DomainError("matching and profile sizes differ")
    k = mode_k(k_mode)
    if k > n:
        raise DomainError(f"k={k} needs n >= {k}")
    recipient = matching.agent_of()[n - 1]
    if slot is None:
        slot = min(a for a in range(n) if a != recipient)
    victim = recipient if recipient != slot else None
    instance = gen_lower_bound(n, k_mode, eps, victim=victim, slot=slot)
    if not check_consistency(profile, instance):
        raise AssertionError("lower-bound metric disagrees with the common ranking")
    alg = cost_profile(instance, matching)[k - 1]
    opt = greedy_optimal(instance).cost(k)
    return instance, alg / opt


def gen_tiebreak_pathology(n: int, k_mode: str = K1, eps=DEFAULT_EPS, delta=None) -> Instance:
    """Metrics on which arbitrary anchor choices lose badly.

    ``k1`` (n >= 4): g_1 at 0, a_1 at 1, g_i and a_i (1 < i < n-1) at 2-eps,
    g_{n-1} and a_{n-1} at 4-3eps, a_n at 5-5eps, g_n at 6-6eps.
    ``kgeq2`` (n >= 3): g_{n-1} at 0, a_{n-1} at 1, g_i and a_i (i < n-1)
    at 2-eps, g_n and a_n at 4-3eps.
    """
    eps = _check_eps(eps)
    if k_mode == K1:
        if n < 4:
            raise DomainError("the k=1 pathology needs n >= 4")
        mid, right = 2 - eps, 4 - 3 * eps
        agents = [Fraction(1)] + [mid] * (n - 3) + [right, 5 - 5 * eps]
        items = [Fraction(0)] + [mid] * (n - 3) + [right, 6 - 6 * eps]
    elif k_mode == KGEQ2:
        if n < 3:
            raise DomainError("the k>=2 pathology needs n >= 3")
        mid, right = 2 - eps, 4 - 3 * eps
        agents = [mid] * (n - 2) + [Fraction(1), right]
        items = [mid] * (n - 2) + [Fraction(0), right]
    else:
        raise DomainError(f"unknown k mode {k_mode!r}")
    return _perturb(Instance(agents, items), delta)


def naive_anchors(n: int, k_mode: str) -> tuple[int, int]:
    """The arbitrary anchor pair that exposes the pathology (0-based ids)."""
    return (1, n - 2) if k_mode == K1 else (0, n - 1)


def adversarial_suite(ns: Sequence[int] = (2, 3, 4, 5, 6, 8), eps=DEFAULT_EPS) -> list[tuple[str, Instance]]:
    """Every adversarial family over a few sizes, for distortion sweeps."""
    out = []
    for n in ns:
        for mode in (K1, KGEQ2):
            for victim in range(1, n):
                out.append((f"lb-{mode}", gen_lower_bound(n, mode, eps, victim=victim, slot=0)))
        if n >= 4:
            out.append(("tiebreak-k1", gen_tiebreak_pathology(n, K1, eps)))
            out.append(("tiebreak-k1", gen_tiebreak_pathology(n, K1, eps, delta=eps / 10)))
        if n >= 3:
            out.append(("tiebreak-kgeq2", gen_tiebreak_pathology(n, KGEQ2, eps)))
            out.append(("tiebreak-kgeq2", gen_tiebreak_pathology(n, KGEQ2, eps, delta=eps / 10)))
    return out


# --------------------------------------------------------------------------
# JSON


def _rat_out(x: Fraction) -> str | int:
    return x.numerator if x.denominator == 1 else format_rational(x)


def _rat_in(value: Any, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"{where}: expected an integer or a 'p/q' string, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{where}: {value!r} is not a rational") from None
    raise ParseError(f"{where}: expected a rational, got {type(value).__name__}")


def to_json(obj) -> dict:
    if isinstance(obj, Instance):
        return {"agents": [_rat_out(x) for x in obj.agents], "items": [_rat_out(x) for x in obj.items]}
    if isinstance(obj, TwoSidedInstance):
        return {"takers": [_rat_out(x) for x in obj.takers], "givers": [_rat_out(x) for x in obj.givers]}
    if isinstance(obj, OrdinalProfile):
        return {"rankings": [[g + 1 for g in row] for row in obj.rankings]}
    if isinstance(obj, Matching):
        return {"matching": [[a + 1, g + 1] for a, g in enumerate(obj.item_of)]}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_json(obj), indent=1) + "\n"


def _rat_list(data: dict, key: str) -> list[Fraction]:
    seq = data.get(key)
    if not isinstance(seq, list):
        raise ParseError(f"field '{key}': expected a list")
    return [_rat_in(v, f"{key}[{i}]") for i, v in enumerate(seq)]


def from_json(data: Any):
    if not isinstance(data, dict):
        raise ParseError("top level: expected a JSON object")
    try:
        if "agents" in data or "items" in data:
            return Instance(_rat_list(data, "agents"), _rat_list(data, "items"))
        if "takers" in data or "givers" in data:
            return TwoSidedInstance(_rat_list(data, "takers"), _rat_list(data, "givers"))
        if "rankings" in data:
            rows = data["rankings"]
            if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
                raise ParseError("field 'rankings': expected a list of lists")
            for a, row in enumerate(rows):
                for t, g in enumerate(row):
                    if not isinstance(g, int) or isinstance(g, bool):
                        raise ParseError(f"rankings[{a}][{t}]: expected an integer id, got {g!r}")
            return OrdinalProfile([[g - 1 for g in row] for row in rows])
        if "matching" in data:
            pairs = data["matching"]
            if not isinstance(pairs, list):
                raise ParseError("field 'matching': expected a list of [agent, item] pairs")
            item_of = [None] * len(pairs)
            for p, pair in enumerate(pairs):
                if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, int) for v in pair)):
                    raise ParseError(f"matching[{p}]: expected [agent, item]")
                a, g = pair
                if not 1 <= a <= len(pairs) or item_of[a - 1] is not None:
                    raise ParseError(f"matching[{p}]: agent {a} out of range or repeated")
                item_of[a - 1] = g - 1
            return Matching(item_of)
    except DomainError as exc:
        raise ParseError(str(exc)) from None
    raise ParseError("top level: no 'agents', 'takers', 'rankings' or 'matching' field")


def loads(text: str, source: str = "<string>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return from_json(data)
    except ParseError as exc:
        raise ParseError(f"{source}: {exc}") from None


def save(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def load(path):
    p = Path(path)
    return loads(p.read_text(), source=str(p))


def profile_of(obj) -> OrdinalProfile:
    return obj if isinstance(obj, OrdinalProfile) else derive_profile(obj)
