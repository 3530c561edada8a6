"""Permutation graphs of a matching against M*, and the forward-edge removal.

This is an analysis tool: it needs ground-truth coordinates. Agent i has a
single out-edge to the agent j whose optimal item M gives to i.

"Left" is oriented so that g_ell lies left of g_r. When the instance puts
g_ell to the right, every comparison uses the mirrored key (-x, -id), which
leaves M* itself unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import DomainError, Instance, InvariantViolation, Matching, derive_profile, top_k_sum
from .optimal import greedy_matching
from .ordermatch import Partition, build_partition

OUT_LEFT = "out_l"
OUT_RIGHT = "out_r"

FORWARD, BACKWARD, INTERNAL, INWARD, OTHER = "forward", "backward", "internal", "inward", "other"


@dataclass(frozen=True)
class PermutationGraph:
    """``head[i] = j`` encodes the edge (a_i, a_j), i.e. M(a_i) = M*(a_j).

    ``label[i]`` is the 1-based location rank of a_i's favourite item within
    G_in when M*(a_i) is in G_in, else ``"out_l"`` / ``"out_r"``.
    """

    head: tuple[int, ...]
    label: tuple[int | str, ...]
    opt: tuple[int, ...]  # M*(a) for every agent

    @property
    def n(self) -> int:
        return len(self.head)

    def edges(self) -> list[tuple[int, int]]:
        return list(enumerate(self.head))

    def matching(self) -> Matching:
        return Matching(self.opt[j] for j in self.head)

    def with_head(self, head) -> "PermutationGraph":
        return PermutationGraph(tuple(head), self.label, self.opt)


@dataclass(frozen=True)
class Swap:
    a1: int
    a2: int
    a3: int
    a4: int
    removed: tuple[Fraction, Fraction]
    added: tuple[Fraction, Fraction]

    @property
    def max_ok(self) -> bool:
        return max(self.removed) <= max(self.added)

    @property
    def sum_ok(self) -> bool:
        return sum(self.removed) <= sum(self.added)


@dataclass
class RemovalTrace:
    swaps: list[Swap] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.swaps)


def _orientation(instance: Instance, partition: Partition) -> int:
    ell, r = instance.items[partition.g_ell], instance.items[partition.g_r]
    if ell != r:
        return 1 if ell < r else -1
    return 1 if partition.g_ell <= partition.g_r else -1


def canonical_matching(instance: Instance, m: Matching, s: int = 1) -> Matching:
    """Equivalent matching that hands out each block of coincident items in M*'s order.

    Items at one point are interchangeable, so every agent keeps its
    distance. Holders of a block are sorted left to right (key (s*x, s*id))
    and receive the block's items in M*'s order, so that an arbitrary
    order among coincident items cannot show up as a spurious backward edge.
    """
    holder = m.agent_of()
    blocks: dict[Fraction, list[int]] = {}
    for g in range(instance.n):
        blocks.setdefault(instance.items[g], []).append(g)
    item_of = list(m.item_of)
    for items in blocks.values():
        if len(items) < 2:
            continue
        items = sorted(items)  # M* order: ascending id in both orientations
        if s < 0:
            items.reverse()
        agents = sorted((holder[g] for g in items), key=lambda a: (s * instance.agents[a], s * a))
        for a, g in zip(agents, items):
            item_of[a] = g
    return Matching(item_of)


def build_graph(instance: Instance, m: Matching, partition: Partition | None = None) -> PermutationGraph:
    """Permutation graph of ``m``; G_in defaults to OrderMatch's partition of the derived profile."""
    if m.n != instance.n:
        raise DomainError("matching and instance sizes differ")
    profile = derive_profile(instance)
    if partition is None:
        partition = build_partition(profile)
    opt = greedy_matching(instance).item_of
    owner = {g: a for a, g in enumerate(opt)}
    s = _orientation(instance, partition)
    m = canonical_matching(instance, m, s)
    head = tuple(owner[g] for g in m.item_of)

    g_in = set(partition.g_in)
    key = {g: (s * instance.items[g], s * g) for g in range(instance.n)}
    locations = sorted({s * instance.items[g] for g in g_in})
    loc_rank = {x: i + 1 for i, x in enumerate(locations)}
    if g_in:
        lo = min(key[g] for g in g_in)
        hi = max(key[g] for g in g_in)
    labels: list[int | str] = []
    for a in range(instance.n):
        g = opt[a]
        if g in g_in:
            top = profile.top(a)
            if top not in g_in:
                raise InvariantViolation(f"agent {a} is in A_in but its favourite {top} is outside G_in")
            labels.append(loc_rank[s * instance.items[top]])
        elif not g_in or key[g] < lo:
            labels.append(OUT_LEFT)
        elif key[g] > hi:
            labels.append(OUT_RIGHT)
        else:
            raise InvariantViolation(f"item {g} of G_out lies inside the span of G_in")
    return PermutationGraph(head, tuple(labels), tuple(opt))


def edge_kind(graph: PermutationGraph, i: int, j: int) -> str:
    li, lj = graph.label[i], graph.label[j]
    in_i, in_j = isinstance(li, int), isinstance(lj, int)
    if in_i and in_j:
        if li < lj:
            return FORWARD
        if li > lj:
            return BACKWARD
        return INTERNAL
    if in_j:
        return INWARD
    return OTHER


def edge_kinds(graph: PermutationGraph) -> list[str]:
    return [edge_kind(graph, i, j) for i, j in graph.edges()]


def edge_cost(instance: Instance, graph: PermutationGraph, i: int, j: int) -> Fraction:
    return instance.distance(i, graph.opt[j])


def graph_cost(instance: Instance, graph: PermutationGraph, k: int) -> Fraction:
    return top_k_sum([edge_cost(instance, graph, i, j) for i, j in graph.edges()], k)


def is_permutation(graph: PermutationGraph) -> bool:
    return sorted(graph.head) == list(range(graph.n))


def remove_forward_edges(
    graph: PermutationGraph, instance: Instance, trace: RemovalTrace | None = None
) -> PermutationGraph:
    """Swap forward edges away, right to left, until none remain.

    Each round takes the forward edge (a3, a4) whose tail's favourite is
    rightmost and pairs it with a forward or inward edge (a1, a2) ending at
    an agent with the same favourite; the two edges become (a1, a4) and
    (a3, a2). Tied choices go to the smallest agent id.
    """
    kinds = edge_kinds(graph)
    if BACKWARD in kinds:
        raise DomainError("input graph has a backward edge")
    head = list(graph.head)
    label = graph.label
    for _ in range(graph.n + 1):
        cur = graph.with_head(head)
        forward = [i for i in range(graph.n) if edge_kind(cur, i, head[i]) == FORWARD]
        if not forward:
            return cur
        a3 = max(forward, key=lambda i: (label[i], -i))
        a4 = head[a3]
        candidates = [
            i
            for i in range(graph.n)
            if i != a3
            and edge_kind(cur, i, head[i]) in (FORWARD, INWARD)
            and label[head[i]] == label[a3]
        ]
        if not candidates:
            raise InvariantViolation(f"no forward/inward edge into the favourite group of agent {a3}")
        a1 = min(candidates)
        a2 = head[a1]
        swap = Swap(
            a1,
            a2,
            a3,
            a4,
            (edge_cost(instance, cur, a1, a2), edge_cost(instance, cur, a3, a4)),
            (edge_cost(instance, cur, a1, a4), edge_cost(instance, cur, a3, a2)),
        )
        if trace is not None:
            trace.swaps.append(swap)
        head[a1], head[a3] = a4, a2
        if any(edge_kind(cur, i, head[i]) == BACKWARD for i in (a1, a3)):
            raise InvariantViolation(f"swap {swap} introduced a backward edge")
    raise InvariantViolation(f"forward edges remain after {graph.n} iterations")


def check_edge_bound(instance: Instance, graph: PermutationGraph) -> list[tuple[int, int]]:
    """Edges with d(a_i, M*(a_j)) > d(a_i, M*(a_i)) + 2 d(a_j, M*(a_j))."""
    if any(k in (FORWARD, BACKWARD) for k in edge_kinds(graph)):
        raise DomainError("edge bound needs a graph without forward or backward edges")
    bad = []
    for i, j in graph.edges():
        lhs = edge_cost(instance, graph, i, j)
        rhs = instance.distance(i, graph.opt[i]) + 2 * instance.distance(j, graph.opt[j])
        if lhs > rhs:
            bad.append((i, j))
    return bad


def inward_right_ok(graph: PermutationGraph) -> bool:
    """Inward edges leaving A_out^r end in the rightmost favourite group of A_in."""
    groups = [x for x in graph.label if isinstance(x, int)]
    if not groups:
        return True
    rightmost = max(groups)
    return all(
        graph.label[j] == rightmost
        for i, j in graph.edges()
        if graph.label[i] == OUT_RIGHT and isinstance(graph.label[j], int)
    )


def to_dot(graph: PermutationGraph, name: str = "P_M") -> str:
    lines = [f"digraph {name} {{"]
    for a, lab in enumerate(graph.label):
        group = f"A{lab}" if isinstance(lab, int) else ("A_out_l" if lab == OUT_LEFT else "A_out_r")
        lines.append(f'  a{a + 1} [label="a{a + 1}\\n{group}"];')
    for (i, j), kind in zip(graph.edges(), edge_kinds(graph)):
        lines.append(f'  a{i + 1} -> a{j + 1} [label="{kind}"];')
    lines.append("}")
    return "\n".join(lines)
