"""Sweeps: run algorithms over instance families and report exact ratios.

Each instance is evaluated on its own (optionally in a process pool) and
rows are assembled in instance order, so a report does not depend on
worker scheduling. Any failed invariant flag produces a JSON reproducer.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import instances as inst_mod
from . import permgraph
from .core import DomainError, Instance, Matching, OrdinalProfile, cost_profile, derive_profile, format_rational
from .optimal import greedy_matching, greedy_optimal
from .ordermatch import run_order_match, worst_anchor_pair

log = logging.getLogger(__name__)

ALGORITHMS = ("ordermatch", "ordermatch-naive", "serial-dictatorship", "optimal")
FAMILIES = ("random", "clustered", "lb-k1", "lb-kgeq2", "tiebreak-k1", "tiebreak-kgeq2")
DISTORTION_BOUND = 3

CSV_HEADER = (
    "instance_id",
    "family",
    "n",
    "k",
    "algorithm",
    "alg_cost",
    "opt_cost",
    "ratio",
    "ratio_decimal",
    "no_backward_edges",
    "edge_bound_ok",
    "pi_g_ok",
)


def serial_dictatorship(profile: OrdinalProfile, order: Sequence[int] | None = None) -> Matching:
    """Agents in ``order`` each take their favourite remaining item."""
    order = list(range(profile.n)) if order is None else list(order)
    if sorted(order) != list(range(profile.n)):
        raise DomainError("order must be a permutation of the agents")
    taken = set()
    item_of = [0] * profile.n
    for a in order:
        g = next(g for g in profile.rankings[a] if g not in taken)
        taken.add(g)
        item_of[a] = g
    return Matching(item_of)


@dataclass(frozen=True)
class SweepConfig:
    families: tuple[str, ...] = ("random",)
    sizes: tuple[int, ...] = tuple(range(2, 9))
    ks: tuple[int, ...] | None = None  # None means every k in [n]
    algorithms: tuple[str, ...] = ("ordermatch",)
    repetitions: int = 10
    seed: int = 0
    distinct: bool = False
    eps: Fraction = inst_mod.DEFAULT_EPS
    csv_path: str | None = None
    json_path: str | None = None
    reproducer_dir: str = "reproducers"
    workers: int = 1

    def __post_init__(self):
        for f in self.families:
            if f not in FAMILIES:
                raise DomainError(f"unknown family {f!r}; choose from {FAMILIES}")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise DomainError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
        if self.repetitions < 1 or self.workers < 1:
            raise DomainError("repetitions and workers must be positive")


def _int_list(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def _words(text: str) -> tuple[str, ...]:
    return tuple(w.strip() for w in text.split(",") if w.strip())


_PARSERS: dict[str, tuple[str, Callable]] = {
    "families": ("families", _words),
    "sizes": ("sizes", _int_list),
    "k": ("ks", lambda v: None if v.strip() == "all" else _int_list(v)),
    "algorithms": ("algorithms", _words),
    "repetitions": ("repetitions", int),
    "seed": ("seed", int),
    "distinct": ("distinct", lambda v: v.strip().lower() in ("1", "true", "yes", "on")),
    "eps": ("eps", lambda v: Fraction(v.strip())),
    "csv": ("csv_path", str.strip),
    "json": ("json_path", str.strip),
    "reproducers": ("reproducer_dir", str.strip),
    "workers": ("workers", int),
}


def parse_config(text: str, source: str = "<config>") -> SweepConfig:
    """``key = value`` lines; ``#`` starts a comment. Lists are comma separated, ``a..b`` is a range."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{source}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise DomainError(f"{source}:{lineno}: unknown key {key!r}")
        name, conv = _PARSERS[key]
        try:
            kwargs[name] = conv(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return SweepConfig(**kwargs)


def load_config(path) -> SweepConfig:
    p = Path(path)
    return parse_config(p.read_text(), str(p))


@dataclass(frozen=True)
class ReportRow:
    instance_id: str
    family: str
    n: int
    k: int
    algorithm: str
    alg_cost: Fraction
    opt_cost: Fraction
    ratio: Fraction | None  # None when the optimum is 0 but the algorithm is not
    no_backward_edges: bool | None = None
    edge_bound_ok: bool | None = None
    pi_g_ok: bool | None = None

    @property
    def ok(self) -> bool:
        flags = (self.no_backward_edges, self.edge_bound_ok, self.pi_g_ok)
        if any(f is False for f in flags):
            return False
        if self.algorithm == "ordermatch":
            return self.ratio is not None and self.ratio <= DISTORTION_BOUND
        if self.algorithm == "optimal":
            return self.ratio == 1
        return True

    def as_record(self) -> dict:
        ratio = "inf" if self.ratio is None else format_rational(self.ratio)
        dec = "inf" if self.ratio is None else f"{float(self.ratio):.6f}"

        def flag(v):
            return "" if v is None else str(v).lower()

        return {
            "instance_id": self.instance_id,
            "family": self.family,
            "n": self.n,
            "k": self.k,
            "algorithm": self.algorithm,
            "alg_cost": format_rational(self.alg_cost),
            "opt_cost": format_rational(self.opt_cost),
            "ratio": ratio,
            "ratio_decimal": dec,
            "no_backward_edges": flag(self.no_backward_edges),
            "edge_bound_ok": flag(self.edge_bound_ok),
            "pi_g_ok": flag(self.pi_g_ok),
        }


@dataclass
class SweepReport:
    rows: list[ReportRow]
    reproducers: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def max_ratios(self) -> dict[tuple[str, str, int], Fraction | None]:
        out: dict[tuple[str, str, int], Fraction | None] = {}
        for r in self.rows:
            key = (r.family, r.algorithm, r.k)
            cur = out.get(key, Fraction(0))
            if cur is None or r.ratio is None:
                out[key] = None
            else:
                out[key] = max(cur, r.ratio)
        return out


# --------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Task:
    index: int
    instance_id: str
    family: str
    instance: Instance


def family_instances(config: SweepConfig) -> list[Task]:
    tasks: list[Task] = []
    eps = config.eps

    def add(family, label, instance):
        tasks.append(Task(len(tasks), f"{family}-{label}", family, instance))

    for family in config.families:
        for n in config.sizes:
            if family in ("random", "clustered"):
                spec = inst_mod.GenSpec(
                    n, config.seed, "uniform" if family == "random" else "clustered", distinct=config.distinct
                )
                for r in range(config.repetitions):
                    add(family, f"n{n}-r{r}", inst_mod.gen_random(spec, index=n * 1_000_003 + r))
            elif family.startswith("lb-") and n >= 2:
                mode = family[3:]
                profile = inst_mod.common_ranking_profile(n)
                m = run_order_match(profile).matching
                instance, _ = inst_mod.adversarial_ratio(profile, m, mode, eps)
                add(family, f"n{n}", instance)
            elif family.startswith("tiebreak-"):
                mode = family[9:]
                if n >= (4 if mode == inst_mod.K1 else 3):
                    add(family, f"n{n}", inst_mod.gen_tiebreak_pathology(n, mode, eps))
    return tasks


# --------------------------------------------------------------------------
# evaluation


def _pi_g_ok(instance: Instance, order: Sequence[int]) -> bool:
    xs = [instance.items[g] for g in order]
    return all(a <= b for a, b in zip(xs, xs[1:])) or all(a >= b for a, b in zip(xs, xs[1:]))


def analyse_ordermatch(instance: Instance, result=None) -> dict[str, bool]:
    """Invariant flags for one OrderMatch run on a ground-truth instance."""
    profile = derive_profile(instance)
    result = result or run_order_match(profile)
    graph = permgraph.build_graph(instance, result.matching, result.partition)
    no_back = permgraph.BACKWARD not in permgraph.edge_kinds(graph)
    edge_ok = False
    if no_back:
        try:
            out = permgraph.remove_forward_edges(graph, instance)
            edge_ok = not permgraph.check_edge_bound(instance, out)
        except Exception:  # surfaced as a failed flag plus a reproducer
            log.exception("forward-edge removal failed")
    return {
        "no_backward_edges": no_back,
        "edge_bound_ok": edge_ok,
        "pi_g_ok": _pi_g_ok(instance, result.order.items),
    }


def _matching_for(algorithm: str, profile: OrdinalProfile, instance: Instance):
    if algorithm == "ordermatch":
        return run_order_match(profile)
    if algorithm == "ordermatch-naive":
        return run_order_match(profile, anchors=worst_anchor_pair(profile))
    if algorithm == "serial-dictatorship":
        return serial_dictatorship(profile)
    if algorithm == "optimal":
        return greedy_matching(instance)
    raise DomainError(f"unknown algorithm {algorithm!r}")


def evaluate_instance(task: Task, algorithms: Sequence[str], ks: Sequence[int] | None) -> list[ReportRow]:
    instance = task.instance
    profile = derive_profile(instance)
    opt = greedy_optimal(instance).cost_per_k
    chosen = [k for k in (ks or range(1, instance.n + 1)) if 1 <= k <= instance.n]
    rows = []
    for algo in algorithms:
        out = _matching_for(algo, profile, instance)
        flags: dict[str, bool | None] = {}
        if algo == "ordermatch":
            flags = analyse_ordermatch(instance, out)
        matching = out if isinstance(out, Matching) else out.matching
        costs = cost_profile(instance, matching)
        for k in chosen:
            a, o = costs[k - 1], opt[k - 1]
            ratio = a / o if o else (Fraction(1) if a == 0 else None)
            rows.append(ReportRow(task.instance_id, task.family, instance.n, k, algo, a, o, ratio, **flags))
    return rows


def _evaluate(args):
    return evaluate_instance(*args)


def minimise_reproducer(instance: Instance, fails: Callable[[Instance], bool]) -> Instance:
    """Drop agent/item pairs one at a time while the instance keeps failing."""
    cur = instance
    changed = True
    while changed and cur.n > 1:
        changed = False
        for a in range(cur.n):
            for g in range(cur.n):
                agents = [x for i, x in enumerate(cur.agents) if i != a]
                items = [x for j, x in enumerate(cur.items) if j != g]
                cand = Instance(agents, items)
                try:
                    bad = fails(cand)
                except Exception:
                    bad = True
                if bad:
                    cur, changed = cand, True
                    break
            if changed:
                break
    return cur


def _dump_reproducer(config: SweepConfig, task: Task, rows: list[ReportRow]) -> str:
    algorithms = sorted({r.algorithm for r in rows if not r.ok})
    ks = config.ks

    def fails(inst: Instance) -> bool:
        sub = Task(task.index, task.instance_id, task.family, inst)
        return not all(r.ok for r in evaluate_instance(sub, algorithms, ks))

    small = minimise_reproducer(task.instance, fails)
    out_dir = Path(config.reproducer_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{task.instance_id}.json"
    record = {
        "instance_id": task.instance_id,
        "family": task.family,
        "algorithms": algorithms,
        "instance": inst_mod.to_json(task.instance),
        "minimised": inst_mod.to_json(small),
        "failed_rows": [r.as_record() for r in rows if not r.ok],
        "config": config_record(config),
    }
    path.write_text(json.dumps(record, indent=1) + "\n")
    return str(path)


def config_record(config: SweepConfig) -> dict:
    rec = asdict(config)
    rec["eps"] = format_rational(config.eps)
    return rec


def eval_sweep(config: SweepConfig) -> SweepReport:
    tasks = family_instances(config)
    jobs = [(t, config.algorithms, config.ks) for t in tasks]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_task = list(pool.map(_evaluate, jobs, chunksize=16))
    else:
        per_task = [_evaluate(j) for j in jobs]
    report = SweepReport([r for rows in per_task for r in rows])
    for task, rows in zip(tasks, per_task):
        if not all(r.ok for r in rows):
            report.reproducers.append(_dump_reproducer(config, task, rows))
    if config.csv_path:
        write_csv(report.rows, config.csv_path)
    if config.json_path:
        write_json(report, config.json_path, config)
    return report


def write_csv(rows: Iterable[ReportRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        w.writeheader()
        for r in rows:
            w.writerow(r.as_record())


def write_json(report: SweepReport, path, config: SweepConfig | None = None) -> None:
    data = {
        "rows": [r.as_record() for r in report.rows],
        "max_ratio": [
            {
                "family": f,
                "algorithm": a,
                "k": k,
                "ratio": "inf" if v is None else format_rational(v),
            }
            for (f, a, k), v in sorted(report.max_ratios().items())
        ],
        "ok": report.ok,
        "reproducers": report.reproducers,
    }
    if config is not None:
        data["config"] = config_record(config)
    Path(path).write_text(json.dumps(data, indent=1) + "\n")
