"""Time each kernel under numba and under the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20] [--sizes 6,7,8]

Both backends live in one process (kernels take ``backend=``), so this
needs numba importable and ``LINEMATCH_DISABLE_NUMBA`` unset. The first
numba call per shape is a warm-up and is not timed.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from linematch import kernels


def _dist(n, rng):
    agents = rng.integers(0, 1000, n)
    items = rng.integers(0, 1000, n)
    return np.abs(agents[:, None] - items[None, :]).astype(np.int64)


def _order_inputs(m, rng):
    xs = rng.permutation(m * 10)[:m]
    pos = np.argsort(np.argsort(np.abs(rng.integers(0, m * 10, (m, 1)) - xs[None, :]), axis=1), axis=1)
    pref = pos[:, :, None] < pos[:, None, :]
    agent_before = np.triu(np.ones((m, m), dtype=np.bool_), 1)
    skip = np.zeros((m, m), dtype=np.bool_)
    rel = np.zeros((m, m), dtype=np.bool_)
    order = np.argsort(xs)
    for i in range(m - 1):
        rel[order[i], order[i + 1]] = True
    return pos, pref, agent_before, skip, rel


def cases(sizes, rng):
    for n in sizes:
        d = _dist(n, rng)
        yield f"kcentrum_brute_force n={n}", lambda b, d=d: kernels.kcentrum_brute_force(d, backend=b)
    for m in (16, 48):
        pos, pref, ab, skip, rel = _order_inputs(m, rng)
        nb = kernels.not_between_table(pos, skip, backend="numpy")
        yield f"transitive_closure m={m}", lambda b, r=rel: kernels.transitive_closure(r, backend=b)
        yield f"disagreement_rule m={m}", lambda b, a=ab, p=pref: kernels.disagreement_rule(a, p, backend=b)
        yield f"not_between_table m={m}", lambda b, p=pos, s=skip: kernels.not_between_table(p, s, backend=b)
        yield f"betweenness_rule m={m}", lambda b, r=rel, t=nb: kernels.betweenness_rule(r, t, backend=b)


def _time(fn, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--sizes", default="6,7,8")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is unavailable or disabled; nothing to compare")
    rng = np.random.default_rng(args.seed)
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'kernel':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, fn in cases(sizes, rng):
        ref = fn("numpy")
        got = fn("numba")  # warm-up, also a parity check
        ref = ref if isinstance(ref, tuple) else (ref,)
        got = got if isinstance(got, tuple) else (got,)
        assert all(np.array_equal(x, y) for x, y in zip(ref, got)), name
        t_jit = _time(lambda: fn("numba"), args.repeat)
        t_np = _time(lambda: fn("numpy"), args.repeat)
        print(f"{name:32s} {t_jit * 1e3:10.3f} {t_np * 1e3:10.3f} {t_np / t_jit:8.1f}x")


if __name__ == "__main__":
    main()
