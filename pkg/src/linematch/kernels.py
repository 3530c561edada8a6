"""Integer/boolean inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature. The numba path
is used unless ``LINEMATCH_DISABLE_NUMBA`` is set to a truthy value or numba
cannot be imported; ``BACKEND`` reports which one is active.

Kernels only see int64 / bool arrays. Callers scale rational coordinates to
integers first (see :func:`linematch.optimal.integer_distance_matrix`).
"""
from __future__ import annotations

import itertools
import os
from functools import lru_cache

import numpy as np

_DISABLED = os.environ.get("LINEMATCH_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by LINEMATCH_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# brute-force k-centrum minimisation over all permutations


@njit(cache=True)
def _kcentrum_brute_force_jit(dist):
    n = dist.shape[0]
    perm = np.arange(n)
    best = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    best_perm = np.zeros((n, n), dtype=np.int64)
    srt = np.empty(n, dtype=np.int64)
    while True:
        # insertion sort, descending; no allocation per permutation
        for a in range(n):
            v = dist[a, perm[a]]
            i = a
            while i > 0 and srt[i - 1] < v:
                srt[i] = srt[i - 1]
                i -= 1
            srt[i] = v
        acc = 0
        for k in range(n):
            acc += srt[k]
            if acc < best[k]:
                best[k] = acc
                for a in range(n):
                    best_perm[k, a] = perm[a]
        # next permutation in lexicographic order
        i = n - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            break
        j = n - 1
        while perm[j] <= perm[i]:
            j -= 1
        perm[i], perm[j] = perm[j], perm[i]
        lo = i + 1
        hi = n - 1
        while lo < hi:
            perm[lo], perm[hi] = perm[hi], perm[lo]
            lo += 1
            hi -= 1
    return best, best_perm


@lru_cache(maxsize=16)
def _all_permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


def _kcentrum_brute_force_np(dist):
    n = dist.shape[0]
    perms = _all_permutations(n)
    costs = dist[np.arange(n), perms]
    costs = -np.sort(-costs, axis=1)
    prefix = np.cumsum(costs, axis=1)
    idx = np.argmin(prefix, axis=0)  # first minimiser = lexicographically smallest
    return prefix[idx, np.arange(n)], perms[idx]


def kcentrum_brute_force(dist: np.ndarray, backend: str | None = None):
    """Minimum SC_k over all n! assignments, for every k at once.

    ``dist[a, g]`` is an integer distance. Returns ``(best, best_perm)`` where
    ``best[k-1]`` is the minimum SC_k and ``best_perm[k-1]`` the
    lexicographically smallest assignment attaining it.
    """
    dist = np.ascontiguousarray(dist, dtype=np.int64)
    if _pick(backend) == "numba":
        return _kcentrum_brute_force_jit(dist)
    return _kcentrum_brute_force_np(dist)


# --------------------------------------------------------------------------
# boolean order propagation


@njit(cache=True)
def _closure_jit(rel):
    m = rel.shape[0]
    out = rel.copy()
    for k in range(m):
        for i in range(m):
            if out[i, k]:
                for j in range(m):
                    if out[k, j]:
                        out[i, j] = True
    return out


def _closure_np(rel):
    out = rel.copy()
    for k in range(out.shape[0]):
        out |= out[:, k : k + 1] & out[k : k + 1, :]
    return out


def transitive_closure(rel: np.ndarray, backend: str | None = None) -> np.ndarray:
    rel = np.ascontiguousarray(rel, dtype=np.bool_)
    if _pick(backend) == "numba":
        return _closure_jit(rel)
    return _closure_np(rel)


@njit(cache=True)
def _disagreement_jit(agent_before, pref):
    n = pref.shape[0]
    m = pref.shape[1]
    out = np.zeros((m, m), dtype=np.bool_)
    for a in range(n):
        for b in range(n):
            if not agent_before[a, b]:
                continue
            for g in range(m):
                for h in range(m):
                    if pref[a, g, h] and pref[b, h, g]:
                        out[g, h] = True
    return out


def _disagreement_np(agent_before, pref):
    p = pref.astype(np.int64)
    hits = np.einsum("ab,agh,bhg->gh", agent_before.astype(np.int64), p, p)
    return hits > 0


def disagreement_rule(agent_before: np.ndarray, pref: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Left agent prefers g, right agent prefers h  =>  g is left of h.

    ``agent_before[a, b]`` says agent a is strictly left of agent b;
    ``pref[a, g, h]`` says agent a ranks g above h.
    """
    agent_before = np.ascontiguousarray(agent_before, dtype=np.bool_)
    pref = np.ascontiguousarray(pref, dtype=np.bool_)
    if _pick(backend) == "numba":
        return _disagreement_jit(agent_before, pref)
    return _disagreement_np(agent_before, pref)


@njit(cache=True)
def _not_between_jit(pos, skip):
    na, m = pos.shape
    out = np.zeros((m, m, m), dtype=np.bool_)
    for a in range(na):
        for y in range(m):
            for x in range(m):
                if x == y or skip[x, y] or pos[a, y] < pos[a, x]:
                    continue
                for z in range(m):
                    if z == x or z == y or skip[z, y]:
                        continue
                    if pos[a, y] > pos[a, z]:
                        out[x, y, z] = True
    return out


def _not_between_np(pos, skip):
    later = pos[:, None, :] > pos[:, :, None]  # later[a, x, y]: y ranked after x
    later &= ~skip[None, :, :]
    both = later[:, :, :, None] & np.swapaxes(later, 1, 2)[:, None, :, :]
    out = both.any(axis=0)  # out[x, y, z]
    m = pos.shape[1]
    eye = np.eye(m, dtype=np.bool_)
    out &= ~eye[:, None, :]
    return out


def not_between_table(pos: np.ndarray, skip: np.ndarray, backend: str | None = None) -> np.ndarray:
    """``out[x, y, z]``: some agent ranks y below both x and z.

    On a line that means y is not strictly between x and z. Pairs with
    ``skip[x, y]`` set are ignored as (x, y) evidence; callers mark pairs
    that may be coincident, where the inference breaks.
    """
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    skip = np.ascontiguousarray(skip, dtype=np.bool_)
    if _pick(backend) == "numba":
        return _not_between_jit(pos, skip)
    return _not_between_np(pos, skip)


@njit(cache=True)
def _betweenness_jit(rel, nb):
    m = rel.shape[0]
    out = np.zeros((m, m), dtype=np.bool_)
    for x in range(m):
        for z in range(m):
            if not rel[x, z]:
                continue
            for y in range(m):
                if not nb[x, y, z]:
                    continue
                if rel[y, z]:
                    out[y, x] = True
                if rel[x, y]:
                    out[z, y] = True
    return out


def _betweenness_np(rel, nb):
    xz = rel[:, None, :]
    left = (nb & xz & rel[None, :, :]).any(axis=2)  # [x, y]: y < z and x < z
    right = (nb & xz & rel[:, :, None]).any(axis=0)  # [y, z]: x < y and x < z
    return left.T | right.T


def betweenness_rule(rel: np.ndarray, nb: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Place y outside (x, z) using the order already known."""
    rel = np.ascontiguousarray(rel, dtype=np.bool_)
    nb = np.ascontiguousarray(nb, dtype=np.bool_)
    if _pick(backend) == "numba":
        return _betweenness_jit(rel, nb)
    return _betweenness_np(rel, nb)


def _pick(backend: str | None) -> str:
    if backend is None:
        return BACKEND
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but unavailable")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend
