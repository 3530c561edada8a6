"""Exact strict-feasibility test for homogeneous linear systems."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def _simplex_max(tableau: list[list[Fraction]], basis: list[int], n_cols: int, stop_above=None) -> None:
    """Maximise in place; last row is the objective row (reduced costs), last column the rhs.

    Bland's rule, so it cannot cycle. The starting basis must be feasible.
    With ``stop_above`` set, return as soon as the objective exceeds it.
    """
    while True:
        obj = tableau[-1]  # pivots replace row objects, so re-read every round
        if stop_above is not None and obj[-1] > stop_above:
            return
        enter = next((j for j in range(n_cols) if obj[j] < 0), None)
        if enter is None:
            return
        leave, best = None, None
        for i, row in enumerate(tableau[:-1]):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:  # unbounded; cannot happen with the normalisation row
            raise ArithmeticError("unbounded LP")
        pivot_row = tableau[leave]
        p = pivot_row[enter]
        if p != 1:
            tableau[leave] = pivot_row = [v / p for v in pivot_row]
        for i, row in enumerate(tableau):
            if i != leave and row[enter] != 0:
                f = row[enter]
                tableau[i] = [v - f * w for v, w in zip(row, pivot_row)]
        basis[leave] = enter


def strictly_feasible(rows: Sequence[Sequence[int]], dim: int) -> bool:
    """Is there d in R^dim with d > 0 and r . d > 0 for every row r?

    Solves  max t  s.t.  t <= d_i,  t <= r . d,  sum(d) <= 1,  d, t >= 0
    exactly; the system is strictly feasible iff the optimum is positive.
    """
    if dim == 0:
        return not rows
    rows = _prune(rows)
    if all(sum(r) > 0 for r in rows):  # d = (1, ..., 1) already works
        return True
    # columns: d_0..d_{dim-1}, t, then one slack per constraint
    cons: list[list[Fraction]] = []
    for i in range(dim):
        c = [Fraction(0)] * (dim + 1)
        c[i] = Fraction(-1)
        c[dim] = Fraction(1)
        cons.append(c)
    for r in rows:
        cons.append([Fraction(-v) for v in r] + [Fraction(1)])
    cons.append([Fraction(1)] * dim + [Fraction(0)])
    rhs = [Fraction(0)] * (len(cons) - 1) + [Fraction(1)]

    n_struct = dim + 1
    n_slack = len(cons)
    n_cols = n_struct + n_slack
    tableau = []
    for i, (c, b) in enumerate(zip(cons, rhs)):
        slack = [Fraction(0)] * n_slack
        slack[i] = Fraction(1)
        tableau.append(c + slack + [b])
    objective = [Fraction(0)] * (n_cols + 1)
    objective[dim] = Fraction(-1)
    tableau.append(objective)
    basis = [n_struct + i for i in range(n_slack)]
    _simplex_max(tableau, basis, n_cols, stop_above=Fraction(0))
    return tableau[-1][-1] > 0


def _prune(rows: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Drop duplicates and rows implied by another: r >= s entrywise and d > 0 give r.d >= s.d."""
    uniq = sorted({tuple(r) for r in rows}, key=sum)
    keep: list[tuple[int, ...]] = []
    for r in uniq:
        if not any(all(a >= b for a, b in zip(r, s)) for s in keep):
            keep.append(r)
    return keep
