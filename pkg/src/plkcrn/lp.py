"""Exact linear programming over the rationals.

Two-phase dense-tableau simplex with Bland's rule, so it terminates on
degenerate problems and every answer is an exact rational vertex. Problem
sizes in this toolkit are tiny (tens of variables), which is why a dense
tableau is fine.

The interface mirrors :func:`scipy.optimize.linprog`::

    minimize c @ x  subject to  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  lo <= x <= hi
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .linalg import Vector, to_fraction, vec

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: Vector | None = None
    fun: Fraction | None = None

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    p = tab[row][col]
    if p != 1:
        tab[row] = [x / p for x in tab[row]]
    prow = tab[row]
    for i, r in enumerate(tab):
        if i != row and r[col] != 0:
            f = r[col]
            tab[i] = [a - f * b for a, b in zip(r, prow)]
    basis[row] = col


def _run(tab, basis, cost: Sequence[Fraction], allowed: int) -> str:
    """Minimize cost over the first ``allowed`` columns; tab is modified in place."""
    while True:
        entering = None
        for j in range(allowed):
            if j in basis:
                continue
            rc = cost[j] - sum((cost[basis[i]] * tab[i][j] for i in range(len(tab))), Fraction(0))
            if rc < 0:
                entering = j
                break
        if entering is None:
            return OPTIMAL
        best = None
        for i, r in enumerate(tab):
            a = r[entering]
            if a > 0:
                ratio = r[-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return UNBOUNDED
        _pivot(tab, basis, best[1], entering)


def _standard_form(c, A, b) -> LPResult:
    """min c.x  s.t.  A x = b, x >= 0."""
    n = len(c)
    m = len(A)
    rows = []
    for r, rhs in zip(A, b):
        if rhs < 0:
            r, rhs = [-x for x in r], -rhs
        rows.append(list(r) + [rhs])
    # phase 1: one artificial per row
    tab = [r[:n] + [Fraction(int(i == k)) for k in range(m)] + [r[n]] for i, r in enumerate(rows)]
    basis = [n + i for i in range(m)]
    cost1 = [Fraction(0)] * n + [Fraction(1)] * m
    _run(tab, basis, cost1, n + m)
    if sum((tab[i][-1] for i in range(m) if basis[i] >= n), Fraction(0)) != 0:
        return LPResult(INFEASIBLE)
    # drive zero-level artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tab):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0 and j not in basis), None)
            if col is None:
                del tab[i]
                del basis[i]
                continue
            _pivot(tab, basis, i, col)
        i += 1
    tab = [r[:n] + [r[-1]] for r in tab]
    status = _run(tab, basis, list(c), n)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = tab[i][-1]
    return LPResult(OPTIMAL, tuple(x), sum((ci * xi for ci, xi in zip(c, x)), Fraction(0)))


def linprog(
    c: Sequence,
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
    bounds: Sequence[tuple] | tuple | None = (0, None),
) -> LPResult:
    """Solve a small LP exactly. ``bounds`` defaults to x >= 0 like scipy."""
    c = vec(c)
    n = len(c)
    A_ub = [vec(r) for r in (A_ub or [])]
    b_ub = vec(b_ub or [])
    A_eq = [vec(r) for r in (A_eq or [])]
    b_eq = vec(b_eq or [])
    if bounds is None:
        bounds = [(None, None)] * n
    elif isinstance(bounds, tuple) and len(bounds) == 2 and not isinstance(bounds[0], tuple):
        bounds = [bounds] * n
    bounds = [
        (None if lo is None else to_fraction(lo), None if hi is None else to_fraction(hi))
        for lo, hi in bounds
    ]

    # x_j = shift_j + sum_k M[j][k] * y_k with y >= 0
    shift = []
    cols: list[list[tuple[int, int]]] = []
    ny = 0
    extra_ub: list[tuple[int, Fraction]] = []
    for lo, hi in bounds:
        if lo is not None:
            shift.append(lo)
            cols.append([(ny, 1)])
            if hi is not None:
                extra_ub.append((ny, hi - lo))
            ny += 1
        elif hi is not None:
            shift.append(hi)
            cols.append([(ny, -1)])
            ny += 1
        else:
            shift.append(Fraction(0))
            cols.append([(ny, 1), (ny + 1, -1)])
            ny += 2

    def lift(row: Vector) -> tuple[list[Fraction], Fraction]:
        out = [Fraction(0)] * ny
        off = Fraction(0)
        for j, a in enumerate(row):
            if a == 0:
                continue
            off += a * shift[j]
            for k, s in cols[j]:
                out[k] += a * s
        return out, off

    n_slack = len(A_ub) + len(extra_ub)
    total = ny + n_slack
    A_std: list[list[Fraction]] = []
    b_std: list[Fraction] = []
    s = 0
    for row, rhs in zip(A_ub, b_ub):
        lr, off = lift(row)
        slack = [Fraction(0)] * n_slack
        slack[s] = Fraction(1)
        s += 1
        A_std.append(lr + slack)
        b_std.append(rhs - off)
    for k, cap in extra_ub:
        lr = [Fraction(0)] * ny
        lr[k] = Fraction(1)
        slack = [Fraction(0)] * n_slack
        slack[s] = Fraction(1)
        s += 1
        A_std.append(lr + slack)
        b_std.append(cap)
    for row, rhs in zip(A_eq, b_eq):
        lr, off = lift(row)
        A_std.append(lr + [Fraction(0)] * n_slack)
        b_std.append(rhs - off)

    c_std, c_off = lift(c)
    c_std = c_std + [Fraction(0)] * n_slack
    res = _standard_form(c_std, A_std, b_std) if A_std else _no_constraints(c_std, total)
    if not res.success:
        return res
    y = res.x
    x = tuple(shift[j] + sum((s_ * y[k] for k, s_ in cols[j]), Fraction(0)) for j in range(n))
    return LPResult(OPTIMAL, x, res.fun + c_off)


def _no_constraints(c, n) -> LPResult:
    if any(ci < 0 for ci in c):
        return LPResult(UNBOUNDED)
    return LPResult(OPTIMAL, tuple(Fraction(0) for _ in range(n)), Fraction(0))


def is_feasible(**kwargs) -> tuple[bool, Vector | None]:
    """Feasibility only (zero objective). Needs ``n`` or a constraint matrix to size c."""
    n = kwargs.pop("n")
    res = linprog([0] * n, **kwargs)
    return res.success, res.x
