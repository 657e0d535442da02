"""A small exact linear-programming solver: two-phase tableau simplex over Fractions with Bland's rule."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Row = Sequence[Fraction | int]


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: tuple[Fraction, ...] = ()
    value: Fraction | None = None


def _pivot(tab: list[list[Fraction]], basis: list[int], r: int, col: int) -> None:
    piv = tab[r][col]
    pr = tab[r] = [v / piv if v else v for v in tab[r]]
    nz = [j for j, v in enumerate(pr) if v]
    for i, row in enumerate(tab):
        f = row[col]
        if i != r and f:
            for j in nz:
                row[j] -= f * pr[j]
    basis[r] = col


def _run(tab: list[list[Fraction]], basis: list[int], obj: list[Fraction], allowed: int) -> bool:
    """Minimize obj.x over the tableau; columns >= allowed never enter. False if unbounded."""
    m = len(tab)
    width = len(tab[0]) if tab else len(obj)
    # reduced costs c_j - c_B B^-1 A_j, kept up to date by pivoting alongside the tableau
    z = list(obj) + [Fraction(0)] * (width - len(obj))
    for i in range(m):
        cb = z[basis[i]]
        if cb:
            row = tab[i]
            z = [a - cb * b if b else a for a, b in zip(z, row)]
    while True:
        entering = next((j for j in range(allowed) if z[j] < 0), -1)
        if entering < 0:
            return True
        best_r, best_ratio = -1, None
        for i in range(m):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and basis[i] < basis[best_r]):
                    best_r, best_ratio = i, ratio
        if best_r < 0:
            return False
        _pivot(tab, basis, best_r, entering)
        f = z[entering]
        pr = tab[best_r]
        z = [a - f * b if b else a for a, b in zip(z, pr)]


def solve_lp(cost: Row, a_ub: Sequence[Row] = (), b_ub: Row = (), a_eq: Sequence[Row] = (), b_eq: Row = (),
             maximize: bool = False) -> LPResult:
    """Optimize cost.x subject to a_ub x <= b_ub, a_eq x = b_eq, x >= 0, exactly."""
    nv = len(cost)
    cost = [Fraction(x) for x in cost]
    if maximize:
        cost = [-x for x in cost]
    rows: list[tuple[list[Fraction], Fraction, int]] = []  # (coeffs, rhs, slack sign or 0)
    for a, b in zip(a_ub, b_ub):
        rows.append(([Fraction(x) for x in a], Fraction(b), 1))
    for a, b in zip(a_eq, b_eq):
        rows.append(([Fraction(x) for x in a], Fraction(b), 0))
    m = len(rows)
    ns = sum(1 for r in rows if r[2])
    width = nv + ns + m  # structural, slack, artificial
    tab: list[list[Fraction]] = []
    si = 0
    for i, (a, b, s) in enumerate(rows):
        row = a + [Fraction(0)] * (ns + m) + [b]
        if s:
            row[nv + si] = Fraction(1)
            si += 1
        if b < 0:
            row = [-v for v in row]
        row[nv + ns + i] = Fraction(1)
        tab.append(row)
    basis = [nv + ns + i for i in range(m)]
    phase1 = [Fraction(0)] * (nv + ns) + [Fraction(1)] * m
    _run(tab, basis, phase1, width)
    if any(tab[i][-1] != 0 for i in range(m) if basis[i] >= nv + ns):
        return LPResult("infeasible")
    # drive zero-valued artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= nv + ns:
            for j in range(nv + ns):
                if tab[i][j] != 0 and j not in basis:
                    _pivot(tab, basis, i, j)
                    break
    obj = cost + [Fraction(0)] * (ns + m)
    if not _run(tab, basis, obj, nv + ns):
        return LPResult("unbounded")
    x = [Fraction(0)] * nv
    for i, b in enumerate(basis):
        if b < nv:
            x[b] = tab[i][-1]
    value = sum((c * v for c, v in zip(cost, x)), Fraction(0))
    return LPResult("optimal", tuple(x), -value if maximize else value)
