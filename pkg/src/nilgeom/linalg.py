"""Exact rational linear algebra over fractions.Fraction.

Small dense routines (rref, nullspace, solve) used by the quotient
constructions.  Matrices are lists of lists of Fraction; rows are copied on
entry so callers keep their data.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]

__all__ = ["rref", "rank", "nullspace", "solve", "row_space_basis", "identity"]


def _copy(m: Sequence[Sequence[Fraction]]) -> Matrix:
    return [[Fraction(x) for x in row] for row in m]


def identity(n: int) -> Matrix:
    return [[Fraction(1) if i == j else Fraction(0) for j in range(n)]
            for i in range(n)]


def rref(m: Sequence[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    a = _copy(m)
    if not a:
        return a, []
    rows, cols = len(a), len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot_row = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        inv = Fraction(1) / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(m)[1])


def nullspace(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Basis of the right null space {v : m v = 0}."""
    if not m:
        return []
    cols = len(m[0])
    a, pivots = rref(m)
    pivot_set = set(pivots)
    basis = []
    for free in range(cols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * cols
        v[free] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -a[r][free]
        basis.append(v)
    return basis


def solve(m: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """One solution of m x = rhs, or None if inconsistent."""
    if not m:
        return [] if all(x == 0 for x in rhs) else None
    aug = [list(row) + [Fraction(r)] for row, r in zip(m, rhs)]
    a, pivots = rref(aug)
    cols = len(m[0])
    if cols in pivots:
        return None  # pivot in the rhs column: inconsistent
    x = [Fraction(0)] * cols
    for r, p in enumerate(pivots):
        x[p] = a[r][cols]
    return x


def row_space_basis(m: Sequence[Sequence[Fraction]]) -> Matrix:
    a, pivots = rref(m)
    return [a[i] for i in range(len(pivots))]
