"""Exact feasibility of ``A x = b, x >= 0`` over the rationals.

Phase I of the simplex method on a dense :class:`~fractions.Fraction`
tableau with Bland's rule, so it terminates on degenerate problems. Sizes
here are tiny (tens of rows and columns); clarity beats speed.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def feasible_point(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Return some ``x >= 0`` with ``A x = b``, or ``None`` if none exists."""
    m = len(A)
    n = len(A[0]) if m else 0
    rows = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]]
        rhs = Fraction(b[i])
        if len(row) != n:
            raise ValueError("ragged constraint matrix")
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        rows.append(row + [Fraction(0)] * m + [rhs])
        rows[i][n + i] = Fraction(1)
    if m == 0:
        return [Fraction(0)] * n

    width = n + m
    basis = [n + i for i in range(m)]
    # reduced costs of  min sum(artificials)
    cost = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(width + 1):
            if j < n or j == width:
                cost[j] -= rows[i][j]

    while True:
        entering = next((j for j in range(width) if cost[j] < 0), None)
        if entering is None:
            break
        leaving = None
        best = None
        for i in range(m):
            a = rows[i][entering]
            if a > 0:
                ratio = rows[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leaving]):
                    best = ratio
                    leaving = i
        if leaving is None:
            # cannot happen in phase I: the objective is bounded below by 0
            raise ArithmeticError("unbounded phase I")
        _pivot(rows, cost, leaving, entering, width)
        basis[leaving] = entering

    if cost[width] != 0:
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = rows[i][width]
    return x


def _pivot(rows, cost, r, c, width):
    piv = rows[r][c]
    rows[r] = [v / piv for v in rows[r]]
    pr = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[c] != 0:
            f = row[c]
            rows[i] = [a - f * b for a, b in zip(row, pr)]
    if cost[c] != 0:
        f = cost[c]
        for j in range(width + 1):
            cost[j] -= f * pr[j]
