"""Exact integer linear algebra: Smith normal form and determinants.

Everything here runs on arbitrary-precision Python ints.  Inputs are small
dense matrices (cycle bases, reduced Laplacians), so the classic quadratic
pivoting algorithms are more than fast enough and there is no floating-point
noise to worry about.
"""
from __future__ import annotations

import numpy as np


def _as_int_rows(mat) -> list[list[int]]:
    rows = [[int(x) for x in row] for row in np.asarray(mat)]
    if not rows or not rows[0]:
        raise ValueError("empty matrix")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix")
    return rows


def bareiss_determinant(mat) -> int:
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    a = _as_int_rows(mat)
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant needs a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_normal_form(mat):
    """Smith normal form with transforms.

    Returns ``(divisors, U, V, S)`` where ``U @ mat @ V == S``, U and V are
    unimodular, S is diagonal with the divisibility chain d1 | d2 | ..., and
    ``divisors`` lists the nonzero diagonal entries.
    """
    A = _as_int_rows(mat)
    m, n = len(A), len(A[0])
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, q):
        # row_dst -= q * row_src
        Ad, As = A[dst], A[src]
        for j in range(n):
            Ad[j] -= q * As[j]
        Ud, Us = U[dst], U[src]
        for j in range(m):
            Ud[j] -= q * Us[j]

    def add_col(src, dst, q):
        for r in A:
            r[dst] -= q * r[src]
        for r in V:
            r[dst] -= q * r[src]

    t = 0
    while t < min(m, n):
        # smallest nonzero pivot in the trailing submatrix
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (pivot is None or abs(A[i][j]) < abs(A[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        if pivot[0] != t:
            swap_rows(pivot[0], t)
        if pivot[1] != t:
            swap_cols(pivot[1], t)

        while True:
            changed = False
            for i in range(m):
                if i != t and A[i][t] != 0:
                    q = A[i][t] // A[t][t]
                    add_row(t, i, q)
                    if A[i][t] != 0:
                        swap_rows(i, t)
                        changed = True
            for j in range(n):
                if j != t and A[t][j] != 0:
                    q = A[t][j] // A[t][t]
                    add_col(t, j, q)
                    if A[t][j] != 0:
                        swap_cols(j, t)
                        changed = True
            if not changed:
                col_clear = all(A[i][t] == 0 for i in range(m) if i != t)
                row_clear = all(A[t][j] == 0 for j in range(n) if j != t)
                if col_clear and row_clear:
                    break

        # divisibility: the pivot must divide the remaining submatrix
        fixed = True
        for i in range(t + 1, m):
            if fixed:
                for j in range(t + 1, n):
                    if A[i][j] % A[t][t] != 0:
                        add_row(i, t, -1)
                        fixed = False
                        break
        if fixed:
            if A[t][t] < 0:
                for j in range(n):
                    A[t][j] = -A[t][j]
                for j in range(m):
                    U[t][j] = -U[t][j]
            t += 1

    divisors = [A[i][i] for i in range(min(m, n)) if A[i][i] != 0]
    to_np = lambda rows: np.array(rows, dtype=object)
    return divisors, to_np(U), to_np(V), to_np(A)


def solve_integer(mat, rhs):
    """Integer solution x of ``mat @ x == rhs`` or None if there is none.

    ``mat`` is c-by-n with full row rank over the rationals; existence of an
    integer solution is decided exactly through the Smith normal form.
    """
    divisors, U, V, S = smith_normal_form(mat)
    m = len(S)
    n = len(S[0])
    rhs = [int(x) for x in np.asarray(rhs)]
    if len(rhs) != m:
        raise ValueError("rhs length mismatch")
    y = [sum(int(U[i][j]) * rhs[j] for j in range(m)) for i in range(m)]
    x_hat = [0] * n
    for i in range(m):
        d = int(S[i][i]) if i < min(m, n) else 0
        if d == 0:
            if y[i] != 0:
                return None
            continue
        if y[i] % d != 0:
            return None
        x_hat[i] = y[i] // d
    x = [sum(int(V[i][j]) * x_hat[j] for j in range(n)) for i in range(n)]
    return np.array(x, dtype=int)
