"""Exact rank, nullspace and inverse over Q.

Matrices are 2-d numpy object arrays (or nested lists) of ints/Fractions.
Zero-sized dimensions are allowed everywhere.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def as_matrix(a, shape=None) -> np.ndarray:
    if isinstance(a, np.ndarray) and a.dtype == object and a.ndim == 2:
        return a
    arr = np.array(a, dtype=object)
    if arr.ndim != 2:
        if shape is not None and arr.size == 0:
            return np.zeros(shape, dtype=object)
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def zeros(rows: int, cols: int) -> np.ndarray:
    z = np.empty((rows, cols), dtype=object)
    z.fill(0)
    return z


def identity(n: int) -> np.ndarray:
    z = zeros(n, n)
    for i in range(n):
        z[i, i] = 1
    return z


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return a.dot(b)


def rref(rows: list[list]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(v) for v in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        if pv != 1:
            m[r] = [v / pv for v in m[r]]
        row = m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], row)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(a) -> int:
    """Exact rank, by fraction-free (Bareiss) elimination when entries are integral."""
    a = as_matrix(a)
    nr, nc = a.shape
    if nr == 0 or nc == 0:
        return 0
    flat = a.ravel()
    if all(isinstance(v, int) or (isinstance(v, Fraction) and v.denominator == 1) for v in flat):
        return _bareiss_rank([[int(v) for v in row] for row in a.tolist()])
    return len(rref(a.tolist())[1])


def _bareiss_rank(m: list[list[int]]) -> int:
    return bareiss_pivots(m)[0]


def bareiss_pivots(m: list[list[int]]) -> tuple[int, list[int]]:
    """Rank and pivot columns of an integer matrix (rows are overwritten)."""
    nr, nc = len(m), len(m[0])
    r = 0
    prev = 1
    piv_cols = []
    for c in range(nc):
        p = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, nr):
            f = m[i][c]
            m[i] = [(piv * x - f * y) // prev for x, y in zip(m[i], m[r])]
        prev = piv
        piv_cols.append(c)
        r += 1
        if r == nr:
            break
    return r, piv_cols


def nullspace(a, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {v : a v = 0} as a list of vectors."""
    rows = as_matrix(a).tolist() if not isinstance(a, list) else a
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    red, piv = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def inverse(a) -> np.ndarray:
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    if n == 0:
        return zeros(0, 0)
    aug = [list(a[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("matrix is singular")
    out = np.array([row[n:] for row in red], dtype=object)
    return _normalize(out)


def _normalize(a: np.ndarray) -> np.ndarray:
    """Turn integral Fractions back into ints (keeps printing and JSON tidy)."""
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        if isinstance(v, Fraction) and v.denominator == 1:
            v = int(v)
        out[idx] = v
    return out


def unitriangular_inverse(m) -> np.ndarray:
    """Exact inverse of an upper unitriangular integer matrix by back substitution."""
    m = as_matrix(m)
    n = m.shape[0]
    inv = identity(n)
    for j in range(n):
        for i in range(j - 1, -1, -1):
            inv[i, j] = -sum(m[i, k] * inv[k, j] for k in range(i + 1, j + 1))
    return inv


def is_upper_unitriangular(m) -> bool:
    m = as_matrix(m)
    n = m.shape[0]
    if m.shape != (n, n):
        return False
    for i in range(n):
        if m[i, i] != 1 or any(m[i, j] != 0 for j in range(i)):
            return False
    return True


def independent_rows(m: list[list[int]]) -> list[int]:
    """Indices of a maximal linearly independent set of rows (rows are overwritten)."""
    nr, nc = len(m), len(m[0])
    order = list(range(nr))
    r = 0
    prev = 1
    for c in range(nc):
        p = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        order[r], order[p] = order[p], order[r]
        piv = m[r][c]
        for i in range(r + 1, nr):
            f = m[i][c]
            m[i] = [(piv * x - f * y) // prev for x, y in zip(m[i], m[r])]
        prev = piv
        r += 1
        if r == nr:
            break
    return order[:r]


def nullspace_int(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Integer basis of the rational nullspace of an integer matrix (fraction-free)."""
    m = [list(r) for r in rows if any(r)]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        prow = m[r]
        a = prow[c]
        for i in range(len(m)):
            if i != r and m[i][c]:
                b = m[i][c]
                row = [a * u - b * v for u, v in zip(m[i], prow)]
                g = 0
                for v in row:
                    if v:
                        g = math.gcd(g, v)
                if g > 1:
                    row = [v // g for v in row]
                m[i] = row
        pivots.append(c)
        r += 1
    m = m[:r]
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        L = 1
        for row, pc in zip(m, pivots):
            if row[f]:
                L = L * abs(row[pc]) // math.gcd(L, row[pc])
        v = [0] * ncols
        v[f] = L
        for row, pc in zip(m, pivots):
            if row[f]:
                v[pc] = -row[f] * L // row[pc]
        g = 0
        for t in v:
            if t:
                g = math.gcd(g, t)
        if g > 1:
            v = [t // g for t in v]
        basis.append(v)
    return basis


def rank_int(m: list[list[int]]) -> int:
    """Rank of an integer matrix given as a list of rows (consumed)."""
    if not m or not m[0]:
        return 0
    if len(m) == 1 or len(m[0]) == 1:
        return 1 if any(v for row in m for v in row) else 0
    return _bareiss_rank(m)
