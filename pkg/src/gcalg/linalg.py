"""Exact linear algebra over Gaussian rationals.

Plain dense matrices as lists of Q rows.  Elimination uses exact division in
the Gaussian-rational field with deterministic pivoting (first nonzero entry
in column order), so every result is reproducible and exact.
"""

from __future__ import annotations

from typing import Callable, List, Optional

from .scalars import Q, QONE, QZERO

Vec = List[Q]
Mat = List[List[Q]]


def zeros(rows: int, cols: int) -> Mat:
    return [[QZERO] * cols for _ in range(rows)]


def identity(n: int) -> Mat:
    return [[QONE if i == j else QZERO for j in range(n)] for i in range(n)]


def mat_mul(a: Mat, b: Mat) -> Mat:
    if a and b and len(a[0]) != len(b):
        raise ValueError("matrix shape mismatch")
    out = zeros(len(a), len(b[0]) if b else 0)
    for i, row in enumerate(a):
        for k, x in enumerate(row):
            if x.is_zero():
                continue
            brow = b[k]
            orow = out[i]
            for j, y in enumerate(brow):
                if not y.is_zero():
                    orow[j] = orow[j] + x * y
    return out


def mat_vec(a: Mat, v: Vec) -> Vec:
    return [sum_q(x * y for x, y in zip(row, v)) for row in a]


def sum_q(items) -> Q:
    out = QZERO
    for x in items:
        out = out + x
    return out


def mat_add(a: Mat, b: Mat) -> Mat:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Mat, b: Mat) -> Mat:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Mat, c: Q) -> Mat:
    return [[c * x for x in row] for row in a]


def mat_eq(a: Mat, b: Mat) -> bool:
    return a == b


def transpose(a: Mat) -> Mat:
    return [list(col) for col in zip(*a)] if a else []


def rref(rows: Mat):
    """Reduced row echelon form; returns (new rows, pivot column list)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(m)):
            if not m[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = QONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(mat: Mat) -> int:
    return len(rref(mat)[1])


def row_space(rows: Mat) -> Mat:
    """Canonical basis (RREF nonzero rows) of the span of the given rows."""
    m, pivots = rref(rows)
    return m[: len(pivots)]


def in_span(v: Vec, basis_rref: Mat) -> bool:
    """Membership test against an RREF basis."""
    return not any(x for x in reduce_against(v, basis_rref) if not x.is_zero())


def reduce_against(v: Vec, basis_rref: Mat) -> Vec:
    out = list(v)
    for row in basis_rref:
        lead = next((j for j, x in enumerate(row) if not x.is_zero()), None)
        if lead is None:
            continue
        f = out[lead]
        if not f.is_zero():
            out = [x - f * y for x, y in zip(out, row)]
    return out


def kernel_basis(mat: Mat, ncols: Optional[int] = None) -> List[Vec]:
    """Basis of the right kernel {x : mat @ x = 0}, deterministic order."""
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    m, pivots = rref(mat)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free:
        v = [QZERO] * ncols
        v[fc] = QONE
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][fc]
        basis.append(v)
    return basis


def solve(mat: Mat, rhs: Vec) -> Optional[Vec]:
    """One exact solution of mat @ x = rhs, or None when inconsistent."""
    ncols = len(mat[0]) if mat else 0
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    m, pivots = rref(aug)
    for row in m[len(pivots):]:
        if not row[-1].is_zero():
            return None
    if pivots and pivots[-1] == ncols:
        return None
    x = [QZERO] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = m[r][-1]
    return x


def invert(mat: Mat) -> Mat:
    n = len(mat)
    aug = [list(row) + list(erow) for row, erow in zip(mat, identity(n))]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in m]


def det(mat: Mat) -> Q:
    n = len(mat)
    m = [list(r) for r in mat]
    out = QONE
    for c in range(n):
        pivot = None
        for i in range(c, n):
            if not m[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            return QZERO
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            out = -out
        out = out * m[c][c]
        inv = QONE / m[c][c]
        for i in range(c + 1, n):
            if not m[i][c].is_zero():
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return out


def intersect_spans(rows_a: Mat, rows_b: Mat, ncols: int) -> Mat:
    """Zassenhaus: canonical basis of span(rows_a) & span(rows_b)."""
    block = []
    for r in rows_a:
        block.append(list(r) + list(r))
    for r in rows_b:
        block.append(list(r) + [QZERO] * ncols)
    m, _ = rref(block)
    out = []
    for row in m:
        left, right = row[:ncols], row[ncols:]
        if any(not x.is_zero() for x in left):
            continue
        if any(not x.is_zero() for x in right):
            out.append(right)
    return row_space(out) if out else []


def span_dim(rows: Mat) -> int:
    return rank(rows)


def spans_equal(rows_a: Mat, rows_b: Mat) -> bool:
    ra = row_space(rows_a)
    rb = row_space(rows_b)
    return ra == rb


def column_space_contains(mat: Mat, v: Vec) -> bool:
    return solve(mat, v) is not None


def operator_matrix(op: Callable, basis, to_vec: Callable) -> Mat:
    """Matrix of a linear operator: column j is op(basis[j]) in coordinates."""
    cols = [to_vec(op(b)) for b in basis]
    nrows = len(cols[0]) if cols else 0
    return [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]
