"""Exact linear algebra over the scalar fraction field.

Pivots prefer nonzero constants.  When a constraint reducer is supplied,
symbolic pivots must be nonzero after reduction to the constraint variety;
a column whose only nonzero candidates vanish on the variety raises
RankAmbiguous, since generic rank and on-variety rank then disagree.
"""

from __future__ import annotations

from .errors import RankAmbiguous
from .scalars import E_ONE, E_ZERO, ParamExpr


def _pick_pivot(col_entries, reducer):
    """Index of the pivot among (row, entry) candidates, or None."""
    nonzero = [(i, e) for i, e in col_entries if not e.is_zero()]
    if not nonzero:
        return None
    for i, e in nonzero:
        if e.is_constant():
            return i
    if reducer is None:
        return nonzero[0][0]
    for i, e in nonzero:
        if not reducer(e).is_zero():
            return i
    raise RankAmbiguous(
        "all pivot candidates vanish on the constraint variety; "
        "supply a numeric assignment")


def row_reduce(matrix, reducer=None):
    """Reduced row echelon form.  Returns (rref, pivot_columns).

    `matrix` is a list of rows of ParamExpr; it is not modified.
    """
    mat = [list(row) for row in matrix]
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    piv_cols = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        idx = _pick_pivot([(i, mat[i][c]) for i in range(r, rows)], reducer)
        if idx is None:
            continue
        mat[r], mat[idx] = mat[idx], mat[r]
        pivot = mat[r][c]
        inv = E_ONE / pivot
        mat[r] = [x * inv for x in mat[r]]
        for i in range(rows):
            if i == r:
                continue
            f = mat[i][c]
            if f.is_zero():
                continue
            mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
    return mat, piv_cols


def rank(matrix, reducer=None) -> int:
    if not matrix or not matrix[0]:
        return 0
    _, piv = row_reduce(matrix, reducer)
    return len(piv)


def kernel_basis(matrix, ncols, reducer=None):
    """Basis of the right kernel as coefficient vectors."""
    if not matrix:
        return [[E_ONE if i == j else E_ZERO for i in range(ncols)] for j in range(ncols)]
    rref, piv = row_reduce(matrix, reducer)
    piv_set = set(piv)
    free = [c for c in range(ncols) if c not in piv_set]
    basis = []
    for fc in free:
        vec = [E_ZERO] * ncols
        vec[fc] = E_ONE
        for r, pc in enumerate(piv):
            vec[pc] = -rref[r][fc]
        basis.append(vec)
    return basis


def solve(matrix, rhs, reducer=None):
    """A particular solution x of matrix @ x = rhs, or None if inconsistent.

    Free variables are set to zero, so the solution is supported on pivot
    columns (sparsest echelon representative).
    """
    rows = len(matrix)
    if rows == 0:
        return []
    cols = len(matrix[0])
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    rref, piv = row_reduce(aug, reducer)
    if piv and piv[-1] == cols:
        return None
    x = [E_ZERO] * cols
    for r, pc in enumerate(piv):
        x[pc] = rref[r][cols]
    return x


def invert(matrix, reducer=None):
    """Exact inverse of a square matrix, or None if singular."""
    m = len(matrix)
    if m == 0:
        return []
    aug = [list(row) + [E_ONE if i == j else E_ZERO for j in range(m)]
           for i, row in enumerate(matrix)]
    rref, piv = row_reduce(aug, reducer)
    if piv != list(range(m)):
        return None
    return [row[m:] for row in rref]


def det(matrix):
    """Exact determinant via fraction-field elimination."""
    m = len(matrix)
    if m == 0:
        return E_ONE
    mat = [list(row) for row in matrix]
    sign = 1
    acc = E_ONE
    for c in range(m):
        idx = None
        for i in range(c, m):
            if not mat[i][c].is_zero():
                idx = i
                break
        if idx is None:
            return E_ZERO
        if idx != c:
            mat[c], mat[idx] = mat[idx], mat[c]
            sign = -sign
        pivot = mat[c][c]
        acc = acc * pivot
        inv = E_ONE / pivot
        for i in range(c + 1, m):
            f = mat[i][c]
            if f.is_zero():
                continue
            fi = f * inv
            mat[i] = [a - fi * b for a, b in zip(mat[i], mat[c])]
    return acc if sign > 0 else -acc


def matmul(a, b):
    rows, mid = len(a), len(b)
    cols = len(b[0]) if mid else 0
    out = [[E_ZERO] * cols for _ in range(rows)]
    for i in range(rows):
        for k in range(mid):
            c = a[i][k]
            if c.is_zero():
                continue
            for j in range(cols):
                x = b[k][j]
                if not x.is_zero():
                    out[i][j] = out[i][j] + c * x
    return out


def mat_conj(a):
    return [[c.conj() for c in row] for row in a]


def mat_identity(m):
    return [[E_ONE if i == j else E_ZERO for j in range(m)] for i in range(m)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(a, b)]
