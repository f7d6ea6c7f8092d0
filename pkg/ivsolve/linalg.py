"""
Interval matrices and their determinant / inverse enclosures.

Two families live here:

* Laplace (cofactor) routines. They are exact-recurrence demonstrations of the
  factorial cost of cofactor expansion and are capped in size by settings.
* Gaussian elimination and the Krawczyk-style residual inverse, the cubic-cost
  enclosures the Newton and Krawczyk solvers actually use.

Real matrices (midpoints, preconditioners) are plain ``numpy`` arrays.
"""
import logging

import numpy as np

from .conf import get_setting
from .exceptions import (
    DimensionMismatch,
    DimensionTooLarge,
    PivotContainsZero,
    SingularEnclosure,
    SingularMatrix,
    VerificationFailed,
)
from .intervals import (
    EMPTY,
    Interval,
    _box,
    _iv,
    active_counters,
    add,
    contains_zero,
    counting,
    diam,
    div,
    intersect,
    mag,
    mid,
    mig,
    mul,
    neg,
    sub,
)

logger = logging.getLogger(__name__)

_ZERO = Interval(0.0)
_ONE = Interval(1.0)


class IntervalMatrix:
    """Immutable n x n matrix of intervals, stored row-major as tuples."""
    __slots__ = ('rows',)

    def __init__(self, rows):
        rows = tuple(tuple(e if isinstance(e, Interval) else Interval(*_pair(e)) for e in row) for row in rows)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise DimensionMismatch('Interval matrices must be square and non-empty')
        object.__setattr__(self, 'rows', rows)

    def __setattr__(self, name, value):
        raise AttributeError('IntervalMatrix is immutable')

    @classmethod
    def from_point(cls, values):
        values = np.asarray(values, dtype=float)
        return cls([[_iv(float(v), float(v)) for v in row] for row in values])

    @classmethod
    def identity(cls, n):
        return identity_matrix(n)

    @property
    def n(self):
        return len(self.rows)

    @property
    def is_empty(self):
        return any(e is EMPTY for row in self.rows for e in row)

    def __getitem__(self, index):
        if isinstance(index, tuple):
            i, j = index
            return self.rows[i][j]
        return self.rows[index]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, IntervalMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return 'IntervalMatrix(' + '; '.join(', '.join(repr(e) for e in row) for row in self.rows) + ')'

    def transpose(self):
        return IntervalMatrix(list(zip(*self.rows)))

    def contains(self, values):
        """True when every entry of the real matrix ``values`` lies in the matching entry."""
        values = np.asarray(values, dtype=float)
        return all(
            e[0] <= values[i, j] <= e[1]
            for i, row in enumerate(self.rows)
            for j, e in enumerate(row)
        )

    def max_width(self):
        return max(diam(e) for row in self.rows for e in row)


def _pair(entry):
    if isinstance(entry, (int, float)):
        return (entry, entry)
    return tuple(entry)


def identity_matrix(n):
    return IntervalMatrix([[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)])


def _count_inversion():
    counters = active_counters()
    if counters is not None:
        counters.inversions += 1


def _check_cap(n, setting):
    cap = get_setting(setting)
    if n > cap:
        raise DimensionTooLarge(f"n={n} exceeds the cofactor-expansion limit of {cap}")


# ==================== Laplace (cofactor) ====================

def laplace_det_mul_count(n):
    """M(n) = n * (M(n - 1) + 1), M(1) = 0: interval multiplications of det_laplace."""
    count = 0
    for k in range(2, n + 1):
        count = k * (count + 1)
    return count


def _minor(rows, skip_row, skip_col):
    return [
        [e for j, e in enumerate(row) if j != skip_col]
        for i, row in enumerate(rows)
        if i != skip_row
    ]


def _det_cofactor(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        term = mul(rows[0][j], _det_cofactor(_minor(rows, 0, j)))
        if j & 1:
            term = neg(term)
        total = term if total is None else add(total, term)
    return total


def det_laplace(A):
    """Cofactor expansion along the first row."""
    _check_cap(A.n, 'IVSOLVE_LAPLACE_DET_MAX_N')
    return _det_cofactor(A.rows)


def adjugate_laplace(A):
    """Transpose of the cofactor matrix; n**2 minor determinants."""
    n = A.n
    _check_cap(n, 'IVSOLVE_LAPLACE_ADJ_MAX_N')
    if n == 1:
        return IntervalMatrix([[_ONE]])
    cofactors = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor_det = _det_cofactor(_minor(A.rows, i, j))
            cofactors[i][j] = neg(minor_det) if (i + j) & 1 else minor_det
    return IntervalMatrix(cofactors).transpose()


def inverse_adjugate(A):
    _check_cap(A.n, 'IVSOLVE_LAPLACE_ADJ_MAX_N')
    determinant = det_laplace(A)
    if contains_zero(determinant):
        raise SingularEnclosure(f"Determinant enclosure {determinant!r} contains zero")
    adjugate = adjugate_laplace(A)
    _count_inversion()
    return IntervalMatrix([[div(e, determinant) for e in row] for row in adjugate.rows])


# ==================== Gaussian elimination ====================

def _select_pivot(rows, k):
    """Row index >= k whose column-k entry has the largest mignitude (ties: lowest index)."""
    best, best_mig = k, -1.0
    for i in range(k, len(rows)):
        m = mig(rows[i][k])
        if m > best_mig:
            best, best_mig = i, m
    return best, best_mig


def _eliminate(rows, k, width):
    pivot = rows[k][k]
    for i in range(k + 1, len(rows)):
        factor = div(rows[i][k], pivot)
        row_i = rows[i]
        row_k = rows[k]
        for j in range(k + 1, width):
            row_i[j] = sub(row_i[j], mul(factor, row_k[j]))
        row_i[k] = _ZERO


def det_gauss(A):
    """Product of pivots of interval Gaussian elimination with mignitude pivoting."""
    rows = [list(row) for row in A.rows]
    n = len(rows)
    negate = False
    for k in range(n):
        p, best_mig = _select_pivot(rows, k)
        if best_mig <= 0.0:
            raise PivotContainsZero(f"Every candidate pivot in column {k} contains zero")
        if p != k:
            rows[k], rows[p] = rows[p], rows[k]
            negate = not negate
        _eliminate(rows, k, n)
    determinant = rows[0][0]
    for k in range(1, n):
        determinant = mul(determinant, rows[k][k])
    return neg(determinant) if negate else determinant


def inverse_gauss(A):
    """Enclosure of every point inverse by elimination against the identity columns."""
    n = A.n
    rows = [list(row) + [_ONE if i == j else _ZERO for j in range(n)] for i, row in enumerate(A.rows)]
    for k in range(n):
        p, best_mig = _select_pivot(rows, k)
        if best_mig <= 0.0:
            raise SingularEnclosure(f"Pivot enclosure in column {k} contains zero")
        if p != k:
            rows[k], rows[p] = rows[p], rows[k]
        _eliminate(rows, k, 2 * n)
    result = [[None] * n for _ in range(n)]
    for col in range(n):
        for k in range(n - 1, -1, -1):
            acc = rows[k][n + col]
            for j in range(k + 1, n):
                acc = sub(acc, mul(rows[k][j], result[j][col]))
            result[k][col] = div(acc, rows[k][k])
    _count_inversion()
    return IntervalMatrix(result)


def gauss_growth_check(sizes=(4, 8, 16, 32), seed=0):
    """Interval multiplications of det_gauss for each size and the ratio to the previous size."""
    rng = np.random.default_rng(seed)
    table = []
    previous = None
    for n in sizes:
        A = random_interval_matrix(rng, n, dominant=True)
        with counting() as counters:
            det_gauss(A)
        muls = counters.muls // 4
        ratio = muls / previous if previous else None
        table.append({'n': n, 'muls': muls, 'ratio': ratio})
        previous = muls
    return table


def random_interval_matrix(rng, n, max_radius=0.05, dominant=False):
    centers = rng.uniform(-1.0, 1.0, size=(n, n))
    if dominant:
        centers += np.eye(n) * (n + 1.0)
    radii = rng.uniform(0.0, max_radius, size=(n, n))
    return IntervalMatrix(
        [[_iv(float(c - r), float(c + r)) for c, r in zip(crow, rrow)] for crow, rrow in zip(centers, radii)]
    )


# ==================== Real matrices and products ====================

def mid_matrix(A):
    return np.array([[mid(e) for e in row] for row in A.rows], dtype=float)


def real_inverse(M):
    """Floating-point inverse by LU with partial pivoting."""
    M = np.asarray(M, dtype=float)
    try:
        inverse = np.linalg.solve(M, np.eye(M.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"Matrix is singular: {exc}") from exc
    if not np.all(np.isfinite(inverse)):
        raise SingularMatrix('Matrix inverse has non-finite entries')
    _count_inversion()
    return inverse


def _dot(pairs):
    total = None
    for a, b in pairs:
        term = mul(a, b)
        total = term if total is None else add(total, term)
    return total


def mat_vec(A, v):
    if len(v) != A.n:
        raise DimensionMismatch(f"Vector of length {len(v)} for a {A.n}x{A.n} matrix")
    return _box(_dot(zip(row, v)) for row in A.rows)


def real_mat_vec(M, v):
    M = np.asarray(M, dtype=float)
    if M.shape[1] != len(v):
        raise DimensionMismatch(f"Vector of length {len(v)} for a matrix with {M.shape[1]} columns")
    return _box(_dot((_iv(float(m), float(m)), x) for m, x in zip(row, v)) for row in M)


def mat_mat(A, B):
    if A.n != B.n:
        raise DimensionMismatch(f"Cannot multiply {A.n}x{A.n} by {B.n}x{B.n}")
    columns = list(zip(*B.rows))
    return IntervalMatrix([[_dot(zip(row, col)) for col in columns] for row in A.rows])


def real_mat_interval_mat(M, A):
    return mat_mat(IntervalMatrix.from_point(M), A)


def mat_sub(A, B):
    return IntervalMatrix([[sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A.rows, B.rows)])


def vec_add(a, b):
    return _box(add(x, y) for x, y in zip(a, b))


def vec_sub(a, b):
    return _box(sub(x, y) for x, y in zip(a, b))


def _norm_inf_upper(rows):
    """Upper bound of the row-sum norm of |rows|."""
    norm = 0.0
    for row in rows:
        total = _ZERO
        for e in row:
            m = mag(e)
            total = add(total, _iv(m, m))
        norm = max(norm, total[1])
    return norm


# ==================== Krawczyk-style inverse ====================

def krawczyk_inverse(A):
    """
    Enclose every point inverse by the residual fixed point Z = Y + (I - Y A) Z.

    Y is the floating-point inverse of mid(A). The iteration starts from the
    norm bound ||Y|| / (1 - ||I - Y A||) and stops after a fixed number of
    sweeps or once the width stops shrinking.
    """
    n = A.n
    try:
        Y = real_inverse(mid_matrix(A))
    except SingularMatrix as exc:
        raise VerificationFailed(f"Midpoint matrix is not invertible: {exc}") from exc
    Y_iv = IntervalMatrix.from_point(Y)
    E = mat_sub(identity_matrix(n), mat_mat(Y_iv, A))
    norm_E = _norm_inf_upper(E.rows)
    if norm_E >= 1.0:
        raise VerificationFailed(f"Residual norm {norm_E:.3g} is not below 1")
    norm_Y = _norm_inf_upper(Y_iv.rows)
    beta = div(_iv(norm_Y, norm_Y), sub(_ONE, _iv(norm_E, norm_E)))[1]
    Z = IntervalMatrix([[_iv(-beta, beta)] * n for _ in range(n)])

    max_iter = get_setting('IVSOLVE_KRAWCZYK_INV_MAX_ITER')
    stagnation = get_setting('IVSOLVE_KRAWCZYK_INV_STAGNATION')
    width = Z.max_width()
    for iteration in range(max_iter):
        EZ = mat_mat(E, Z)
        Z_new = IntervalMatrix(
            [[intersect(add(y, ez), z) for y, ez, z in zip(ry, rez, rz)] for ry, rez, rz in zip(Y_iv.rows, EZ.rows, Z.rows)]
        )
        if Z_new.is_empty:
            raise VerificationFailed('Residual iteration produced an empty enclosure')
        new_width = Z_new.max_width()
        Z = Z_new
        if width > 0.0 and (width - new_width) / width < stagnation:
            break
        width = new_width
    logger.debug(f"krawczyk_inverse n={n} stopped after {iteration + 1} sweep(s), width={Z.max_width():.3g}")
    return Z
