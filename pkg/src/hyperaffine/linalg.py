"""Small dense linear algebra over exact (object) and float (complex) arrays.

Exact matrices are numpy object arrays of :class:`CNumber` (or SymScalar);
numpy's object matmul works on them directly.  Only the operations that need
division live here; they require invertible pivots and raise
:class:`ExactUnsupported` when the ring offers none.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .scalars import CNumber, SymScalar

FLOAT_NULL_RTOL = 1e-9


class ExactUnsupported(ArithmeticError):
    """An exact computation needs a division the scalar ring cannot do."""


def is_exact(arr) -> bool:
    return isinstance(arr, np.ndarray) and arr.dtype == object


_to_complex = np.vectorize(complex, otypes=[complex])


def to_complex(arr) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype == object:
        return _to_complex(arr) if arr.size else np.zeros(arr.shape, dtype=complex)
    return arr.astype(complex)


def cnum(x) -> CNumber:
    if isinstance(x, CNumber):
        return x
    return CNumber(x)


def exact_array(data) -> np.ndarray:
    """Object array of CNumbers from nested ints/Fractions/SymScalars/CNumbers."""
    arr = np.array(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = cnum(x)
    return out


def exact_zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(CNumber(0))
    return out


def exact_eye(m: int) -> np.ndarray:
    out = exact_zeros((m, m))
    for i in range(m):
        out[i, i] = CNumber(1)
    return out


def eye_like(m: int, exact: bool) -> np.ndarray:
    return exact_eye(m) if exact else np.eye(m, dtype=complex)


def all_gaussian_rational(arr) -> bool:
    return is_exact(arr) and all(x.is_gaussian_rational() for x in arr.flat)


def max_abs(arr) -> float:
    c = to_complex(arr)
    return float(np.max(np.abs(c))) if c.size else 0.0


def rel_tol(tol: float, *arrs) -> float:
    """Absolute threshold ``tol * (1 + max entry magnitude)`` over ``arrs``."""
    return tol * (1.0 + max((max_abs(a) for a in arrs), default=0.0))


def is_zero_entry(x, thresh: float | None) -> bool:
    if isinstance(x, (CNumber, SymScalar)):
        return x.is_zero()
    return abs(x) <= (thresh or 0.0)


def matrices_equal(X, Y, tol: float | None = None) -> bool:
    """Exact equality when both are exact, else entrywise within ``rel_tol(tol)``."""
    if X.shape != Y.shape:
        return False
    if is_exact(X) and is_exact(Y):
        return all(a == b for a, b in zip(X.flat, Y.flat))
    tol = 1e-9 if tol is None else tol
    cx, cy = to_complex(X), to_complex(Y)
    return bool(np.all(np.abs(cx - cy) <= rel_tol(tol, cx, cy)))


def max_deviation(X, Y) -> float:
    return float(np.max(np.abs(to_complex(X) - to_complex(Y)))) if X.size else 0.0


# ---------------------------------------------------------------------------
# exact elimination
# ---------------------------------------------------------------------------

def _pick_pivot(M, col, start):
    fallback = None
    for r in range(start, M.shape[0]):
        x = M[r, col]
        if x.is_zero():
            continue
        if x.is_invertible():
            return r
        fallback = r
    if fallback is not None:
        raise ExactUnsupported(f"column {col} has no invertible pivot")
    return None


def exact_rref(M) -> tuple[np.ndarray, list[int]]:
    M = M.copy()
    rows, cols = M.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = _pick_pivot(M, c, r)
        if p is None:
            continue
        if p != r:
            M[[r, p]] = M[[p, r]]
        inv = M[r, c].inverse()
        M[r] = [x * inv for x in M[r]]
        for k in range(rows):
            if k != r and not M[k, c].is_zero():
                f = M[k, c]
                M[k] = [a - f * b for a, b in zip(M[k], M[r])]
        pivots.append(c)
        r += 1
    return M, pivots


def exact_rank(M) -> int:
    return len(exact_rref(M)[1])


def exact_nullspace(M) -> np.ndarray:
    """Columns spanning the right null space of an exact matrix."""
    rows, cols = M.shape
    if rows == 0:
        return exact_eye(cols)
    R, pivots = exact_rref(M)
    free = [c for c in range(cols) if c not in pivots]
    out = exact_zeros((cols, len(free)))
    for j, fc in enumerate(free):
        out[fc, j] = CNumber(1)
        for i, pc in enumerate(pivots):
            out[pc, j] = -R[i, fc]
    return out


def exact_inverse(M) -> np.ndarray:
    m = M.shape[0]
    aug = np.concatenate([M, exact_eye(m)], axis=1)
    R, pivots = exact_rref(aug)
    if pivots[:m] != list(range(m)):
        raise ZeroDivisionError("singular matrix")
    return R[:, m:]


def exact_column_basis(M) -> np.ndarray:
    """Independent columns of ``M`` (first occurrence order)."""
    if M.shape[1] == 0:
        return M
    _, pivots = exact_rref(M)
    return M[:, pivots]


# ---------------------------------------------------------------------------
# determinants in the scalar ring (no division)
# ---------------------------------------------------------------------------

class MinorCache:
    """Memoized Laplace expansion for minors of a fixed ring-valued matrix.

    ``det(rows, cols)`` expands along the first listed row; cached sub-minors
    are shared across all queries, so computing every maximal minor of a
    ``m x q`` matrix costs about ``2**q * m`` ring products.
    """

    def __init__(self, M, zero=None):
        self.M = M
        self.zero = zero if zero is not None else SymScalar()
        self._memo: dict[tuple, object] = {}

    def det(self, rows: Sequence[int], cols: Sequence[int]):
        rows, cols = tuple(rows), tuple(sorted(cols))
        if len(rows) != len(cols):
            raise ValueError("minor must be square")
        return self._det(rows, cols)

    def _det(self, rows, cols):
        if not rows:
            return self.zero + 1
        key = (rows, cols)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        r0, rest = rows[0], rows[1:]
        total = self.zero
        for idx, c in enumerate(cols):
            a = self.M[r0, c]
            if a.is_zero():
                continue
            sub = self._det(rest, cols[:idx] + cols[idx + 1:])
            if sub.is_zero():
                continue
            term = a * sub
            total = total - term if idx % 2 else total + term
        self._memo[key] = total
        return total


def exact_det(M):
    m = M.shape[0]
    zero = CNumber(0) if m and isinstance(M.flat[0], CNumber) else SymScalar()
    return MinorCache(M, zero).det(range(m), range(m))


# ---------------------------------------------------------------------------
# float helpers
# ---------------------------------------------------------------------------

def float_nullspace(M, rtol: float = FLOAT_NULL_RTOL) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * max(1.0, smax)))
    return vh[rank:].conj().T


def float_orth(M, rtol: float = FLOAT_NULL_RTOL) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.shape[1] == 0:
        return M
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > rtol * max(1.0, s[0] if s.size else 0.0)))
    return u[:, :rank]


def as_fraction(x) -> Fraction:
    if isinstance(x, CNumber):
        if not x.is_real():
            raise ValueError("not real")
        return x.re.rational_value()
    if isinstance(x, SymScalar):
        return x.rational_value()
    return Fraction(x)


def rational_nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of ``{s in Q^ncols : rows . s = 0}`` by Gauss-Jordan over Fractions."""
    A = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    basis = []
    for fc in (c for c in range(ncols) if c not in pivots):
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -A[i][fc]
        basis.append(v)
    return basis


def integer_primitive(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to a primitive integer vector (first nonzero > 0)."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g:
        ints = [x // g for x in ints]
    lead = next((x for x in ints if x), 1)
    return [-x for x in ints] if lead < 0 else ints
