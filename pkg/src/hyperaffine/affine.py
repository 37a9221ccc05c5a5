"""Affine maps on C^n and their homogenizing embeddings.

``phi(f)`` is the invertible block matrix ``[[1, 0], [a, A]]`` turning
composition into matrix product; ``psi(f)`` is the linear embedding
``[[0, 0], [a, A]]``.  Matrices are plain numpy arrays, exact (object dtype,
CNumber entries) or float (complex128).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, ShapeError
from .linalg import (
    exact_det,
    exact_zeros,
    is_exact,
    max_deviation,
    matrices_equal,
    rel_tol,
    to_complex,
)
from .scalars import CNumber

COMMUTE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``x -> A x + a``."""

    A: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        A, a = self.A, self.a
        if A.ndim != 2 or A.shape[0] != A.shape[1] or a.shape != (A.shape[0],):
            raise DimensionMismatch(f"linear part {A.shape} and translation {a.shape} disagree")
        if is_exact(A) != is_exact(a):
            # mixed storage degrades to float
            object.__setattr__(self, "A", to_complex(A))
            object.__setattr__(self, "a", to_complex(a))

    @classmethod
    def from_data(cls, A, a) -> "AffineMap":
        """Build from nested lists; float/complex entries give a float map."""
        A_arr = np.array(A, dtype=object)
        a_arr = np.array(a, dtype=object)
        entries = list(A_arr.flat) + list(a_arr.flat)
        if all(isinstance(x, CNumber) or _is_exact_literal(x) for x in entries):
            from .linalg import exact_array

            return cls(exact_array(A_arr), exact_array(a_arr))
        return cls(to_complex(A_arr), to_complex(a_arr))

    @classmethod
    def identity(cls, n: int, exact: bool = True) -> "AffineMap":
        if exact:
            A = exact_zeros((n, n))
            for i in range(n):
                A[i, i] = CNumber(1)
            return cls(A, exact_zeros((n,)))
        return cls(np.eye(n, dtype=complex), np.zeros(n, dtype=complex))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.A)

    def __call__(self, x):
        return self.A.dot(x) + self.a

    def to_float(self) -> "AffineMap":
        return self if not self.exact else AffineMap(to_complex(self.A), to_complex(self.a))

    def __add__(self, other: "AffineMap") -> "AffineMap":
        _same_dim(self, other)
        return AffineMap(self.A + other.A, self.a + other.a)

    def scale(self, c) -> "AffineMap":
        return AffineMap(self.A * c, self.a * c)

    def equals(self, other: "AffineMap", tol: float | None = None) -> bool:
        return (
            self.n == other.n
            and matrices_equal(self.A, other.A, tol)
            and matrices_equal(self.a, other.a, tol)
        )

    def is_invertible(self, tol: float = 1e-12) -> bool:
        if self.exact:
            return not exact_det(self.A).is_zero()
        s = np.linalg.svd(self.A, compute_uv=False)
        return bool(s[-1] > tol * max(1.0, s[0]))

    def __repr__(self):
        return f"AffineMap(A={self.A.tolist()}, a={self.a.tolist()})"


def _is_exact_literal(x) -> bool:
    from fractions import Fraction

    from .scalars import SymScalar

    return isinstance(x, (int, Fraction, SymScalar)) and not isinstance(x, bool)


def _same_dim(f: AffineMap, g: AffineMap):
    if f.n != g.n:
        raise DimensionMismatch(f"dimensions {f.n} and {g.n} differ")


def _common(f: AffineMap, g: AffineMap) -> tuple[AffineMap, AffineMap]:
    if f.exact and g.exact:
        return f, g
    return f.to_float(), g.to_float()


def compose(f: AffineMap, g: AffineMap) -> AffineMap:
    """``f o g = (AB, Ab + a)``."""
    _same_dim(f, g)
    f, g = _common(f, g)
    return AffineMap(f.A.dot(g.A), f.A.dot(g.a) + f.a)


def _embed(f: AffineMap, corner) -> np.ndarray:
    n = f.n
    if f.exact:
        M = exact_zeros((n + 1, n + 1))
        M[0, 0] = CNumber(corner)
    else:
        M = np.zeros((n + 1, n + 1), dtype=complex)
        M[0, 0] = corner
    M[1:, 0] = f.a
    M[1:, 1:] = f.A
    return M


def phi(f: AffineMap) -> np.ndarray:
    return _embed(f, 1)


def psi(f: AffineMap) -> np.ndarray:
    return _embed(f, 0)


def _check_first_row(M, corner, tol) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
        raise ShapeError(f"expected a square matrix of size >= 2, got {M.shape}")
    row = M[0]
    if is_exact(M):
        ok = row[0] == corner and all(x.is_zero() for x in row[1:])
    else:
        thresh = rel_tol(tol, M)
        ok = abs(row[0] - corner) <= thresh and bool(np.all(np.abs(row[1:]) <= thresh))
    if not ok:
        raise ShapeError(f"first row must be ({corner}, 0, ..., 0)")


def phi_inv(M, tol: float = COMMUTE_TOL) -> AffineMap:
    _check_first_row(M, 1, tol)
    return AffineMap(M[1:, 1:].copy(), M[1:, 0].copy())


def psi_inv(M, tol: float = COMMUTE_TOL) -> AffineMap:
    _check_first_row(M, 0, tol)
    return AffineMap(M[1:, 1:].copy(), M[1:, 0].copy())


def check_abelian(
    fs: list[AffineMap], tol: float = COMMUTE_TOL
) -> tuple[bool, tuple[int, int] | None, float]:
    """Pairwise commutativity check.

    Returns ``(ok, first_failing_pair, max_deviation)``.  Exact pairs are
    compared exactly; otherwise entrywise within ``tol * (1 + max entry)``.
    """
    if fs:
        n = fs[0].n
        for f in fs:
            if f.n != n:
                raise DimensionMismatch("generators have different dimensions")
    worst = 0.0
    for i, j in combinations(range(len(fs)), 2):
        fg = compose(fs[i], fs[j])
        gf = compose(fs[j], fs[i])
        if not fg.exact:
            worst = max(worst, max_deviation(fg.A, gf.A), max_deviation(fg.a, gf.a))
        if not fg.equals(gf, tol):
            dev = max(max_deviation(fg.A, gf.A), max_deviation(fg.a, gf.a))
            return False, (i, j), dev
    return True, None, worst
