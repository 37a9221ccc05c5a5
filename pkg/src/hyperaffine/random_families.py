"""Seeded random builders for commuting families and density instances.

Used by the test suite and the experiment scripts.  Everything is exact
(Gaussian rationals, optionally with square roots) so downstream checks can
be exact.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .affine import AffineMap, phi_inv
from .density import DensityInstance
from .linalg import exact_eye, exact_inverse, exact_zeros
from .normal_form import blocks
from .scalars import CNumber, SymScalar


def rand_fraction(rng: np.random.Generator, num: int = 5, den: int = 3, nonzero: bool = False) -> Fraction:
    while True:
        x = Fraction(int(rng.integers(-num, num + 1)), int(rng.integers(1, den + 1)))
        if x or not nonzero:
            return x


def rand_gaussian(rng: np.random.Generator, num: int = 5, den: int = 3, real: bool = False) -> CNumber:
    re = rand_fraction(rng, num, den)
    im = Fraction(0) if real else rand_fraction(rng, num, den)
    return CNumber(re, im)


def rand_partition(rng: np.random.Generator, m: int) -> tuple[int, ...]:
    parts = []
    left = m
    while left:
        k = int(rng.integers(1, left + 1))
        parts.append(k)
        left -= k
    return tuple(parts)


def rand_affine(rng: np.random.Generator, n: int, real: bool = True) -> AffineMap:
    A = exact_zeros((n, n))
    a = exact_zeros((n,))
    for i in range(n):
        a[i] = rand_gaussian(rng, real=real)
        for j in range(n):
            A[i, j] = rand_gaussian(rng, real=real)
    return AffineMap(A, a)


def rand_conjugator(rng: np.random.Generator, m: int, unipotent: bool = False) -> np.ndarray:
    """Random invertible exact ``P`` with first row ``(1, 0, ..., 0)``."""
    while True:
        P = exact_eye(m)
        for i in range(1, m):
            P[i, 0] = rand_gaussian(rng, 3, 2)
            for j in range(1, m):
                if unipotent and j >= i:
                    continue
                P[i, j] = rand_gaussian(rng, 3, 2, real=True) + (1 if i == j else 0)
        try:
            exact_inverse(P)
            return P
        except ZeroDivisionError:
            continue


def cone_family(
    rng: np.random.Generator,
    n: int,
    p: int,
    eta: tuple[int, ...] | None = None,
    positive: bool = False,
) -> tuple[list[np.ndarray], tuple[int, ...]]:
    """``p`` commuting invertible matrices in the block-triangular cone.

    Each block of generator ``k`` is ``mu_k I + sum_j c_kj Nil^j`` for one
    fixed strictly lower triangular ``Nil`` per block, so generators commute.
    The first block has ``mu = 1`` so the matrices are homogenized affine maps.
    """
    m = n + 1
    eta = eta or rand_partition(rng, m)
    nils = []
    for size in eta:
        N = exact_zeros((size, size))
        for i in range(1, size):
            for j in range(i):
                N[i, j] = rand_gaussian(rng, 3, 2)
        nils.append(N)
    mats = []
    for _ in range(p):
        K = exact_zeros((m, m))
        for b, ((s, e), N) in enumerate(zip(blocks(eta), nils)):
            size = e - s
            if b == 0:
                mu = CNumber(1)
            elif positive:
                mu = CNumber(Fraction(int(rng.integers(1, 7)), int(rng.integers(1, 4))))
            else:
                mu = CNumber(rand_fraction(rng, 4, 3, nonzero=True), rand_fraction(rng, 2, 2))
            blk = exact_eye(size) * mu
            power = exact_eye(size)
            for _ in range(1, size):
                power = power.dot(N)
                blk = blk + power * rand_gaussian(rng, 2, 2)
            K[s:e, s:e] = blk
        mats.append(K)
    return mats, eta


def commuting_family(
    rng: np.random.Generator, n: int, p: int, eta: tuple[int, ...] | None = None, conjugate: bool = True,
    positive: bool = False,
) -> tuple[list[AffineMap], np.ndarray, tuple[int, ...]]:
    """Commuting invertible affine maps ``P K_k P^-1`` with known ``(P, eta)``."""
    mats, eta = cone_family(rng, n, p, eta, positive)
    m = n + 1
    P = rand_conjugator(rng, m) if conjugate else exact_eye(m)
    Pinv = exact_inverse(P)
    fs = [phi_inv(P.dot(K).dot(Pinv)) for K in mats]
    return fs, P, eta


def rand_radical_scalar(rng: np.random.Generator, radicands=(1, 2, 3), num: int = 3, den: int = 2) -> SymScalar:
    out = SymScalar()
    for d in radicands:
        if rng.random() < 0.5 or d == 1:
            out = out + SymScalar.sqrt(d) * rand_fraction(rng, num, den)
    return out


def rand_density_instance(
    rng: np.random.Generator, n: int = 1, q: int | None = None, radicands=(1, 2, 3)
) -> DensityInstance:
    """Random instance with entries in ``Q(sqrt 2, sqrt 3)`` (or plain rationals)."""
    q = q if q is not None else int(rng.integers(1, 6))
    vecs = []
    for _ in range(q):
        v = np.empty(n, dtype=object)
        for i in range(n):
            v[i] = CNumber(rand_radical_scalar(rng, radicands), rand_radical_scalar(rng, radicands))
        vecs.append(v)
    return DensityInstance(n, vecs, [])
