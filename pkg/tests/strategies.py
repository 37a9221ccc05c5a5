"""Hypothesis strategies for exact scalars, affine maps and cone matrices."""

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from hyperaffine.affine import AffineMap
from hyperaffine.linalg import exact_zeros
from hyperaffine.normal_form import blocks
from hyperaffine.scalars import PI_SYMBOL, CNumber, SymScalar

fractions = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 6))
nonzero_fractions = fractions.filter(bool)

_MONOMIALS = [
    SymScalar.rational(1),
    SymScalar.sqrt(2),
    SymScalar.sqrt(3),
    SymScalar.sqrt(6),
    SymScalar.symbol(PI_SYMBOL),
    SymScalar.symbol(PI_SYMBOL) * SymScalar.sqrt(2),
    SymScalar.symbol(PI_SYMBOL, -1),
    SymScalar.symbol(PI_SYMBOL, 2),
]


@st.composite
def sym_scalars(draw, max_terms=4, coeff=st.builds(Fraction, st.integers(-1000, 1000), st.integers(1, 7))):
    picks = draw(st.lists(st.sampled_from(range(len(_MONOMIALS))), max_size=max_terms, unique=True))
    out = SymScalar()
    for k in picks:
        out = out + _MONOMIALS[k] * draw(coeff)
    return out


gaussian = st.builds(CNumber, fractions, fractions)
real_rational = st.builds(CNumber, fractions)


@st.composite
def exact_maps(draw, n=None, entries=gaussian):
    n = draw(st.integers(1, 4)) if n is None else n
    A = exact_zeros((n, n))
    a = exact_zeros((n,))
    for i in range(n):
        a[i] = draw(entries)
        for j in range(n):
            A[i, j] = draw(entries)
    return AffineMap(A, a)


@st.composite
def map_pairs(draw, entries=gaussian):
    n = draw(st.integers(1, 4))
    return draw(exact_maps(n, entries)), draw(exact_maps(n, entries))


@st.composite
def partitions(draw, m):
    parts, left = [], m
    while left:
        k = draw(st.integers(1, left))
        parts.append(k)
        left -= k
    return tuple(parts)


@st.composite
def cone_matrices(draw, max_m=5, positive=False, unit_first=False):
    """Exact matrices in the block lower-triangular cone with nonzero diagonals."""
    m = draw(st.integers(1, max_m))
    eta = draw(partitions(m))
    M = exact_zeros((m, m))
    for b, (s, e) in enumerate(blocks(eta)):
        if unit_first and b == 0:
            mu = CNumber(1)
        elif positive:
            mu = CNumber(draw(st.builds(Fraction, st.integers(1, 12), st.integers(1, 6))))
        else:
            mu = draw(gaussian.filter(lambda z: not z.is_zero()))
        for i in range(s, e):
            M[i, i] = mu
            for j in range(s, i):
                M[i, j] = draw(gaussian)
    return M, eta


def random_float_cone(rng: np.random.Generator, m: int, eta) -> np.ndarray:
    M = np.zeros((m, m), dtype=complex)
    for s, e in blocks(eta):
        mu = complex(*rng.uniform(-2, 2, 2))
        while abs(mu) < 0.2:
            mu = complex(*rng.uniform(-2, 2, 2))
        M[s:e, s:e] = np.tril(rng.normal(size=(e - s, e - s)) + 1j * rng.normal(size=(e - s, e - s)), -1)
        M[range(s, e), range(s, e)] = mu
    return M


def random_exact_cone(rng: np.random.Generator, m: int, eta, positive: bool = True) -> np.ndarray:
    """Exact cone element with arbitrary Gaussian-rational strictly lower block entries."""
    from hyperaffine.random_families import rand_gaussian

    M = exact_zeros((m, m))
    for s, e in blocks(eta):
        if positive:
            mu = CNumber(Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 5))))
        else:
            mu = rand_gaussian(rng, 4, 3)
            while mu.is_zero():
                mu = rand_gaussian(rng, 4, 3)
        for i in range(s, e):
            M[i, i] = mu
            for j in range(s, i):
                M[i, j] = rand_gaussian(rng, 4, 3)
    return M
