import numpy as np
import pytest
from hypothesis import given

from hyperaffine.affine import AffineMap, check_abelian, compose, phi, phi_inv, psi, psi_inv
from hyperaffine.errors import DimensionMismatch
from hyperaffine.linalg import exact_array
from hyperaffine.scalars import CNumber
from strategies import exact_maps, gaussian, map_pairs


def _eq(X, Y):
    return all(x == y for x, y in zip(np.ravel(X), np.ravel(Y)))


@given(map_pairs())
def test_phi_is_multiplicative(pair):
    f, g = pair
    assert _eq(phi(compose(f, g)), phi(f).dot(phi(g)))


@given(map_pairs(), gaussian)
def test_psi_is_linear(pair, c):
    f, g = pair
    assert _eq(psi(f + g), psi(f) + psi(g))
    assert _eq(psi(f.scale(c)), psi(f) * c)


@given(exact_maps())
def test_embedding_round_trips(f):
    assert phi_inv(phi(f)).equals(f)
    assert psi_inv(psi(f)).equals(f)


def test_compose_formula():
    f = AffineMap.from_data([[2, 0], [1, 1]], [1, 0])
    g = AffineMap.from_data([[1, 3], [0, 1]], [0, 2])
    fg = compose(f, g)
    x = exact_array([5, -1])
    assert _eq(fg(x), f(g(x)))
    assert _eq(fg.a, f.A.dot(g.a) + f.a)


def test_phi_inv_rejects_bad_first_row():
    M = exact_array([[2, 0], [0, 1]])
    with pytest.raises(ValueError):
        phi_inv(M)
    with pytest.raises(ValueError):
        psi_inv(exact_array([[0, 1], [0, 1]]))


def test_translations_commute():
    fs = [AffineMap.from_data([[1]], [k]) for k in (1, 2, 3)]
    ok, pair, _ = check_abelian(fs)
    assert ok and pair is None


def test_noncommuting_pair_reported():
    f = AffineMap.from_data([[2]], [0])
    g = AffineMap.from_data([[1]], [1])
    ok, pair, dev = check_abelian([f, f, g])
    assert not ok and pair == (0, 2) and dev > 0


def test_float_commutation_within_tolerance():
    f = AffineMap(np.array([[2.0 + 0j]]), np.array([0j]))
    g = AffineMap(np.array([[3.0 + 0j]]), np.array([1e-13 + 0j]))
    assert check_abelian([f, g])[0]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        check_abelian([AffineMap.identity(1), AffineMap.identity(2)])


def test_invertibility():
    assert AffineMap.from_data([[1, 0], [0, CNumber(0, 1)]], [0, 0]).is_invertible()
    assert not AffineMap.from_data([[1, 1], [1, 1]], [0, 0]).is_invertible()
