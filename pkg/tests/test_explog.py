import cmath
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperaffine.affine import AffineMap, phi, psi
from hyperaffine.errors import BranchError, MembershipError, WitnessError
from hyperaffine.explog import (
    exact_exp,
    exact_log,
    exp_k,
    log_k,
    log_witness,
    psi_adjust,
    verify_witness,
)
from hyperaffine.linalg import exact_array, max_deviation, to_complex
from hyperaffine.normal_form import blocks, find_normal_form
from hyperaffine.random_families import commuting_family, cone_family
from hyperaffine.scalars import PI, CNumber, SymScalar
from strategies import cone_matrices, random_float_cone


def _eq(X, Y):
    return all(x == y for x, y in zip(np.ravel(X), np.ravel(Y)))


@pytest.mark.parametrize("z", [CNumber(2), CNumber(-3), CNumber(0, 1), CNumber(1, 1), CNumber(Fraction(1, 4), 0),
                               CNumber(SymScalar.sqrt(3), 1)])
def test_scalar_log_exp_round_trip(z):
    lz = exact_log(z)
    assert lz is not None
    assert exact_exp(lz) == z
    assert complex(lz) == pytest.approx(cmath.log(complex(z)))


def test_scalar_log_branch_and_unrecognized():
    assert exact_log(CNumber(1), 1) == CNumber(0, PI * 2)
    assert exact_log(CNumber(1, 2)) is None
    assert exact_exp(CNumber(1)) is None


@settings(max_examples=80)
@given(cone_matrices(positive=True))
def test_exact_round_trip_positive_diagonals(me):
    M, eta = me
    L = log_k(M, eta)
    assert _eq(exp_k(L, eta), M)


@settings(max_examples=80)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_float_round_trip(seed, m):
    rng = np.random.default_rng(seed)
    eta = tuple(np.diff([0, *sorted(rng.choice(range(1, m), size=rng.integers(0, m), replace=False)), m]))
    M = random_float_cone(rng, m, eta)
    back = exp_k(log_k(M, eta), eta)
    assert np.all(np.abs(back - M) <= 1e-9 * np.maximum(1, np.abs(M)))
    assert np.allclose(scipy.linalg.expm(log_k(M, eta)), M, rtol=1e-9, atol=1e-9)


@given(cone_matrices(max_m=4, positive=True), st.integers(-3, 3))
def test_branch_shift_adds_two_pi_i_on_block(me, b):
    M, eta = me
    shifts = [0] * len(eta)
    shifts[-1] = b
    D = to_complex(log_k(M, eta, shifts)) - to_complex(log_k(M, eta))
    s, e = blocks(eta)[-1]
    expect = np.zeros_like(D)
    expect[range(s, e), range(s, e)] = 2j * np.pi * b
    assert np.allclose(D, expect)


def test_log_rejects_non_members():
    with pytest.raises(MembershipError):
        log_k(exact_array([[1, 2], [0, 1]]), (2,))
    with pytest.raises(MembershipError):
        log_k(exact_array([[1, 0], [0, 0]]), (1, 1))


def test_psi_adjust():
    N = exact_array([[CNumber(0, PI * 4), 0], [1, CNumber(0, PI * 4)]])
    out, k = psi_adjust(N)
    assert k == 2 and out[0, 0].is_zero() and out[1, 1].is_zero()
    with pytest.raises(BranchError):
        psi_adjust(exact_array([[1, 0], [0, 0]]))
    fl, k = psi_adjust(np.array([[-2j * np.pi, 0], [0, 1]]))
    assert k == -1 and fl[0, 0] == 0 and fl[1, 1] == pytest.approx(1 + 2j * np.pi)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
def test_computed_witness_exponentiates_back(seed, n, p):
    rng = np.random.default_rng(seed)
    fs, _, _ = commuting_family(rng, n, p, positive=True)
    nf = find_normal_form(fs)
    for f in fs:
        w = log_witness(f, nf)
        assert w.deviation <= 1e-9 * (1 + np.abs(to_complex(phi(f))).max())
        assert verify_witness(f, w.fprime, nf).supplied


def test_perturbed_witness_rejected():
    f = AffineMap.from_data([[2]], [0])
    nf = find_normal_form([f])
    w = log_witness(f, nf)
    bad = AffineMap(to_complex(w.fprime.A) + 1e-6, to_complex(w.fprime.a))
    with pytest.raises(WitnessError):
        verify_witness(f, bad, nf)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_logs_of_commuting_pairs_commute(seed, m):
    rng = np.random.default_rng(seed)
    (K1, K2), eta = cone_family(rng, m - 1, 2, positive=True)
    L1, L2 = log_k(K1, eta), log_k(K2, eta)
    assert _eq(L1.dot(L2), L2.dot(L1))
    F1, F2 = log_k(to_complex(K1), eta), log_k(to_complex(K2), eta)
    assert max_deviation(F1 @ F2, F2 @ F1) <= 1e-9 * (1 + np.abs(F1 @ F2).max())


def test_psi_of_witness_matches_expm():
    f = AffineMap.from_data([[1, 0], [0, 4]], [3, 0])
    nf = find_normal_form([f])
    w = log_witness(f, nf)
    assert np.allclose(scipy.linalg.expm(to_complex(psi(w.fprime))), to_complex(phi(f)))
