from fractions import Fraction

import mpmath
import pytest
from hypothesis import given

from hyperaffine.scalars import (
    PI,
    CNumber,
    ScalarSyntaxError,
    SymbolRegistry,
    SymScalar,
    parse_scalar,
    q_coordinates,
)
from strategies import gaussian, nonzero_fractions, sym_scalars


def test_sqrt_squares_to_rational():
    r = SymScalar.sqrt(2)
    assert r * r == 2
    assert SymScalar.sqrt(12) == SymScalar.sqrt(3) * 2
    assert SymScalar.sqrt(Fraction(1, 2)) == SymScalar.sqrt(2) / 2


def test_radical_products_reduce():
    assert SymScalar.sqrt(2) * SymScalar.sqrt(3) == SymScalar.sqrt(6)
    assert SymScalar.sqrt(6) * SymScalar.sqrt(3) == SymScalar.sqrt(2) * 3


def test_pi_laurent_monomials():
    assert PI * PI ** -1 == 1
    assert (PI ** 2).approx() == pytest.approx(float(mpmath.pi) ** 2)


def test_parse_grammar():
    assert parse_scalar("-3/2") == Fraction(-3, 2)
    x = parse_scalar("sqrt(2)/2 - sqrt(3)/2*pi^-1")
    assert float(x) == pytest.approx(2 ** 0.5 / 2 - 3 ** 0.5 / 2 / 3.141592653589793)
    assert parse_scalar("2*pi") == PI * 2


def test_parse_registry_symbols():
    reg = SymbolRegistry()
    reg.declare_transcendental("e", "2.718281828459045235360287")
    reg.declare_radical("r5", 5)
    x = reg.parse("e*r5 + 1")
    assert x.symbols() == {reg.transcendentals["e"]}
    assert float(x) == pytest.approx(2.718281828459045 * 5 ** 0.5 + 1)


@pytest.mark.parametrize("text, column", [("1 +", 4), ("sqrt(2", 7), ("foo", 1), ("2 ** 3", 4), ("", 1)])
def test_parse_errors_report_column(text, column):
    with pytest.raises(ScalarSyntaxError) as info:
        parse_scalar(text)
    assert info.value.column == column


def test_double_declaration_rejected():
    reg = SymbolRegistry()
    reg.declare_radical("r2", 2)
    with pytest.raises(ValueError):
        reg.declare_transcendental("r2", "1.41")


def test_q_coordinates_independent_monomials():
    xs = [SymScalar.sqrt(2) + 1, PI * 3, SymScalar.sqrt(2) * Fraction(1, 2)]
    basis, rows = q_coordinates(xs)
    assert len(basis) == 3
    for x, row in zip(xs, rows):
        rebuilt = SymScalar()
        for mono, c in zip(basis, row):
            rebuilt = rebuilt + SymScalar({mono: c})
        assert rebuilt == x


@given(sym_scalars(), sym_scalars(), sym_scalars())
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == 0


@given(sym_scalars(), sym_scalars())
def test_approx_is_a_homomorphism(x, y):
    with mpmath.workdps(40):
        assert abs((x * y).approx() - x.approx() * y.approx()) <= mpmath.mpf(10) ** -25 * (1 + abs(x.approx() * y.approx()))


@given(sym_scalars(max_terms=1), nonzero_fractions)
def test_monomial_inverse(x, c):
    x = x * c if not x.is_zero() else SymScalar.rational(c)
    assert x * x.inverse() == 1


@given(gaussian, gaussian)
def test_cnumber_field_ops(z, w):
    assert complex(z * w) == pytest.approx(complex(z) * complex(w))
    if not w.is_zero():
        assert (z / w) * w == z
    assert z.conj().conj() == z
    assert (z * z.conj()).is_real()


def test_cnumber_str_roundtrip_through_parser():
    z = CNumber(SymScalar.sqrt(2) / 3, PI * -1)
    assert parse_scalar(str(z.re)) == z.re
    assert parse_scalar(str(z.im)) == z.im
