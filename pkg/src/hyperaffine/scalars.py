"""Exact scalars over Q extended by square roots and free transcendental symbols.

A :class:`SymScalar` is a finite Q-linear combination of monomials
``sqrt(d) * t1^e1 * ... * tk^ek`` where ``d`` is a squarefree positive integer
and the ``ti`` are transcendental :class:`Symbol` objects (integer exponents,
negative allowed).  Under the assumption that the declared transcendentals are
algebraically independent over the field generated by the radicals, distinct
monomials are linearly independent over Q, so the canonical term map is a
faithful normal form and ``is_zero`` is an exact equality test.

:class:`CNumber` is a complex number ``re + i*im`` with both parts SymScalars.
Every scalar carries a float shadow evaluated with mpmath at 50 digits in a
fixed (sorted) order, so reports are reproducible.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, isqrt
from typing import Iterable, Mapping, Union

import mpmath
import sympy

SHADOW_DPS = 50

Rational = Union[int, Fraction]


@dataclass(frozen=True, order=True)
class Symbol:
    """A named transcendental constant with a decimal approximation."""

    name: str
    approx: str

    def value(self) -> mpmath.mpf:
        with mpmath.workdps(SHADOW_DPS):
            return mpmath.mpf(self.approx)


def _digits(x) -> str:
    return mpmath.nstr(x, SHADOW_DPS + 5, strip_zeros=False)


with mpmath.workdps(SHADOW_DPS + 10):
    PI_SYMBOL = Symbol("pi", _digits(mpmath.pi))

_LOG_CACHE: dict[int, Symbol] = {}


def log_symbol(p: int) -> Symbol:
    """Symbol for ``log(p)``, ``p`` prime."""
    if p not in _LOG_CACHE:
        if not sympy.isprime(p):
            raise ValueError(f"log symbols are only defined for primes, got {p}")
        with mpmath.workdps(SHADOW_DPS + 10):
            _LOG_CACHE[p] = Symbol(f"log({p})", _digits(mpmath.log(p)))
    return _LOG_CACHE[p]


def squarefree_split(d: int) -> tuple[int, int]:
    """Return ``(k, s)`` with ``d = k**2 * s`` and ``s`` squarefree."""
    if d <= 0:
        raise ValueError("radicand must be positive")
    k, s = 1, 1
    for p, e in sympy.factorint(d).items():
        k *= p ** (e // 2)
        if e % 2:
            s *= p
    return k, s


# A monomial is (rad, ((symbol, exponent), ...)) with rad squarefree and the
# symbol tuple sorted by name with nonzero exponents.
Monomial = tuple
ONE_MONOMIAL: Monomial = (1, ())


def _mono_key(m: Monomial):
    return (m[0], tuple((s.name, e) for s, e in m[1]))


def _mono_mul(m1: Monomial, m2: Monomial) -> tuple[int, Monomial]:
    r1, t1 = m1
    r2, t2 = m2
    g = gcd(r1, r2)
    rad = (r1 // g) * (r2 // g)
    if not t2:
        trans = t1
    elif not t1:
        trans = t2
    else:
        exps: dict[Symbol, int] = dict(t1)
        for s, e in t2:
            exps[s] = exps.get(s, 0) + e
        trans = tuple(sorted(((s, e) for s, e in exps.items() if e), key=lambda se: se[0].name))
    return g, (rad, trans)


class SymScalar:
    """Canonical Q-combination of radical/transcendental monomials."""

    __slots__ = ("_terms", "_hash", "_approx")

    def __init__(self, terms: Mapping[Monomial, Rational] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[m] = c
        self._terms: dict[Monomial, Fraction] = clean
        self._hash = None
        self._approx = None

    # constructors ---------------------------------------------------------
    @classmethod
    def rational(cls, q: Rational) -> "SymScalar":
        return cls({ONE_MONOMIAL: q})

    @classmethod
    def sqrt(cls, q: Rational) -> "SymScalar":
        """``sqrt(q)`` for a positive rational ``q``, normalized."""
        q = Fraction(q)
        if q < 0:
            raise ValueError("sqrt of a negative rational is not a real scalar")
        if q == 0:
            return cls()
        # sqrt(p/r) = sqrt(p*r) / r
        k, s = squarefree_split(q.numerator * q.denominator)
        return cls({(s, ()): Fraction(k, q.denominator)})

    @classmethod
    def symbol(cls, sym: Symbol, exponent: int = 1) -> "SymScalar":
        if exponent == 0:
            return cls.rational(1)
        return cls({(1, ((sym, exponent),)): 1})

    @classmethod
    def log_rational(cls, q: Rational) -> "SymScalar":
        """``log(q)`` for positive rational ``q`` as a combination of log-prime symbols."""
        q = Fraction(q)
        if q <= 0:
            raise ValueError("log of a non-positive rational")
        out = {}
        for p, e in sympy.factorint(q.numerator).items():
            out[(1, ((log_symbol(p), 1),))] = Fraction(e)
        for p, e in sympy.factorint(q.denominator).items():
            out[(1, ((log_symbol(p), 1),))] = Fraction(-e)
        return cls(out)

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self._terms.items(), key=lambda mc: _mono_key(mc[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(m == ONE_MONOMIAL for m in self._terms)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self._terms.get(ONE_MONOMIAL, Fraction(0))

    def symbols(self) -> set[Symbol]:
        return {s for m in self._terms for s, _ in m[1]}

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "SymScalar | None":
        if isinstance(other, SymScalar):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return SymScalar.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, CNumber):
                return CNumber(self) + other
            if isinstance(other, (float, complex)):
                return float(self) + other
            return NotImplemented
        terms = dict(self._terms)
        for m, c in o._terms.items():
            terms[m] = terms.get(m, 0) + c
        return SymScalar(terms)

    __radd__ = __add__

    def __neg__(self):
        return SymScalar({m: -c for m, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, CNumber):
                return CNumber(self) - other
            if isinstance(other, (float, complex)):
                return float(self) - other
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, CNumber):
                return CNumber(self) * other
            if isinstance(other, (float, complex)):
                return float(self) * other
            return NotImplemented
        terms: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in o._terms.items():
                g, m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, 0) + c1 * c2 * g
        return SymScalar(terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            if isinstance(k, int):
                return self.inverse() ** (-k)
            return NotImplemented
        return reduce(lambda x, y: x * y, [self] * k, SymScalar.rational(1))

    def inverse(self) -> "SymScalar":
        """Exact reciprocal; only single-term scalars are units of the ring."""
        if len(self._terms) != 1:
            raise ZeroDivisionError(f"{self} is not invertible in the scalar ring")
        (rad, trans), c = next(iter(self._terms.items()))
        # 1/(c sqrt(d) t^e) = sqrt(d)/(c d) t^-e
        return SymScalar({(rad, tuple((s, -e) for s, e in trans)): 1 / (c * rad)})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self * (1 / Fraction(other))
        if isinstance(other, SymScalar):
            return self * other.inverse()
        if isinstance(other, CNumber):
            return CNumber(self) / other
        if isinstance(other, (float, complex)):
            return float(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other / float(self)
            return NotImplemented
        return o * self.inverse()

    # comparison / hashing -------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, CNumber):
                return other == self
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    # shadows --------------------------------------------------------------
    def approx(self) -> mpmath.mpf:
        if self._approx is None:
            with mpmath.workdps(SHADOW_DPS):
                total = mpmath.mpf(0)
                for (rad, trans), c in self.sorted_terms():
                    v = mpmath.mpf(c.numerator) / c.denominator
                    if rad != 1:
                        v *= mpmath.sqrt(rad)
                    for s, e in trans:
                        v *= s.value() ** e
                    total += v
                self._approx = +total
        return self._approx

    def __float__(self):
        return float(self.approx())

    def __complex__(self):
        return complex(float(self))

    # printing -------------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (rad, trans), c in self.sorted_terms():
            factors = []
            if rad != 1:
                factors.append(f"sqrt({rad})")
            for s, e in trans:
                factors.append(s.name if e == 1 else f"{s.name}^{e}")
            mag = abs(c)
            if factors:
                body = "*".join(factors)
                if mag != 1:
                    body = f"{mag}*{body}"
            else:
                body = str(mag)
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"SymScalar({str(self)!r})"


class CNumber:
    """Complex number with exact SymScalar real and imaginary parts."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        self.re = _as_sym(re)
        self.im = _as_sym(im)
        self._hash = None

    @staticmethod
    def _coerce(other) -> "CNumber | None":
        if isinstance(other, CNumber):
            return other
        if isinstance(other, SymScalar) or (
            isinstance(other, (int, Fraction)) and not isinstance(other, bool)
        ):
            return CNumber(other)
        return None

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_real(self) -> bool:
        return self.im.is_zero()

    def is_gaussian_rational(self) -> bool:
        return self.re.is_rational() and self.im.is_rational()

    def symbols(self) -> set[Symbol]:
        return self.re.symbols() | self.im.symbols()

    def conj(self) -> "CNumber":
        return CNumber(self.re, -self.im)

    def norm2(self) -> SymScalar:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "CNumber":
        """Exact reciprocal, available when ``|z|^2`` is a single-term scalar."""
        n = self.norm2()
        if n.is_zero():
            raise ZeroDivisionError("division by zero CNumber")
        ninv = n.inverse()
        return CNumber(self.re * ninv, -self.im * ninv)

    def is_invertible(self) -> bool:
        return len(self.norm2()._terms) == 1

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) + other
            return NotImplemented
        return CNumber(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CNumber(-self.re, -self.im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) - other
            return NotImplemented
        return CNumber(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) * other
            return NotImplemented
        if o.im.is_zero():
            return CNumber(self.re * o.re, self.im * o.re)
        if self.im.is_zero():
            return CNumber(self.re * o.re, self.re * o.im)
        return CNumber(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            q = 1 / Fraction(other)
            return CNumber(self.re * q, self.im * q)
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) / other
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other / complex(self)
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.inverse()
        out = CNumber(1)
        for _ in range(abs(k)):
            out = out * base
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.re, self.im))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def approx(self) -> mpmath.mpc:
        return mpmath.mpc(self.re.approx(), self.im.approx())

    def __abs__(self):
        return abs(complex(self))

    def __str__(self):
        if self.im.is_zero():
            return str(self.re)
        if len(self.im._terms) > 1:
            sign, im = "+", f"({self.im})*i"
        else:
            negative = next(iter(self.im._terms.values())) < 0
            body = str(-self.im if negative else self.im)
            sign, im = ("-" if negative else "+"), ("i" if body == "1" else f"{body}*i")
        if self.re.is_zero():
            return im if sign == "+" else f"-{im}"
        return f"{self.re} {sign} {im}"

    def __repr__(self):
        return f"CNumber({str(self)!r})"


def _as_sym(x) -> SymScalar:
    if isinstance(x, SymScalar):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return SymScalar.rational(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")


ZERO = CNumber(0)
ONE = CNumber(1)
I = CNumber(0, 1)
PI = SymScalar.symbol(PI_SYMBOL)
TWO_PI_I = CNumber(0, 2 * PI)


def q_coordinates(values: Iterable[SymScalar]) -> tuple[list[Monomial], list[list[Fraction]]]:
    """Expand scalars as rational coordinate vectors over their common monomials."""
    values = list(values)
    basis = sorted({m for v in values for m in v._terms}, key=_mono_key)
    rows = [[v._terms.get(m, Fraction(0)) for m in basis] for v in values]
    return basis, rows


def monomial_str(m: Monomial) -> str:
    return str(SymScalar({m: 1}))


# ---------------------------------------------------------------------------
# Literal grammar
#
#   scalar   ::= ["+"|"-"] term (("+"|"-") term)*
#   term     ::= factor (("*"|"/") factor)*
#   factor   ::= atom ["^" ["-"] int]
#   atom     ::= int | "sqrt(" rational ")" | "log(" rational ")" | name
#   rational ::= int ["/" int]
#
# ``3/2*sqrt(2)*pi`` parses as expected since int "/" int is just division.
# Division is exact only by single-term (invertible) factors.
# ---------------------------------------------------------------------------


class ScalarSyntaxError(ValueError):
    def __init__(self, message: str, text: str, column: int):
        super().__init__(f"{message} at column {column}: {text!r}")
        self.text = text
        self.column = column


_TOKEN = _re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


class SymbolRegistry:
    """Name table for transcendental symbols and radical aliases.

    ``pi`` is always present.  Radical aliases let a problem file refer to
    ``sqrt(2)`` by a short name; they expand to the canonical radical.
    """

    def __init__(self):
        self._table: dict[str, SymScalar] = {"pi": PI}
        self.transcendentals: dict[str, Symbol] = {"pi": PI_SYMBOL}
        self.radicals: dict[str, Fraction] = {}

    def declare_transcendental(self, name: str, approx: str) -> Symbol:
        if name in self._table and name != "pi":
            raise ValueError(f"symbol {name!r} declared twice")
        if name == "pi":
            return PI_SYMBOL
        sym = Symbol(name, approx)
        self.transcendentals[name] = sym
        self._table[name] = SymScalar.symbol(sym)
        return sym

    def declare_radical(self, name: str, radicand: Rational) -> SymScalar:
        if name in self._table:
            raise ValueError(f"symbol {name!r} declared twice")
        value = SymScalar.sqrt(radicand)
        self.radicals[name] = Fraction(radicand)
        self._table[name] = value
        return value

    def lookup(self, name: str) -> SymScalar | None:
        return self._table.get(name)

    def parse(self, text: str) -> SymScalar:
        return _Parser(text, self).parse()


class _Parser:
    def __init__(self, text: str, registry: SymbolRegistry):
        self.text = text
        self.reg = registry
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                break
            if m.group(1):
                self.toks.append(("int", m.group(1), m.start(1) + 1))
            elif m.group(2):
                self.toks.append(("name", m.group(2), m.start(2) + 1))
            else:
                self.toks.append(("op", m.group(3), m.start(3) + 1))
            pos = m.end()
        self.i = 0

    def _err(self, msg):
        col = self.toks[self.i][2] if self.i < len(self.toks) else len(self.text) + 1
        raise ScalarSyntaxError(msg, self.text, col)

    def _peek(self, value=None):
        if self.i >= len(self.toks):
            return None
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            return None
        return tok

    def _expect(self, value):
        if self._peek(value) is None:
            self._err(f"expected {value!r}")
        self.i += 1

    def _int(self) -> int:
        tok = self._peek()
        if tok is None or tok[0] != "int":
            self._err("expected integer")
        self.i += 1
        return int(tok[1])

    def _rational(self) -> Fraction:
        num = self._int()
        if self._peek("/"):
            self.i += 1
            den = self._int()
            if den == 0:
                self._err("zero denominator")
            return Fraction(num, den)
        return Fraction(num)

    def parse(self) -> SymScalar:
        if not self.toks:
            raise ScalarSyntaxError("empty scalar", self.text, 1)
        total = SymScalar()
        sign = 1
        if self._peek("+") or self._peek("-"):
            sign = -1 if self.toks[self.i][1] == "-" else 1
            self.i += 1
        total = total + self._term() * sign
        while self._peek("+") or self._peek("-"):
            sign = -1 if self.toks[self.i][1] == "-" else 1
            self.i += 1
            total = total + self._term() * sign
        if self.i != len(self.toks):
            self._err("unexpected token")
        return total

    def _term(self) -> SymScalar:
        value = self._factor()
        while self._peek("*") or self._peek("/"):
            op = self.toks[self.i][1]
            self.i += 1
            f = self._factor()
            if op == "*":
                value = value * f
            else:
                try:
                    value = value * f.inverse()
                except ZeroDivisionError:
                    self._err("division by a non-invertible factor")
        return value

    def _factor(self) -> SymScalar:
        base = self._atom()
        if self._peek("^"):
            self.i += 1
            neg = False
            if self._peek("-"):
                neg = True
                self.i += 1
            e = self._int()
            try:
                base = base ** (-e if neg else e)
            except ZeroDivisionError:
                self._err("negative power of a non-invertible factor")
        return base

    def _atom(self) -> SymScalar:
        tok = self._peek()
        if tok is None:
            self._err("unexpected end of input")
        kind, value, _ = tok
        if kind == "int":
            self.i += 1
            return SymScalar.rational(int(value))
        if kind == "name":
            self.i += 1
            if value in ("sqrt", "log") and self._peek("("):
                self.i += 1
                q = self._rational()
                self._expect(")")
                try:
                    return SymScalar.sqrt(q) if value == "sqrt" else SymScalar.log_rational(q)
                except ValueError as exc:
                    self.i -= 2
                    self._err(str(exc))
            found = self.reg.lookup(value)
            if found is None:
                self.i -= 1
                self._err(f"undeclared symbol {value!r}")
            return found
        self._err(f"unexpected {value!r}")


DEFAULT_REGISTRY = SymbolRegistry()


def parse_scalar(text: str, registry: SymbolRegistry | None = None) -> SymScalar:
    return (registry or DEFAULT_REGISTRY).parse(text)
