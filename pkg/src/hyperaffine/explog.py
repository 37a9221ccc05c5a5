"""Exponential and logarithm on the block lower-triangular cone.

On a block ``mu*I + Nil`` (``Nil`` strictly lower triangular) both series
terminate:

    exp = e^mu * sum_{j < size} Nil^j / j!
    log = (Log mu + 2*pi*i*b) I + sum_{j >= 1} (-1)^(j+1) (Nil/mu)^j / j

so the only transcendental step is the scalar ``e^mu`` / ``Log mu``.  Those
stay exact when the scalar is recognizable: ``Log`` of ``q * zeta`` with
``q^2`` a positive rational and ``zeta`` a root of unity of order dividing 8
or 12 is ``1/2 log(q^2) + i*theta`` (log-prime symbols), and ``exp`` inverts
that.  Anything else falls back to complex floats.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
import scipy.linalg

from .affine import AffineMap, phi, psi, psi_inv
from .errors import BranchError, MembershipError, WitnessError
from .linalg import exact_zeros, is_exact, max_deviation, rel_tol, to_complex
from .normal_form import NormalForm, blocks, k_membership
from .scalars import PI, PI_SYMBOL, CNumber, SymScalar, log_symbol

WITNESS_TOL = 1e-9
BRANCH_TOL = 1e-9
HP_DPS = 40


# ---------------------------------------------------------------------------
# exact scalar exp / log
# ---------------------------------------------------------------------------

def _unit_table() -> dict[Fraction, CNumber]:
    """``theta/pi -> e^{i theta}`` for the multiples of pi/4 and pi/6 in (-1, 1]."""
    half = Fraction(1, 2)
    r2, r3 = SymScalar.sqrt(2) * half, SymScalar.sqrt(3) * half
    first = {
        Fraction(0): (SymScalar.rational(1), SymScalar()),
        Fraction(1, 6): (r3, SymScalar.rational(half)),
        Fraction(1, 4): (r2, r2),
        Fraction(1, 3): (SymScalar.rational(half), r3),
        Fraction(1, 2): (SymScalar(), SymScalar.rational(1)),
    }
    table = {}
    for t, (c, s) in first.items():
        # quadrant images: t, 1 - t, -t, t - 1
        table[t] = CNumber(c, s)
        table[1 - t] = CNumber(-c, s)
        table[-t] = CNumber(c, -s)
        table[t - 1] = CNumber(-c, -s)
    return {t: z for t, z in table.items() if -1 < t <= 1}


UNITS = _unit_table()


def _reduce_angle(t: Fraction) -> Fraction:
    """Representative of ``t`` modulo 2 in (-1, 1]."""
    t = t - 2 * math.floor((t + 1) / 2)
    return t + 2 if t <= -1 else t


def exact_exp(z: CNumber) -> CNumber | None:
    """``e^z`` exactly, or ``None`` when ``z`` is not of the recognized form."""
    angle = Fraction(0)
    if not z.im.is_zero():
        terms = z.im.terms
        if len(terms) != 1:
            return None
        (mono, c), = terms.items()
        if mono != (1, ((PI_SYMBOL, 1),)):
            return None
        angle = _reduce_angle(c)
        if angle not in UNITS:
            return None
    twice = {}
    for mono, c in z.re.terms.items():
        rad, trans = mono
        if rad != 1 or len(trans) != 1 or trans[0][1] != 1:
            return None
        sym = trans[0][0]
        if not sym.name.startswith("log("):
            return None
        p = int(sym.name[4:-1])
        if (2 * c).denominator != 1:
            return None
        twice[p] = int(2 * c)
    # e^{sum k_p log p} with k_p in Z/2: rational part and sqrt part
    ratio = Fraction(1)
    radicand = Fraction(1)
    for p, k2 in twice.items():
        ratio *= Fraction(p) ** (k2 // 2)
        if k2 % 2:
            radicand *= p
    modulus = SymScalar.sqrt(radicand) * ratio
    return CNumber(modulus) * UNITS[angle]


def exact_log(mu: CNumber, branch: int = 0) -> CNumber | None:
    """Principal ``Log mu + 2*pi*i*branch`` exactly, or ``None``."""
    if mu.is_zero():
        raise ZeroDivisionError("log of zero")
    n2 = mu.norm2()
    if not n2.is_rational():
        return None
    q2 = n2.rational_value()
    modulus = SymScalar.sqrt(q2)
    unit = mu * CNumber(modulus).inverse()
    for t, z in UNITS.items():
        if z == unit:
            re = SymScalar.log_rational(q2) * Fraction(1, 2) if q2 != 1 else SymScalar()
            return CNumber(re, PI * (t + 2 * branch))
    return None


def two_pi_i(k: int, exact: bool):
    return CNumber(0, PI * (2 * k)) if exact else 2j * math.pi * k


# ---------------------------------------------------------------------------
# exp_k / log_k
# ---------------------------------------------------------------------------

def _block_series_exact(nil: np.ndarray, coeffs: Sequence[Fraction | CNumber]) -> np.ndarray:
    """sum_j coeffs[j] * nil^j for a nilpotent exact block."""
    size = nil.shape[0]
    out = exact_zeros((size, size))
    power = exact_zeros((size, size))
    for i in range(size):
        power[i, i] = CNumber(1)
    for j, c in enumerate(coeffs):
        if j:
            power = power.dot(nil)
        if all(x.is_zero() for x in power.flat):
            break
        out = out + power * c
    return out


def _block_series_float(nil: np.ndarray, coeffs) -> np.ndarray:
    size = nil.shape[0]
    out = np.zeros((size, size), dtype=complex)
    power = np.eye(size, dtype=complex)
    for j, c in enumerate(coeffs):
        if j:
            power = power @ nil
        out = out + c * power
    return out


def _require_member(M, eta, invertible):
    if not k_membership(M, eta, invertible=invertible):
        raise MembershipError(f"matrix is not in the cone for eta={tuple(eta)}")


def exp_k(N: np.ndarray, eta: Sequence[int]) -> np.ndarray:
    """Exponential of a cone element, exact when every block scalar allows it."""
    _require_member(N, eta, invertible=False)
    if is_exact(N):
        scalars = [exact_exp(N[s, s]) for s, _ in blocks(eta)]
        if all(e is not None for e in scalars):
            out = exact_zeros(N.shape)
            for (s, e), emu in zip(blocks(eta), scalars):
                size = e - s
                nil = N[s:e, s:e].copy()
                for i in range(size):
                    nil[i, i] = CNumber(0)
                coeffs = [emu * Fraction(1, math.factorial(j)) for j in range(size)]
                out[s:e, s:e] = _block_series_exact(nil, coeffs)
            return out
    Nf = to_complex(N)
    out = np.zeros(Nf.shape, dtype=complex)
    for s, e in blocks(eta):
        size = e - s
        mu = Nf[s, s]
        nil = Nf[s:e, s:e] - mu * np.eye(size)
        emu = cmath.exp(mu)
        out[s:e, s:e] = _block_series_float(nil, [emu / math.factorial(j) for j in range(size)])
    return out


def log_k(M: np.ndarray, eta: Sequence[int], branches: Sequence[int] | None = None) -> np.ndarray:
    """Logarithm in the cone; ``branches[k]`` adds ``2*pi*i*branches[k]`` on block k."""
    _require_member(M, eta, invertible=True)
    branches = list(branches) if branches is not None else [0] * len(eta)
    if len(branches) != len(eta):
        raise ValueError("one branch integer per block is required")
    if is_exact(M):
        logs = [exact_log(M[s, s], b) for (s, _), b in zip(blocks(eta), branches)]
        if all(x is not None for x in logs):
            out = exact_zeros(M.shape)
            for (s, e), lmu in zip(blocks(eta), logs):
                size = e - s
                mu_inv = M[s, s].inverse()
                nil = M[s:e, s:e].copy()
                for i in range(size):
                    nil[i, i] = CNumber(0)
                nil = nil * mu_inv
                coeffs = [lmu] + [Fraction((-1) ** (j + 1), j) for j in range(1, size)]
                out[s:e, s:e] = _block_series_exact(nil, coeffs)
            return out
    Mf = to_complex(M)
    out = np.zeros(Mf.shape, dtype=complex)
    for (s, e), b in zip(blocks(eta), branches):
        size = e - s
        mu = Mf[s, s]
        nil = (Mf[s:e, s:e] - mu * np.eye(size)) / mu
        coeffs = [cmath.log(mu) + 2j * math.pi * b] + [(-1) ** (j + 1) / j for j in range(1, size)]
        out[s:e, s:e] = _block_series_float(nil, coeffs)
    return out


def psi_adjust(N: np.ndarray, tol: float = BRANCH_TOL) -> tuple[np.ndarray, int]:
    """Subtract ``2*pi*i*k*I`` so that the (1,1) entry vanishes; returns ``(N', k)``."""
    corner = N[0, 0]
    if is_exact(N):
        if corner.is_zero():
            return N, 0
        k = None
        if corner.re.is_zero():
            terms = corner.im.terms
            if len(terms) == 1:
                (mono, c), = terms.items()
                if mono == (1, ((PI_SYMBOL, 1),)) and (c / 2).denominator == 1:
                    k = int(c / 2)
        if k is None:
            raise BranchError(f"(1,1) entry {corner} is not an integer multiple of 2*pi*i")
        shift = two_pi_i(k, True)
        out = N.copy()
        for i in range(N.shape[0]):
            out[i, i] = out[i, i] - shift
        return out, k
    c = complex(corner)
    k = round(c.imag / (2 * math.pi))
    if abs(c - 2j * math.pi * k) > rel_tol(tol, np.array([c])):
        raise BranchError(f"(1,1) entry {c} is not an integer multiple of 2*pi*i")
    out = np.array(N, dtype=complex)
    if k:
        out = out - 2j * math.pi * k * np.eye(N.shape[0])
    out[0, 0] = 0.0
    return out, k


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class LogWitness:
    """``fprime`` with ``exp(psi(fprime)) = phi(f)``."""

    f: AffineMap
    fprime: AffineMap
    branch_shifts: list[int]
    supplied: bool = False
    deviation: float = 0.0
    notes: list[str] = field(default_factory=list)


def _hp(x):
    return x.approx() if isinstance(x, CNumber) else mpmath.mpc(complex(x))


def exp_deviation(f: AffineMap, fprime: AffineMap, tol: float | None = None) -> float:
    """Max entry deviation between ``expm(psi(f'))`` and ``phi(f)``.

    Computed in float first.  Scaling and squaring loses digits on large
    non-normal nilpotent parts, so a float result above ``tol`` (relative)
    is recomputed at ``HP_DPS`` digits before being trusted.
    """
    target = to_complex(phi(f))
    dev = max_deviation(scipy.linalg.expm(to_complex(psi(fprime))), target)
    if tol is None or dev <= rel_tol(tol, target):
        return dev
    N, F = psi(fprime), phi(f)
    m = N.shape[0]
    with mpmath.workdps(HP_DPS):
        E = mpmath.expm(mpmath.matrix([[_hp(N[i, j]) for j in range(m)] for i in range(m)]))
        return float(max(abs(E[i, j] - _hp(F[i, j])) for i in range(m) for j in range(m)))


def log_witness(
    f: AffineMap, nf: NormalForm, branches: Sequence[int] | None = None, tol: float = WITNESS_TOL
) -> LogWitness:
    """Conjugate into the cone, take log_k, conjugate back, drop the 2*pi*i*k*I part."""
    K = nf.conjugate(phi(f))
    L = log_k(K, nf.eta, branches)
    N = nf.unconjugate(L)
    N, k = psi_adjust(N)
    fprime = psi_inv(N)
    shifts = list(branches) if branches is not None else [0] * nf.r
    shifts = [b - k for b in shifts]
    w = LogWitness(f, fprime, shifts)
    w.deviation = exp_deviation(f, fprime, tol)
    if w.deviation > rel_tol(tol, to_complex(phi(f))):
        raise WitnessError(-1, w.deviation, "computed logarithm failed verification")
    return w


def verify_witness(
    f: AffineMap, fprime: AffineMap, nf: NormalForm | None = None, tol: float = WITNESS_TOL, index: int = 0
) -> LogWitness:
    """Check a supplied ``fprime``: float exponential at ``tol``, cone membership."""
    if fprime.n != f.n:
        raise WitnessError(index, float("inf"), "dimension mismatch")
    dev = exp_deviation(f, fprime, tol)
    if dev > rel_tol(tol, to_complex(phi(f))):
        raise WitnessError(index, dev)
    shifts: list[int] = []
    if nf is not None:
        C = nf.conjugate(psi(fprime))
        if not k_membership(C, nf.eta, tol=tol):
            raise WitnessError(index, dev, "psi(f') is not in P K P^-1")
        for s, _ in blocks(nf.eta):
            mu = complex(C[s, s])
            shifts.append(round((mu.imag - cmath.log(complex(nf.conjugate(phi(f))[s, s])).imag) / (2 * math.pi)))
    return LogWitness(f, fprime, shifts, supplied=True, deviation=dev)
