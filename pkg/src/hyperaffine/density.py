"""Density of finitely generated additive subgroups of C^n.

Given vectors ``u_1..u_q`` in C^n, stack them as columns of the real
``2n x q`` matrix ``M = [Re u_k; Im u_k]``.  The group ``sum Z u_k`` is dense
iff for every nonzero integer row ``s`` the ``(2n+1) x q`` matrix ``[M; s]``
has rank ``2n + 1``; equivalently ``rank M = 2n`` and the row space of ``M``
contains no nonzero integer vector.

Exact route: pick ``2n`` pivot columns with a nonzero minor, form one null
vector of ``M`` per remaining column from signed maximal minors (no division
needed), and note ``s`` lies in the row space iff ``s . x = 0`` for all of
them.  Expanding those equations over the Q-independent monomials gives a
homogeneous rational system in ``s``; density holds iff it has only the zero
solution.

Numeric route: singular values for the rank, then LLL on the lattice spanned
by ``(e_i, C * X[i, :])`` with ``X`` a float null basis, looking for short
integer vectors almost orthogonal to the null space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import mpmath
import numpy as np
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix

from .explog import LogWitness
from .linalg import (
    MinorCache,
    integer_primitive,
    is_exact,
    rational_nullspace,
    to_complex,
)
from .normal_form import NormalForm, basis_vector_e
from .scalars import TWO_PI_I, SymScalar, monomial_str, q_coordinates

RANK_RTOL = 1e-8
LATTICE_PRECISION = 12
LATTICE_BOUND = 10**6

INDEPENDENCE_ASSUMPTION = (
    "the transcendental symbols {names} are algebraically independent over the "
    "field generated by the square roots"
)
PI_ONLY_NOTE = "only pi appears, and pi is transcendental, so no independence assumption is needed"
N_VS_Z_NOTE = (
    "decision uses the integer (Z-span) rank criterion; the semigroup side has N "
    "coefficients on the witness vectors, checked only heuristically by the simulator"
)


@dataclass(eq=False)
class DensityInstance:
    """Generators ``f'_k(w0)`` (N-coefficients) and ``2*pi*i*p2(P e^(k))`` (Z)."""

    n: int
    gens_semigroup: list[np.ndarray]
    gens_group: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        for v in list(self.gens_semigroup) + list(self.gens_group):
            if np.shape(v) != (self.n,):
                raise ValueError(f"generator of shape {np.shape(v)} in dimension {self.n}")

    @property
    def vectors(self) -> list[np.ndarray]:
        return list(self.gens_semigroup) + list(self.gens_group)

    @property
    def p(self) -> int:
        return len(self.gens_semigroup)

    @property
    def q(self) -> int:
        return len(self.gens_semigroup) + len(self.gens_group)

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.vectors)

    def symbol_names(self) -> list[str]:
        """Transcendental symbols appearing in an exact instance."""
        if not self.exact:
            return []
        return sorted({s.name for v in self.vectors for x in v for s in x.symbols()})

    def needs_independence(self) -> bool:
        return any(name != "pi" for name in self.symbol_names())


def independence_assumptions(inst: DensityInstance) -> list[str]:
    names = inst.symbol_names()
    if not names:
        return []
    if not inst.needs_independence():
        return [PI_ONLY_NOTE]
    return [INDEPENDENCE_ASSUMPTION.format(names=", ".join(names))]


@dataclass(eq=False)
class PropertyDMatrix:
    """Real ``2n x q`` matrix (Re rows then Im rows); the integer row is appended per query."""

    n: int
    p: int
    M: np.ndarray  # object array of SymScalar, or float64

    @property
    def q(self) -> int:
        return self.M.shape[1]

    @property
    def exact(self) -> bool:
        return self.M.dtype == object

    def with_row(self, s: Sequence) -> np.ndarray:
        if len(s) != self.q:
            raise ValueError("integer row has the wrong length")
        if self.exact:
            row = np.array([SymScalar.rational(int(x)) for x in s], dtype=object)
        else:
            row = np.asarray(s, dtype=float)
        return np.vstack([self.M, row[None, :]])

    def labels(self) -> list[str]:
        return [f"s{k + 1}" for k in range(self.p)] + [f"t{k + 2}" for k in range(self.q - self.p)]

    def to_float(self) -> np.ndarray:
        if self.exact:
            return np.vectorize(float, otypes=[float])(self.M) if self.M.size else np.zeros(self.M.shape)
        return self.M


@dataclass(eq=False)
class DensityVerdict:
    outcome: str  # "Dense" | "NotDense" | "Inconclusive"
    mode: str  # "exact" | "numeric"
    reason: str = ""
    witness: tuple[int, ...] | None = None
    rank: int | None = None
    heuristic: bool = False
    certificate: dict = field(default_factory=dict)
    assumptions: list[str] = field(default_factory=list)

    @property
    def dense(self) -> bool:
        return self.outcome == "Dense"


def q_w0_generators(witnesses: Sequence[LogWitness], nf: NormalForm) -> DensityInstance:
    w0 = nf.w0
    n = len(w0)
    semigroup = []
    for w in witnesses:
        if w.fprime.n != n:
            raise ValueError("witness dimension does not match w0")
        fp = w.fprime
        if not (fp.exact and nf.exact):
            fp, w0v = fp.to_float(), to_complex(w0)
        else:
            w0v = w0
        semigroup.append(fp(w0v))
    group = []
    for k in range(2, nf.r + 1):
        e = basis_vector_e(k, nf.eta, exact=nf.exact)
        v = nf.P.dot(e)[1:]
        if nf.exact:
            group.append(np.array([TWO_PI_I * x for x in v], dtype=object))
        else:
            group.append(2j * np.pi * to_complex(v))
    return DensityInstance(n, semigroup, group)


def assemble_property_d(inst: DensityInstance) -> PropertyDMatrix:
    n, q = inst.n, inst.q
    if inst.exact:
        M = np.empty((2 * n, q), dtype=object)
        for k, v in enumerate(inst.vectors):
            for i, x in enumerate(v):
                M[i, k] = x.re
                M[n + i, k] = x.im
    else:
        M = np.zeros((2 * n, q))
        for k, v in enumerate(inst.vectors):
            c = to_complex(v)
            M[:n, k] = c.real
            M[n:, k] = c.imag
    return PropertyDMatrix(n, inst.p, M)


# ---------------------------------------------------------------------------
# exact decision
# ---------------------------------------------------------------------------

def _exact_rank(pd: PropertyDMatrix, cache: MinorCache) -> tuple[list[int], list[int]]:
    """Rows/columns of a maximal nonzero minor, grown by bordering.

    Candidates are tried in order of decreasing float |det| so the exact
    determinant is usually nonzero on the first try.
    """
    Mf = pd.to_float()
    m, q = Mf.shape
    rows: list[int] = []
    cols: list[int] = []
    while True:
        cands = []
        for i, j in product(range(m), range(q)):
            if i in rows or j in cols:
                continue
            R, C = sorted(rows + [i]), sorted(cols + [j])
            cands.append((-abs(np.linalg.det(Mf[np.ix_(R, C)])), i, j))
        cands.sort()
        for _, i, j in cands:
            if not cache.det(sorted(rows + [i]), sorted(cols + [j])).is_zero():
                rows.append(i)
                cols.append(j)
                break
        else:
            return sorted(rows), sorted(cols)


def null_vectors(
    pd: PropertyDMatrix, cache: MinorCache, pivots: Sequence[int], rows: Sequence[int] | None = None
) -> list[list[SymScalar]]:
    """One null vector per non-pivot column, entries are signed maximal minors.

    ``rows``/``pivots`` index a nonzero minor of full rank; the rows it uses
    span the whole row space, so their kernel is the kernel of ``M``.
    """
    q = pd.M.shape[1]
    rows = list(range(pd.M.shape[0])) if rows is None else list(rows)
    out = []
    for j in range(q):
        if j in pivots:
            continue
        support = sorted(list(pivots) + [j])
        x = [SymScalar() for _ in range(q)]
        for pos, c in enumerate(support):
            minor = cache.det(rows, [d for d in support if d != c])
            x[c] = -minor if pos % 2 else minor
        out.append(x)
    return out


def _integer_rowspace(xs: list[list[SymScalar]], q: int) -> tuple[list[str], list[list[Fraction]], list]:
    """Monomial labels, rational system and its solution basis for ``s . x = 0``."""
    labels, eqs = [], []
    for x in xs:
        monos, coords = q_coordinates(x)
        for t, mono in enumerate(monos):
            eqs.append([coords[c][t] for c in range(q)])
            labels.append(monomial_str(mono))
    return labels, eqs, rational_nullspace(eqs, q)


def _short_integer_vector(basis: list[list[Fraction]]) -> list[int]:
    ints = [integer_primitive(v) for v in basis]
    if len(ints) > 1:
        reduced = DomainMatrix([[ZZ(x) for x in v] for v in ints], (len(ints), len(ints[0])), ZZ).lll()
        ints = [[int(x) for x in row] for row in reduced.to_list()]
    best = min((v for v in ints if any(v)), key=lambda v: (max(abs(x) for x in v), sum(abs(x) for x in v)))
    return integer_primitive(best)


def _unit(q: int) -> tuple[int, ...]:
    return tuple(1 if k == 0 else 0 for k in range(q))


def decide_dense_exact(inst: DensityInstance) -> DensityVerdict:
    if not inst.exact:
        return DensityVerdict("Inconclusive", "exact", "instance has float entries outside the scalar tower")
    pd = assemble_property_d(inst)
    n, q = inst.n, inst.q
    m = 2 * n
    assumptions = independence_assumptions(inst) + [N_VS_Z_NOTE]
    if q == 0:
        return DensityVerdict("NotDense", "exact", "column deficit", (), 0, assumptions=assumptions)
    cache = MinorCache(pd.M)
    rows, pivots = _exact_rank(pd, cache)
    rank = len(pivots)
    xs = null_vectors(pd, cache, pivots, rows)
    labels, eqs, sols = _integer_rowspace(xs, q)
    certificate = {
        "pivot_rows": list(rows),
        "pivot_columns": list(pivots),
        "null_vectors": [[str(v) for v in x] for x in xs],
        "monomials": labels,
        "rational_system": [[str(c) for c in row] for row in eqs],
    }
    if q == m + 1 and rank == m:
        certificate["delta_coefficients"] = [str(v) for v in xs[0]]
    if rank < m or q <= m:
        # rank [M; s] <= min(rank + 1, q) < 2n + 1 for every s; prefer a witness
        # from the row space (rank unchanged), else e1
        reason = "column deficit" if q <= m else "rank deficit"
        witness = tuple(_short_integer_vector(sols)) if sols else _unit(q)
        return DensityVerdict("NotDense", "exact", reason, witness, rank,
                              certificate=certificate, assumptions=assumptions)
    if not sols:
        return DensityVerdict(
            "Dense", "exact", "rational system in s has only the zero solution", None, rank,
            certificate=certificate, assumptions=assumptions,
        )
    witness = tuple(_short_integer_vector(sols))
    return DensityVerdict(
        "NotDense", "exact", "integer vector in the row space", witness, rank,
        certificate=certificate, assumptions=assumptions,
    )


def delta_coefficients(inst: DensityInstance) -> list[SymScalar]:
    """Cofactors of ``det [M; s]`` along the integer row (requires ``q = 2n + 1``)."""
    pd = assemble_property_d(inst)
    m, q = pd.M.shape
    if q != m + 1 or not pd.exact:
        raise ValueError("determinant form needs an exact square [M; s]")
    cache = MinorCache(pd.M)
    rows = list(range(m))
    out = []
    for c in range(q):
        minor = cache.det(rows, [d for d in range(q) if d != c])
        out.append(-minor if (m + c) % 2 else minor)
    return out


def replay_certificate(inst: DensityInstance, verdict: DensityVerdict) -> bool:
    """Recheck a Dense exact verdict: ``M x = 0`` for each null vector, pivot minor
    nonzero, and the monomial system has trivial rational kernel."""
    if verdict.mode != "exact" or verdict.outcome != "Dense":
        return False
    pd = assemble_property_d(inst)
    m, q = pd.M.shape
    cache = MinorCache(pd.M)
    pivots = verdict.certificate["pivot_columns"]
    if len(pivots) != m or cache.det(range(m), pivots).is_zero():
        return False
    xs = null_vectors(pd, cache, pivots)
    if len(xs) != q - m:
        return False
    for x in xs:
        for i in range(m):
            acc = SymScalar()
            for c in range(q):
                acc = acc + pd.M[i, c] * x[c]
            if not acc.is_zero():
                return False
    return not _integer_rowspace(xs, q)[2]


def witness_is_valid(inst: DensityInstance, s: Sequence[int], same_rank: bool = False) -> bool:
    """Exact check that ``rank [M; s] < 2n + 1`` (the rank condition fails at ``s``).

    With ``same_rank`` the stronger ``rank [M; s] = rank M`` is required.
    """
    pd = assemble_property_d(inst)
    m = pd.M.shape[0]
    if not any(s):
        return False
    r_ext = exact_rank_of(pd.with_row(s))
    if same_rank:
        return r_ext == exact_rank_of(pd.M)
    return r_ext < m + 1


def exact_rank_of(M) -> int:
    pd = PropertyDMatrix(0, 0, M)
    return len(_exact_rank(pd, MinorCache(M))[1])


# ---------------------------------------------------------------------------
# numeric decision
# ---------------------------------------------------------------------------

def _hp_matrix(inst: DensityInstance):
    """50-digit mpmath version of M when the instance is exact, else None."""
    if not inst.exact:
        return None
    pd = assemble_property_d(inst)
    m, q = pd.M.shape
    with mpmath.workdps(50):
        return mpmath.matrix([[pd.M[i, j].approx() for j in range(q)] for i in range(m)])


def _hp_relative_sigma(Mhp, s) -> float:
    """Smallest singular value of [M; s/|s|] over the largest of M, at 50 digits."""
    with mpmath.workdps(50):
        m, q = Mhp.rows, Mhp.cols
        norm = mpmath.sqrt(sum(mpmath.mpf(x) ** 2 for x in s))
        ext = mpmath.matrix(m + 1, q)
        for i in range(m):
            for j in range(q):
                ext[i, j] = Mhp[i, j]
        for j in range(q):
            ext[m, j] = mpmath.mpf(s[j]) / norm
        sig_ext = mpmath.svd_r(ext, compute_uv=False)
        sig = mpmath.svd_r(Mhp, compute_uv=False)
        vals = sorted([abs(x) for x in sig_ext], reverse=True)
        smax = max(abs(x) for x in sig)
        target = vals[m] if len(vals) > m else mpmath.mpf(0)
        return float(target / smax)


def decide_dense_numeric(
    inst: DensityInstance,
    precision: int = LATTICE_PRECISION,
    bound: int = LATTICE_BOUND,
    rank_rtol: float = RANK_RTOL,
) -> DensityVerdict:
    n, q = inst.n, inst.q
    m = 2 * n
    assumptions = [N_VS_Z_NOTE, "float arithmetic; a Dense answer is heuristic"]
    if q < m + 1:
        return DensityVerdict("NotDense", "numeric", "column deficit", _unit(q) if q else (), None,
                              assumptions=assumptions)
    Mf = assemble_property_d(inst).to_float()
    _, sig, vh = np.linalg.svd(Mf)
    smax = sig[0] if sig.size else 0.0
    if smax == 0.0:
        return DensityVerdict("NotDense", "numeric", "rank deficit", _unit(q), 0, assumptions=assumptions)
    rel = sig / smax
    rank = int(np.sum(rel > rank_rtol))
    gray = [x for x in rel if rank_rtol / 100 < x <= rank_rtol * 100]
    if gray:
        return DensityVerdict("Inconclusive", "numeric", f"singular value {min(gray):.3g} near the rank threshold",
                              None, rank, assumptions=assumptions)
    if rank < m:
        return DensityVerdict("NotDense", "numeric", "rank deficit", _unit(q), rank, assumptions=assumptions)
    X = vh[m:].T  # q x d orthonormal null basis
    scale = 10 ** precision
    lattice = [[ZZ(1 if i == k else 0) for k in range(q)] + [ZZ(int(round(scale * X[i, j]))) for j in range(X.shape[1])]
               for i in range(q)]
    reduced = DomainMatrix(lattice, (q, q + X.shape[1]), ZZ).lll().to_list()
    Mhp = _hp_matrix(inst)
    certificate = {"lattice_scale": f"1e{precision}", "bound": bound}
    # genuine relations leave a residual at rounding level; spurious short
    # vectors sit near 1/scale
    hp_thresh, lp_thresh, spurious = 1e-30, 1e-3 / scale, 1e-1 / scale
    undecided = None
    for row in reduced:
        s = [int(x) for x in row[:q]]
        if not any(s) or max(abs(x) for x in s) > bound:
            continue
        sn = np.asarray(s, dtype=float)
        resid = float(np.linalg.norm(X.T @ sn) / np.linalg.norm(sn))
        if Mhp is not None:
            sigma = _hp_relative_sigma(Mhp, s)
            if sigma <= hp_thresh:
                certificate["relative_sigma"] = sigma
                return DensityVerdict("NotDense", "numeric", "integer relation verified at 50 digits",
                                      tuple(integer_primitive(s)), rank, certificate=certificate,
                                      assumptions=assumptions)
            continue
        if resid <= lp_thresh:
            certificate["relative_residual"] = resid
            return DensityVerdict("NotDense", "numeric", "integer relation verified in float",
                                  tuple(integer_primitive(s)), rank, certificate=certificate,
                                  assumptions=assumptions)
        if resid <= spurious and undecided is None:
            undecided = (s, resid)
    if undecided is not None:
        return DensityVerdict("Inconclusive", "numeric",
                              f"candidate relation {undecided[0]} has residual {undecided[1]:.3g}",
                              None, rank, certificate=certificate, assumptions=assumptions)
    certificate["confidence"] = f"no integer relation with |s| <= {bound} at scale 1e{precision}"
    return DensityVerdict("Dense", "numeric", "no short integer relation found", None, rank, heuristic=True,
                          certificate=certificate, assumptions=assumptions)


def decide_dense(inst: DensityInstance, mode: str = "auto", **numeric_opts) -> DensityVerdict:
    if mode == "exact" or (mode == "auto" and inst.exact):
        return decide_dense_exact(inst)
    return decide_dense_numeric(inst, **numeric_opts)
