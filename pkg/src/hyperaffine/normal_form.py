"""Block lower-triangular normal form of a commuting homogenized family.

A partition ``eta = (n_1, ..., n_r)`` of ``n + 1`` describes the cone of
block-diagonal matrices whose blocks are lower triangular with a constant
diagonal.  :func:`find_normal_form` returns ``P`` with first row
``(1, 0, ..., 0)`` such that ``P^-1 phi(f) P`` lies in that cone for every
generator ``f``.

The construction splits C^{n+1} into joint generalized eigenspaces of the
family, builds a kernel flag inside each one (vectors killed by every
nilpotent part modulo the previous level), and places the class with joint
eigenvalue (1, ..., 1) first with a leading vector whose first coordinate is
1.  Exact arithmetic is used when every entry and every eigenvalue is a
Gaussian rational; otherwise the float path runs with the tolerances below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .affine import AffineMap, check_abelian, phi, phi_inv
from .errors import MembershipError, NotAbelian, NotInvertible, NumericalFailure
from .linalg import (
    ExactUnsupported,
    all_gaussian_rational,
    exact_eye,
    exact_inverse,
    exact_nullspace,
    exact_rank,
    exact_rref,
    exact_zeros,
    float_nullspace,
    float_orth,
    is_exact,
    is_zero_entry,
    rel_tol,
    to_complex,
)
from .scalars import CNumber

EIG_TOL = 1e-7
MEMBERSHIP_TOL = 1e-9
CLUSTER_MARGIN = 2.0

Partition = tuple[int, ...]


def blocks(eta: Sequence[int]) -> list[tuple[int, int]]:
    """``[(start, stop), ...]`` index ranges of the blocks of ``eta``."""
    out, start = [], 0
    for size in eta:
        out.append((start, start + size))
        start += size
    return out


def validate_partition(eta: Sequence[int], m: int) -> Partition:
    eta = tuple(int(x) for x in eta)
    if not eta or any(x < 1 for x in eta) or sum(eta) != m:
        raise ValueError(f"{eta} is not a partition of {m} into positive parts")
    return eta


def block_diagonals(M, eta: Sequence[int]) -> list:
    return [M[s, s] for s, _ in blocks(eta)]


def k_membership(M, eta: Sequence[int], invertible: bool = False, tol: float | None = None) -> bool:
    """Whether ``M`` is block diagonal with lower-triangular constant-diagonal blocks.

    Exact matrices are tested exactly; float matrices with threshold
    ``tol * (1 + max|M|)``.  ``invertible`` additionally requires every block
    diagonal to be nonzero.
    """
    m = M.shape[0]
    if M.shape != (m, m) or sum(eta) != m:
        return False
    thresh = None if is_exact(M) else rel_tol(MEMBERSHIP_TOL if tol is None else tol, M)
    owner = np.empty(m, dtype=int)
    for k, (s, e) in enumerate(blocks(eta)):
        owner[s:e] = k
    for i in range(m):
        for j in range(m):
            if j > i or owner[i] != owner[j]:
                if not is_zero_entry(M[i, j], thresh):
                    return False
    for s, e in blocks(eta):
        mu = M[s, s]
        for i in range(s + 1, e):
            if not is_zero_entry(M[i, i] - mu, thresh):
                return False
        if invertible and is_zero_entry(mu, thresh):
            return False
    return True


def finest_partition(mats, tol: float | None = None) -> Partition | None:
    """Finest ``eta`` putting every matrix in the cone, or ``None`` if none does."""
    if not mats:
        return None
    m = mats[0].shape[0]
    reach = list(range(m))
    for M in mats:
        thresh = None if is_exact(M) else rel_tol(MEMBERSHIP_TOL if tol is None else tol, M)
        for i in range(m):
            for j in range(m):
                if i == j or is_zero_entry(M[i, j], thresh):
                    continue
                if j > i:
                    return None
                reach[j] = max(reach[j], i)
    eta, start = [], 0
    while start < m:
        end = reach[start]
        k = start
        while k <= end:
            end = max(end, reach[k])
            k += 1
        eta.append(end - start + 1)
        start = end + 1
    eta = tuple(eta)
    if all(k_membership(M, eta, tol=tol) for M in mats):
        return eta
    return None


def basis_vector_e(k: int, eta: Sequence[int], exact: bool = True) -> np.ndarray:
    """Unit vector at the first coordinate of block ``k`` (1-based)."""
    if not 1 <= k <= len(eta):
        raise IndexError(f"block index {k} out of range 1..{len(eta)}")
    m = sum(eta)
    v = exact_zeros((m,)) if exact else np.zeros(m, dtype=complex)
    v[blocks(eta)[k - 1][0]] = CNumber(1) if exact else 1.0
    return v


def leading_vector(eta: Sequence[int], exact: bool = True) -> np.ndarray:
    """``u0``: ones at the first coordinate of every block."""
    m = sum(eta)
    v = exact_zeros((m,)) if exact else np.zeros(m, dtype=complex)
    for s, _ in blocks(eta):
        v[s] = CNumber(1) if exact else 1.0
    return v


@dataclass(frozen=True, eq=False)
class NormalForm:
    P: np.ndarray
    Pinv: np.ndarray
    eta: Partition
    method: str = "identity"
    notes: list[str] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.eta)

    @property
    def exact(self) -> bool:
        return is_exact(self.P)

    @property
    def u0(self) -> np.ndarray:
        return leading_vector(self.eta, self.exact)

    @property
    def v0(self) -> np.ndarray:
        return self.P.dot(self.u0)

    @property
    def w0(self) -> np.ndarray:
        return self.v0[1:]

    @property
    def varphi(self) -> AffineMap:
        return phi_inv(self.P)

    def conjugate(self, M) -> np.ndarray:
        """``P^-1 M P`` (float if either side is float)."""
        if self.exact and is_exact(M):
            return self.Pinv.dot(M).dot(self.P)
        return to_complex(self.Pinv) @ to_complex(M) @ to_complex(self.P)

    def unconjugate(self, K) -> np.ndarray:
        if self.exact and is_exact(K):
            return self.P.dot(K).dot(self.Pinv)
        return to_complex(self.P) @ to_complex(K) @ to_complex(self.Pinv)

    def holds_for(self, fs: Sequence[AffineMap], tol: float | None = None) -> bool:
        return all(
            k_membership(self.conjugate(phi(f)), self.eta, invertible=True, tol=tol) for f in fs
        )


def _identity_form(m: int, eta: Partition, method="identity") -> NormalForm:
    return NormalForm(exact_eye(m), exact_eye(m), eta, method)


def normal_form_from(
    fs: Sequence[AffineMap], P, eta: Sequence[int], tol: float | None = None
) -> NormalForm:
    """Validate a user-supplied ``(P, eta)``."""
    m = fs[0].n + 1
    eta = validate_partition(eta, m)
    P = np.asarray(P)
    phi_inv(P)  # shape check: first row (1, 0, ..., 0)
    if is_exact(P):
        try:
            Pinv = exact_inverse(P)
        except (ExactUnsupported, ZeroDivisionError) as exc:
            raise MembershipError(f"supplied P cannot be inverted exactly: {exc}") from exc
    else:
        Pinv = np.linalg.inv(P)
    nf = NormalForm(P, Pinv, eta, "supplied")
    for k, f in enumerate(fs):
        if not k_membership(nf.conjugate(phi(f)), eta, invertible=True, tol=tol):
            raise MembershipError(f"supplied P does not put generator {k} in the cone for eta={eta}")
    return nf


# ---------------------------------------------------------------------------
# eigenvalue clustering
# ---------------------------------------------------------------------------

def _cluster(ev: np.ndarray, norm: float, eig_tol: float, margin: float = 0.0) -> list[tuple[complex, int]]:
    """Single-linkage clusters of eigenvalues as ``(mean, multiplicity)``.

    Eigenvalues of a size-m Jordan block perturbed at rounding level
    spread over a radius ~ (eps*|R|)^(1/m), so the linkage radius is the
    larger of that and ``eig_tol * max(1, |lambda|)``.  The mean of a
    perturbed block is accurate to O(eps).  With ``margin > 0`` two
    clusters closer than ``margin`` linkage radii are reported as ambiguous.
    """
    d = len(ev)
    spread = (max(d, 1) * 1e-12 * (1.0 + norm)) ** (1.0 / max(d, 1))
    parent = list(range(d))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def radius(i, j):
        return max(spread, eig_tol * max(1.0, abs(ev[i]), abs(ev[j])))

    for i in range(d):
        for j in range(i + 1, d):
            if abs(ev[i] - ev[j]) <= radius(i, j):
                parent[find(i)] = find(j)
    if margin:
        for i in range(d):
            for j in range(i + 1, d):
                gap = abs(ev[i] - ev[j])
                if find(i) != find(j) and gap <= margin * radius(i, j):
                    raise NumericalFailure(
                        f"eigenvalues {ev[i]:.6g} and {ev[j]:.6g} are too close to separate reliably",
                        gap=float(gap),
                    )
    groups: dict[int, list[int]] = {}
    for i in range(d):
        groups.setdefault(find(i), []).append(i)
    out = [(complex(np.mean(ev[idx])), len(idx)) for idx in groups.values()]
    out.sort(key=lambda lm: (round(lm[0].real, 9), round(lm[0].imag, 9)))
    return out


class _FloatOps:
    exact = False

    def __init__(self, eig_tol: float, scale: float = 0.0):
        self.eig_tol = eig_tol
        # restrictions inherit rounding from the ambient matrices, so cluster
        # radii are sized by the largest ambient norm
        self.scale = scale

    def eye(self, m):
        return np.eye(m, dtype=complex)

    def restrict(self, A, W):
        return W.conj().T @ A @ W

    def clusters(self, R):
        ev = np.linalg.eigvals(R)
        return _cluster(ev, max(float(np.linalg.norm(R)), self.scale), self.eig_tol, margin=CLUSTER_MARGIN)

    def gen_eigenspace(self, R, lam, mult):
        # reordered Schur form: the leading Schur vectors span the invariant
        # subspace of the cluster; stable where powers of (R - lam) are not
        ev = np.linalg.eigvals(R)
        dist = np.sort(np.abs(ev - lam))
        cut = dist[mult - 1] if mult == len(ev) else 0.5 * (dist[mult - 1] + dist[mult])
        _, Z, sdim = scipy.linalg.schur(R, output="complex", sort=lambda x: abs(x - lam) <= cut)
        if sdim != mult:
            raise NumericalFailure(f"Schur reordering selected {sdim} eigenvalues near {lam:.6g}, expected {mult}")
        return Z[:, :mult]

    def nullspace(self, M):
        return float_nullspace(M)

    def is_one(self, lam):
        return abs(lam - 1) <= max(self.eig_tol, 1e-6)

    def complement(self, S, F):
        if F.shape[1]:
            S = S - F @ (F.conj().T @ S)
        return float_orth(S, 1e-7)

    def first_row_nonzero(self, W):
        return bool(np.max(np.abs(W[0]), initial=0.0) > 1e-8)

    def concat(self, blocks_, m):
        return np.concatenate(blocks_, axis=1) if blocks_ else np.zeros((m, 0), dtype=complex)

    def lift_first(self, W):
        w = W[0]
        c = w.conj() / np.vdot(w, w).real
        p1 = W @ c
        p1[0] = 1.0
        return p1.reshape(-1, 1)

    def scalar_key(self, lam):
        return (round(lam.real, 9), round(lam.imag, 9))


class _ExactOps:
    exact = True

    def __init__(self, eig_tol: float):
        self.eig_tol = eig_tol

    def eye(self, m):
        return exact_eye(m)

    def restrict(self, A, W):
        _, rows = exact_rref(W.T.copy())
        sub = W[rows]
        return exact_inverse(sub).dot(A.dot(W)[rows])

    def clusters(self, R):
        ev = np.linalg.eigvals(to_complex(R))
        out = []
        for lam, mult in _cluster(ev, float(np.linalg.norm(to_complex(R))), self.eig_tol):
            exact_lam = CNumber(
                Fraction(lam.real).limit_denominator(10**6),
                Fraction(lam.imag).limit_denominator(10**6),
            )
            d = R.shape[0]
            Mp = _exact_power(R - exact_lam * exact_eye(d), mult)
            if d - exact_rank(Mp) != mult:
                raise ExactUnsupported(f"eigenvalue near {lam} is not a Gaussian rational")
            out.append((exact_lam, mult))
        return out

    def gen_eigenspace(self, R, lam, mult):
        d = R.shape[0]
        return exact_nullspace(_exact_power(R - lam * exact_eye(d), mult))

    def nullspace(self, M):
        return exact_nullspace(M)

    def is_one(self, lam):
        return lam == 1

    def complement(self, S, F):
        k = F.shape[1]
        _, pivots = exact_rref(np.concatenate([F, S], axis=1))
        return S[:, [p - k for p in pivots if p >= k]]

    def first_row_nonzero(self, W):
        return any(not x.is_zero() for x in W[0])

    def concat(self, blocks_, m):
        return np.concatenate(blocks_, axis=1) if blocks_ else exact_zeros((m, 0))

    def lift_first(self, W):
        j = next(j for j, x in enumerate(W[0]) if not x.is_zero())
        p1 = W[:, j] * W[0, j].inverse()
        return p1.reshape(-1, 1)

    def scalar_key(self, lam):
        c = complex(lam)
        return (round(c.real, 9), round(c.imag, 9))


def _exact_power(M, k):
    out = exact_eye(M.shape[0])
    for _ in range(k):
        out = out.dot(M)
    return out


def _split(ops, mats, W) -> list[tuple[np.ndarray, list]]:
    """Joint generalized eigenspaces inside span(W) as ``(basis, eigenvalues)``."""
    lams = []
    for A in mats:
        R = ops.restrict(A, W)
        cl = ops.clusters(R)
        if len(cl) > 1:
            out = []
            for lam, mult in cl:
                K = ops.gen_eigenspace(R, lam, mult)
                if K.shape[1] != mult:
                    raise NumericalFailure(
                        f"generalized eigenspace of {complex(lam):.6g} has dimension "
                        f"{K.shape[1]}, expected {mult}"
                    )
                out.extend(_split(ops, mats, W.dot(K) if ops.exact else W @ K))
            return out
        lams.append(cl[0][0])
    return [(W, lams)]


def _kernel_flag(ops, mats, lams, W) -> list[np.ndarray]:
    """Levels L1, L2, ... with N_k(L_j) inside L1 + ... + L_{j-1}."""
    m_amb, dim = W.shape
    F = ops.concat([], m_amb)
    levels = []
    eye = ops.eye(m_amb)
    Ns = [(A - lam * eye).dot(W) if ops.exact else (A - lam * eye) @ W for A, lam in zip(mats, lams)]
    while F.shape[1] < dim:
        if ops.exact:
            f = F.shape[1]
            rows = []
            for k, N in enumerate(Ns):
                row = [N]
                for kk in range(len(Ns)):
                    row.append(-F if kk == k else exact_zeros((m_amb, f)))
                rows.append(np.concatenate(row, axis=1))
            big = np.concatenate(rows, axis=0)
            C = ops.nullspace(big)[:dim]
            S = W.dot(C)
        else:
            Q = np.eye(m_amb) - F @ F.conj().T
            big = np.concatenate([Q @ N for N in Ns], axis=0)
            S = W @ float_nullspace(big, 1e-7)
        new = ops.complement(S, F)
        if new.shape[1] == 0:
            raise NumericalFailure("kernel flag stalled; nilpotent parts do not commute cleanly")
        levels.append(new)
        F = ops.concat([F, new], m_amb)
    if F.shape[1] != dim:
        raise NumericalFailure("kernel flag overshot the class dimension")
    return levels


def _build(ops, mats, eig_tol) -> tuple[np.ndarray, list[str]]:
    m = mats[0].shape[0]
    classes = _split(ops, mats, ops.eye(m))
    first = [c for c in classes if ops.first_row_nonzero(c[0])]
    if len(first) != 1:
        raise NumericalFailure(f"expected one class outside the translation hyperplane, found {len(first)}")
    W0, lams0 = first[0]
    if not all(ops.is_one(l) for l in lams0):
        raise NumericalFailure("class containing the homogenizing direction has eigenvalues != 1")
    rest = [c for c in classes if c is not first[0]]
    rest.sort(key=lambda c: (-c[0].shape[1], ops.scalar_key(c[1][0])))

    cols = [ops.lift_first(W0)]
    hyper = W0.dot(ops.nullspace(W0[0:1])) if ops.exact else W0 @ float_nullspace(W0[0:1])
    if hyper.shape[1]:
        cols.extend(reversed(_kernel_flag(ops, mats, lams0, hyper)))
    for W, lams in rest:
        cols.extend(reversed(_kernel_flag(ops, mats, lams, W)))
    P = ops.concat(cols, m)
    if P.shape[1] != m:
        raise NumericalFailure(f"assembled {P.shape[1]} basis vectors, expected {m}")
    if not ops.exact:
        P[0, :] = 0.0
        P[0, 0] = 1.0
    return P, []


def find_normal_form(
    fs: Sequence[AffineMap],
    eig_tol: float = EIG_TOL,
    tol: float = MEMBERSHIP_TOL,
    method: str = "auto",
    check: bool = True,
) -> NormalForm:
    """Conjugator into the block lower-triangular cone.

    ``method``: ``"auto"`` (identity short-circuit, then exact, then float),
    ``"exact"`` or ``"float"`` (both skip the short-circuit).
    """
    if not fs:
        raise ValueError("empty family")
    if check:
        ok, pair, dev = check_abelian(list(fs))
        if not ok:
            raise NotAbelian(pair, dev)
        for k, f in enumerate(fs):
            if not f.is_invertible():
                raise NotInvertible(k)
    mats = [phi(f) for f in fs]
    m = mats[0].shape[0]

    if method == "auto":
        eta = finest_partition(mats, tol)
        if eta is not None and all(k_membership(M, eta, invertible=True, tol=tol) for M in mats):
            return _identity_form(m, eta)

    P = None
    notes: list[str] = []
    used = "float"
    if method in ("auto", "exact") and all(all_gaussian_rational(M) for M in mats):
        try:
            P, notes = _build(_ExactOps(eig_tol), mats, eig_tol)
            Pinv = exact_inverse(P)
            used = "exact"
        except ExactUnsupported as exc:
            if method == "exact":
                raise NumericalFailure(f"exact normal form unavailable: {exc}") from exc
            notes = [f"exact normal form unavailable ({exc}); used float"]
            P = None
    elif method == "exact":
        raise NumericalFailure("exact normal form needs Gaussian-rational entries")
    if P is None:
        fmats = [to_complex(M) for M in mats]
        P, more = _build(_FloatOps(eig_tol, max(float(np.linalg.norm(M)) for M in fmats)), fmats, eig_tol)
        notes += more
        Pinv = np.linalg.inv(P)
        Pinv[0, :] = 0.0
        Pinv[0, 0] = 1.0

    nf0 = NormalForm(P, Pinv, (m,), used, notes)
    conj = [nf0.conjugate(M) for M in mats]
    eta = finest_partition(conj, tol)
    if eta is None or not all(k_membership(K, eta, invertible=True, tol=tol) for K in conj):
        worst = _worst_offender(conj)
        raise NumericalFailure("conjugated family is not block lower triangular", gap=worst)
    return NormalForm(P, Pinv, eta, used, notes)


def _worst_offender(conj) -> float:
    worst = 0.0
    for K in conj:
        c = to_complex(K)
        worst = max(worst, float(np.max(np.abs(np.triu(c, 1))) / (1 + np.max(np.abs(c)))))
    return worst
