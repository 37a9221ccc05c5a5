"""End-to-end hypercyclicity decision for a commuting family of affine maps.

Steps: commutativity and invertibility checks, generator-count shortcut
(``p <= n``), normal form, refined shortcut (``p <= 2n - r + 1``), one log
witness ``f'`` per generator, the additive generators at ``w0``, and the
density decision on them.  The family is hypercyclic exactly when those
generators are dense.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .affine import COMMUTE_TOL, AffineMap, check_abelian
from .density import (
    LATTICE_BOUND,
    LATTICE_PRECISION,
    RANK_RTOL,
    DensityInstance,
    DensityVerdict,
    decide_dense_exact,
    decide_dense_numeric,
    q_w0_generators,
)
from .errors import NotAbelian, NotInvertible
from .explog import WITNESS_TOL, LogWitness, log_witness, verify_witness
from .linalg import to_complex
from .normal_form import EIG_TOL, MEMBERSHIP_TOL, NormalForm, find_normal_form
from .scalars import CNumber, SymScalar

SCHEMA_VERSION = 1

HYPERCYCLIC = "Hypercyclic"
NOT_HYPERCYCLIC = "NotHypercyclic"
INCONCLUSIVE = "Inconclusive"

SHORTCUT_BEFORE = "generator-count (p <= n)"
SHORTCUT_AFTER = "generator-count (p <= 2n - r + 1)"


@dataclass
class DecisionOptions:
    mode: str = "auto"  # auto | exact | numeric
    eig_tol: float = EIG_TOL
    membership_tol: float = MEMBERSHIP_TOL
    commute_tol: float = COMMUTE_TOL
    witness_tol: float = WITNESS_TOL
    lattice_precision: int = LATTICE_PRECISION
    lattice_bound: int = LATTICE_BOUND
    rank_rtol: float = RANK_RTOL
    accept_heuristic: bool = False
    use_shortcuts: bool = True
    # the user vouches that declared symbols are algebraically independent
    independent: bool = True
    # per-generator branch choices for log_k, one integer per block
    branches: list[list[int]] | None = None

    def __post_init__(self):
        if self.mode not in ("auto", "exact", "numeric"):
            raise ValueError(f"unknown mode {self.mode!r}")


def shortcut_generator_count(p: int, n: int, r: int | None = None) -> str | None:
    """``NotHypercyclic`` when there are too few generators for density.

    Without ``r`` the bound is ``p <= n``; with it ``p <= 2n - r + 1``, which
    is the column deficit ``p + r - 1 <= 2n``.
    """
    if r is None:
        return NOT_HYPERCYCLIC if p <= n else None
    return NOT_HYPERCYCLIC if p <= 2 * n - r + 1 else None


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _entry(x):
    if isinstance(x, (CNumber, SymScalar)):
        return str(x)
    c = complex(x)
    return {"re": c.real, "im": c.imag}


def format_entry(x) -> str:
    if isinstance(x, (CNumber, SymScalar)):
        return str(x)
    c = complex(x)
    if c.imag == 0:
        return f"{c.real + 0.0:.12g}"
    return f"{c.real + 0.0:.12g}{c.imag:+.12g}i"


def matrix_json(M) -> list:
    M = np.asarray(M)
    if M.ndim == 1:
        return [_entry(x) for x in M]
    return [[_entry(x) for x in row] for row in M]


@dataclass(eq=False)
class DecisionReport:
    n: int
    p: int
    verdict: str = INCONCLUSIVE
    reason: str = ""
    abelian: dict = field(default_factory=dict)
    normal_form: NormalForm | None = None
    witnesses: list[LogWitness] = field(default_factory=list)
    density: DensityInstance | None = None
    density_verdict: DensityVerdict | None = None
    shortcut_used: str | None = None
    mode: str = ""
    assumptions: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def delta_coefficients(self) -> list[str] | None:
        if self.density_verdict is None:
            return None
        return self.density_verdict.certificate.get("delta_coefficients")

    def to_dict(self, timings: bool = False) -> dict:
        out: dict = {
            "schema": SCHEMA_VERSION,
            "input": {"n": self.n, "p": self.p},
            "verdict": self.verdict,
            "reason": self.reason,
            "mode": self.mode,
            "shortcut_used": self.shortcut_used,
            "abelian": self.abelian,
        }
        nf = self.normal_form
        if nf is not None:
            out["normal_form"] = {
                "P": matrix_json(nf.P),
                "eta": list(nf.eta),
                "r": nf.r,
                "w0": matrix_json(nf.w0),
                "method": nf.method,
                "notes": list(nf.notes),
            }
        if self.witnesses:
            out["witnesses"] = [
                {
                    "A": matrix_json(w.fprime.A),
                    "a": matrix_json(w.fprime.a),
                    "branch_shifts": list(w.branch_shifts),
                    "supplied": w.supplied,
                    "exp_deviation": w.deviation,
                }
                for w in self.witnesses
            ]
        if self.density is not None:
            out["density_instance"] = {
                "semigroup": [matrix_json(v) for v in self.density.gens_semigroup],
                "group": [matrix_json(v) for v in self.density.gens_group],
            }
        dv = self.density_verdict
        if dv is not None:
            out["density"] = {
                "outcome": dv.outcome,
                "mode": dv.mode,
                "reason": dv.reason,
                "rank": dv.rank,
                "witness": list(dv.witness) if dv.witness is not None else None,
                "heuristic": dv.heuristic,
                "certificate": dv.certificate,
            }
            if self.delta_coefficients is not None:
                out["delta_coefficients"] = self.delta_coefficients
        out["assumptions"] = list(self.assumptions)
        out["notes"] = list(self.notes)
        if timings:
            out["timings"] = dict(self.timings)
        return out

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=False)

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}", f"reason: {self.reason}", f"n = {self.n}, p = {self.p}"]
        if self.shortcut_used:
            lines.append(f"shortcut: {self.shortcut_used}")
        nf = self.normal_form
        if nf is not None:
            lines.append(f"eta = {tuple(nf.eta)}, r = {nf.r}, normal form via {nf.method}")
            lines.append("P =")
            lines.extend("  [" + ", ".join(format_entry(x) for x in row) + "]" for row in nf.P)
            lines.append("w0 = (" + ", ".join(format_entry(x) for x in nf.w0) + ")")
        for k, w in enumerate(self.witnesses):
            tag = "supplied" if w.supplied else "computed"
            lines.append(f"f'_{k + 1} ({tag}, branch shifts {w.branch_shifts}): a = ("
                         + ", ".join(format_entry(x) for x in w.fprime.a) + ")")
        dv = self.density_verdict
        if dv is not None:
            lines.append(f"density: {dv.outcome} [{dv.mode}] {dv.reason}")
            if dv.witness is not None:
                lines.append(f"  integer witness s = {tuple(dv.witness)}")
            if self.delta_coefficients:
                lines.append("  determinant coefficients: " + ", ".join(self.delta_coefficients))
        for a in self.assumptions:
            lines.append(f"assumes: {a}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# decision
# ---------------------------------------------------------------------------

def _float_instance(inst: DensityInstance) -> DensityInstance:
    return DensityInstance(
        inst.n,
        [to_complex(v) for v in inst.gens_semigroup],
        [to_complex(v) for v in inst.gens_group],
    )


def _witnesses(
    fs: Sequence[AffineMap],
    nf: NormalForm,
    supplied: Sequence[AffineMap | None] | None,
    opts: DecisionOptions,
) -> list[LogWitness]:
    out = []
    for k, f in enumerate(fs):
        given = supplied[k] if supplied is not None and k < len(supplied) else None
        if given is not None:
            out.append(verify_witness(f, given, nf, opts.witness_tol, index=k))
        else:
            br = opts.branches[k] if opts.branches and k < len(opts.branches) else None
            out.append(log_witness(f, nf, br, opts.witness_tol))
    return out


def decide_hypercyclic(
    fs: Sequence[AffineMap],
    witnesses: Sequence[AffineMap | None] | None = None,
    options: DecisionOptions | None = None,
    normal_form: NormalForm | None = None,
) -> DecisionReport:
    """Decide whether the semigroup generated by ``fs`` has a dense orbit.

    Raises :class:`NotAbelian` / :class:`NotInvertible` on bad input; an
    undecidable density question becomes an ``Inconclusive`` verdict.
    """
    opts = options or DecisionOptions()
    fs = list(fs)
    if not fs:
        raise ValueError("empty family")
    n, p = fs[0].n, len(fs)
    rep = DecisionReport(n, p)
    clock = time.perf_counter()

    def lap(name):
        nonlocal clock
        now = time.perf_counter()
        rep.timings[name] = now - clock
        clock = now

    ok, pair, dev = check_abelian(fs, opts.commute_tol)
    rep.abelian = {"ok": ok, "pair": list(pair) if pair else None, "max_deviation": dev}
    if not ok:
        raise NotAbelian(pair, dev)
    for k, f in enumerate(fs):
        if not f.is_invertible():
            raise NotInvertible(k)
    lap("checks")

    if opts.use_shortcuts and shortcut_generator_count(p, n):
        rep.verdict = NOT_HYPERCYCLIC
        rep.shortcut_used = SHORTCUT_BEFORE
        rep.reason = f"{p} commuting invertible maps on C^{n} cannot have a dense orbit"
        return rep

    nf = normal_form or find_normal_form(
        fs, eig_tol=opts.eig_tol, tol=opts.membership_tol,
        method="float" if opts.mode == "numeric" else "auto", check=False,
    )
    rep.normal_form = nf
    lap("normal_form")

    if opts.use_shortcuts and shortcut_generator_count(p, n, nf.r):
        rep.verdict = NOT_HYPERCYCLIC
        rep.shortcut_used = SHORTCUT_AFTER
        rep.reason = f"p + r - 1 = {p + nf.r - 1} <= 2n = {2 * n}"
        return rep

    rep.witnesses = _witnesses(fs, nf, witnesses, opts)
    lap("witnesses")

    inst = q_w0_generators(rep.witnesses, nf)
    rep.density = inst
    if opts.mode == "exact" and not inst.exact:
        rep.verdict = INCONCLUSIVE
        rep.mode = "exact"
        rep.reason = "exact mode requested but the witnesses or w0 left the exact scalar tower"
        rep.notes.append("supply exact witnesses f' to decide exactly")
        return rep
    exact_ok = inst.exact and (opts.independent or not inst.needs_independence())
    if opts.mode == "exact" and not exact_ok:
        rep.verdict = INCONCLUSIVE
        rep.mode = "exact"
        rep.reason = "exact decision needs the symbols declared independent"
        return rep
    if inst.exact and not exact_ok:
        rep.notes.append("symbols not declared independent; deciding numerically")
    if opts.mode != "numeric" and exact_ok:
        dv = decide_dense_exact(inst)
    else:
        if inst.exact:
            inst = _float_instance(inst)
        dv = decide_dense_numeric(inst, opts.lattice_precision, opts.lattice_bound, opts.rank_rtol)
    lap("density")
    rep.density_verdict = dv
    rep.mode = dv.mode
    rep.assumptions = list(dv.assumptions)

    if dv.outcome == "Dense":
        if dv.heuristic and not opts.accept_heuristic:
            rep.verdict = INCONCLUSIVE
            rep.reason = "float search found no integer relation; not a certificate of density"
        else:
            rep.verdict = HYPERCYCLIC
            rep.reason = "additive generators at w0 are dense, so the orbit of w0 is dense"
            if dv.heuristic:
                rep.notes.append("heuristic density accepted by option")
    elif dv.outcome == "NotDense":
        rep.verdict = NOT_HYPERCYCLIC
        rep.reason = f"additive generators at w0 are not dense ({dv.reason})"
    else:
        rep.verdict = INCONCLUSIVE
        rep.reason = dv.reason
    return rep
