"""Decide hypercyclicity of finitely generated abelian semigroups of affine maps on C^n."""

from .affine import AffineMap, check_abelian, compose, phi, psi
from .density import DensityInstance, DensityVerdict, decide_dense, decide_dense_exact, decide_dense_numeric
from .normal_form import NormalForm, find_normal_form
from .pipeline import DecisionOptions, DecisionReport, decide_hypercyclic
from .scalars import CNumber, SymScalar, parse_scalar

__all__ = [
    "AffineMap",
    "CNumber",
    "DecisionOptions",
    "DecisionReport",
    "DensityInstance",
    "DensityVerdict",
    "NormalForm",
    "SymScalar",
    "check_abelian",
    "compose",
    "decide_dense",
    "decide_dense_exact",
    "decide_dense_numeric",
    "decide_hypercyclic",
    "find_normal_form",
    "parse_scalar",
    "phi",
    "psi",
]
