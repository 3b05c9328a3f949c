"""Structured SDP modeling, solving, products, and product-theorem checks."""

from .linalg import (
    EigenDecomposition,
    eigen,
    entrywise_product,
    frobenius_dot,
    hat,
    is_psd,
    kron,
    min_eigenvalue,
    symmetrize,
)
from .model import (
    LinearConstraint,
    Relation,
    SdpProgram,
    SdpSolution,
    bipartite_tensor,
    product,
    validate,
)
from .solver import SolveReport, SolverConfig, SolveStatus, dual_slack, nnls, solve

__all__ = [
    "EigenDecomposition",
    "eigen",
    "entrywise_product",
    "frobenius_dot",
    "hat",
    "is_psd",
    "kron",
    "min_eigenvalue",
    "symmetrize",
    "LinearConstraint",
    "Relation",
    "SdpProgram",
    "SdpSolution",
    "bipartite_tensor",
    "product",
    "validate",
    "SolveReport",
    "SolverConfig",
    "SolveStatus",
    "dual_slack",
    "nnls",
    "solve",
]
