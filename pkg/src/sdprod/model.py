"""Structured semidefinite programs and their tensor product.

A program is

    maximize    J . X
    subject to  A_k . X  =  b_k   (or <= b_k for LE rows)
                B_j . X  >= 0
                X  psd,

carried by :class:`SdpProgram`.  The nonnegativity rows are kept apart
from the affine rows on purpose: the tensor product of two programs
pairs equality rows with equality rows and nonnegativity rows with
nonnegativity rows, and folding the B rows into an enlarged affine
system would change what the product means.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import linalg

__all__ = [
    "Relation",
    "LinearConstraint",
    "SdpProgram",
    "Residuals",
    "SdpSolution",
    "validate",
    "product",
    "bipartite_tensor",
]


class Relation(enum.Enum):
    """Constraint sense of an affine row.

    Only EQ and LE exist; a >= row is stored as its negated LE form so
    the dual sign rule (multipliers of LE rows are nonnegative) stays
    single-cased.
    """

    EQ = "eq"
    LE = "le"


@dataclass(frozen=True)
class LinearConstraint:
    """One affine row: matrix . X  (=|<=)  rhs."""

    matrix: np.ndarray
    rhs: float
    relation: Relation = Relation.EQ

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "rhs", float(self.rhs))


@dataclass(frozen=True)
class SdpProgram:
    """A structured program (J, A, b, relations, B).

    ``constraints`` holds the affine rows (EQ and LE senses mixed, order
    significant), ``nonneg`` the matrices B_j of the rows B_j . X >= 0.
    All matrices must be square of size ``dim`` and exactly symmetric;
    asymmetric input is rejected by :func:`validate`, never repaired.
    """

    dim: int
    objective: np.ndarray
    constraints: tuple[LinearConstraint, ...] = ()
    nonneg: tuple[np.ndarray, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objective", np.asarray(self.objective, dtype=float))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(
            self, "nonneg", tuple(np.asarray(b, dtype=float) for b in self.nonneg)
        )

    @property
    def num_affine(self) -> int:
        return len(self.constraints)

    @property
    def num_nonneg(self) -> int:
        return len(self.nonneg)

    def relations(self) -> tuple[Relation, ...]:
        return tuple(c.relation for c in self.constraints)

    def rhs_vector(self) -> np.ndarray:
        return np.array([c.rhs for c in self.constraints], dtype=float)


def _check_matrix(m: np.ndarray, dim: int, label: str, defects: list[str]) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        defects.append(f"{label}: not square, shape {m.shape}")
        return
    if m.shape[0] != dim:
        defects.append(f"{label}: dimension {m.shape[0]} != program dimension {dim}")
        return
    if not np.all(np.isfinite(m)):
        defects.append(f"{label}: non-finite entries")
        return
    if not np.all(m == m.T):
        defects.append(f"{label}: not symmetric")


def validate(program: SdpProgram) -> list[str]:
    """Return human-readable defect descriptions, empty iff well formed."""
    defects: list[str] = []
    if program.dim <= 0:
        defects.append(f"dimension must be positive, got {program.dim}")
        return defects
    _check_matrix(program.objective, program.dim, "objective", defects)
    for k, con in enumerate(program.constraints):
        _check_matrix(con.matrix, program.dim, f"affine row {k}", defects)
        if not np.isfinite(con.rhs):
            defects.append(f"affine row {k}: non-finite right-hand side")
    for j, b in enumerate(program.nonneg):
        _check_matrix(b, program.dim, f"nonneg row {j}", defects)
    return defects


def require_valid(program: SdpProgram) -> None:
    defects = validate(program)
    if defects:
        raise ValueError("invalid program: " + "; ".join(defects))


def product(p1: SdpProgram, p2: SdpProgram) -> SdpProgram:
    """Tensor product of two programs.

    The objective is J1 (x) J2, the affine rows are all pairs
    (A1_i (x) A2_j, b1_i * b2_j) and the nonnegativity rows all pairs
    B1_i (x) B2_j, both enumerated in lexicographic (i, j) order.  A
    product row is EQ only when both factors are EQ.  Equality rows and
    nonnegativity rows never mix.
    """
    require_valid(p1)
    require_valid(p2)
    constraints = []
    for c1 in p1.constraints:
        for c2 in p2.constraints:
            rel = (
                Relation.EQ
                if (c1.relation is Relation.EQ and c2.relation is Relation.EQ)
                else Relation.LE
            )
            constraints.append(
                LinearConstraint(
                    matrix=linalg.kron(c1.matrix, c2.matrix),
                    rhs=c1.rhs * c2.rhs,
                    relation=rel,
                )
            )
    nonneg = [linalg.kron(b1, b2) for b1 in p1.nonneg for b2 in p2.nonneg]
    name = ""
    if p1.name and p2.name:
        name = f"({p1.name}) x ({p2.name})"
    return SdpProgram(
        dim=p1.dim * p2.dim,
        objective=linalg.kron(p1.objective, p2.objective),
        constraints=tuple(constraints),
        nonneg=tuple(nonneg),
        name=name,
    )


def bipartite_tensor(a) -> np.ndarray:
    """hat(A (x) A): the bipartite version of the self Kronecker product.

    This is the matrix that shows up when squaring a problem carried by a
    rectangular matrix A; it is a principal submatrix of hat(A) (x) hat(A)
    on the (top,top) and (bottom,bottom) index pairs.
    """
    m = np.asarray(a, dtype=float)
    return linalg.hat(linalg.kron(m, m))


@dataclass(frozen=True)
class Residuals:
    """Per-constraint violation magnitudes of a candidate primal/dual pair.

    All entries are nonnegative magnitudes; zero means satisfied.
    ``x_min_eigenvalue`` and ``dual_slack_min_eigenvalue`` are signed
    (negative values measure PSD violation).
    """

    affine: np.ndarray
    nonneg: np.ndarray
    x_min_eigenvalue: float
    dual_slack_min_eigenvalue: float
    duality_gap: float

    @property
    def max_affine(self) -> float:
        return float(np.max(self.affine)) if self.affine.size else 0.0

    @property
    def max_nonneg(self) -> float:
        return float(np.max(self.nonneg)) if self.nonneg.size else 0.0


@dataclass(frozen=True)
class SdpSolution:
    """Primal X with dual multipliers (y for affine rows, z for nonneg rows).

    The dual constraint is  y^T A - (z^T B + J)  psd  with z >= 0 and
    y_k >= 0 on LE rows; ``dual_value`` is y^T b.
    """

    X: np.ndarray
    y: np.ndarray
    z: np.ndarray
    primal_value: float
    dual_value: float
    residuals: Residuals


def compute_residuals(
    program: SdpProgram,
    X: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    primal_value: float | None = None,
    dual_value: float | None = None,
) -> Residuals:
    """Measure how far (X, y, z) is from satisfying every condition.

    Affine violations are |A_k.X - b_k| for EQ rows and the positive part
    of A_k.X - b_k for LE rows; nonneg violations are the positive part
    of -B_j.X.
    """
    affine = np.zeros(program.num_affine)
    for k, con in enumerate(program.constraints):
        val = linalg.frobenius_dot(con.matrix, X)
        if con.relation is Relation.EQ:
            affine[k] = abs(val - con.rhs)
        else:
            affine[k] = max(0.0, val - con.rhs)
    nn = np.zeros(program.num_nonneg)
    for j, b in enumerate(program.nonneg):
        nn[j] = max(0.0, -linalg.frobenius_dot(b, X))
    if primal_value is None:
        primal_value = linalg.frobenius_dot(program.objective, X)
    if dual_value is None:
        dual_value = float(np.dot(y, program.rhs_vector()))
    slack = dual_slack_matrix(program, y, z)
    return Residuals(
        affine=affine,
        nonneg=nn,
        x_min_eigenvalue=linalg.min_eigenvalue(X) if program.dim else 0.0,
        dual_slack_min_eigenvalue=linalg.min_eigenvalue(slack),
        duality_gap=abs(primal_value - dual_value),
    )


def dual_slack_matrix(
    program: SdpProgram, y: np.ndarray, z: np.ndarray, plus: bool = False
) -> np.ndarray:
    """y^T A - (z^T B + J), or the sign-flipped y^T A + (z^T B + J)."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != (program.num_affine,):
        raise ValueError(
            f"y has length {y.shape}, expected {program.num_affine} affine rows"
        )
    if z.shape != (program.num_nonneg,):
        raise ValueError(
            f"z has length {z.shape}, expected {program.num_nonneg} nonneg rows"
        )
    acc = np.zeros((program.dim, program.dim))
    for coeff, con in zip(y, program.constraints):
        if coeff != 0.0:
            acc += coeff * con.matrix
    tail = np.array(program.objective, copy=True)
    for coeff, b in zip(z, program.nonneg):
        if coeff != 0.0:
            tail += coeff * b
    return acc + tail if plus else acc - tail
