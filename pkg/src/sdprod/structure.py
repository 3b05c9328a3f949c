"""Mechanical checks for when program values multiply under product.

The optimal value of a structured program is always super-multiplicative
under the tensor product (tensor feasible points), so the content of a
product theorem is the reverse inequality.  Three sufficient rules are
checked here:

* psd-objective: both objectives are PSD and there are no nonnegativity
  rows (affine programs only).
* bipartite-affine: an index partition exists under which the objective
  is block anti-diagonal and every affine row is block diagonal, again
  with no nonnegativity rows.
* bipartite-span: the partition additionally keeps every nonnegativity
  matrix block anti-diagonal, and the objective lies in the positive
  span of the nonnegativity matrices, J = sum_k u_k B_k with u >= 0.

For any of these, alpha(p1 x p2) = alpha(p1) * alpha(p2); the last rule
also yields an explicit dual for the product, built from the factor
duals (y1, z1), (y2, z2) and the span witnesses u1, u2 as
(y1 (x) y2,  z1 (x) z2 + z1 (x) u2 + u1 (x) z2), which this module
constructs and verifies numerically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg, model, solver
from .model import Relation, SdpProgram
from .solver import SolveReport, SolverConfig

__all__ = [
    "Side",
    "BipartitePartition",
    "ProductRule",
    "SpanWitness",
    "ConditionReport",
    "find_partition",
    "span_witness",
    "check_conditions",
    "ProductDualCheck",
    "ProductVerdict",
    "verify_perfect_product",
]

SUPPORT_TOL = 1e-12          # |entry| above this counts as structural support
SPAN_TOL = 1e-8              # default residual bound for the span witness


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class BipartitePartition:
    """Two-set row/column partition certifying the bipartiteness rule."""

    side: tuple[Side, ...]

    @property
    def left(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.side) if s is Side.LEFT)

    @property
    def right(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.side) if s is Side.RIGHT)

    def sign_vector(self) -> np.ndarray:
        """+1 on the left block, -1 on the right block."""
        return np.array([1.0 if s is Side.LEFT else -1.0 for s in self.side])


class ProductRule(enum.Enum):
    PSD_OBJECTIVE = "psd-objective"
    BIPARTITE_AFFINE = "bipartite-affine"
    BIPARTITE_SPAN = "bipartite-span"
    NONE = "none"


@dataclass(frozen=True)
class SpanWitness:
    u: np.ndarray
    residual: float


@dataclass(frozen=True)
class ConditionReport:
    psd_objective: bool
    partition: BipartitePartition | None
    witness: SpanWitness | None
    rule: ProductRule


class _ParityUnionFind:
    """Union-find over indices with a parity bit along each link.

    find(i) returns (root, parity of i relative to the root); union with
    a required relative parity reports False on conflict.
    """

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.parity = [0] * n

    def find(self, i: int) -> tuple[int, int]:
        if self.parent[i] == i:
            return i, 0
        root, par = self.find(self.parent[i])
        self.parent[i] = root
        self.parity[i] ^= par
        return root, self.parity[i]

    def union(self, i: int, j: int, rel: int) -> bool:
        ri, pi = self.find(i)
        rj, pj = self.find(j)
        if ri == rj:
            return (pi ^ pj) == rel
        # Attach the larger root under the smaller for determinism.
        if ri < rj:
            self.parent[rj] = ri
            self.parity[rj] = pi ^ pj ^ rel
        else:
            self.parent[ri] = rj
            self.parity[ri] = pi ^ pj ^ rel
        return True


def _support(mat: np.ndarray):
    ii, jj = np.nonzero(np.abs(mat) > SUPPORT_TOL)
    return zip(ii.tolist(), jj.tolist())


def find_partition(program: SdpProgram) -> BipartitePartition | None:
    """Search for a partition under which every affine row is block
    diagonal while the objective and every nonnegativity row are block
    anti-diagonal.

    Each nonzero entry forces a relation between its indices: off-diagonal
    support of an affine row means same side, support of the objective or
    a nonnegativity row means opposite sides, and their diagonal support
    is impossible outright.  The relations are propagated with a parity
    union-find; unconstrained components default to the left block.
    """
    model.require_valid(program)
    n = program.dim
    uf = _ParityUnionFind(n)
    for con in program.constraints:
        for i, j in _support(con.matrix):
            if i < j and not uf.union(i, j, 0):
                return None
    anti = [program.objective, *program.nonneg]
    for mat in anti:
        for i, j in _support(mat):
            if i == j:
                return None
            if i < j and not uf.union(i, j, 1):
                return None
    labels = [uf.find(i) for i in range(n)]
    side = tuple(Side.LEFT if par == 0 else Side.RIGHT for _, par in labels)
    if n >= 2 and (Side.LEFT not in side or Side.RIGHT not in side):
        # A one-sided assignment means nothing forced two colors; flipping
        # one whole component keeps every relation and makes both blocks
        # non-empty.  With a single component no valid two-set partition
        # exists.
        roots = {root for root, _ in labels}
        if len(roots) < 2:
            return None
        flip = max(roots)
        side = tuple(
            (Side.RIGHT if s is Side.LEFT else Side.LEFT)
            if labels[i][0] == flip
            else s
            for i, s in enumerate(side)
        )
    return BipartitePartition(side=side)


def partition_violations(program: SdpProgram, partition: BipartitePartition) -> list[str]:
    """Direct support scan confirming the block pattern, for soundness tests."""
    sign = partition.sign_vector()
    bad: list[str] = []
    for k, con in enumerate(program.constraints):
        for i, j in _support(con.matrix):
            if sign[i] != sign[j]:
                bad.append(f"affine row {k} has cross-block support at ({i}, {j})")
    for label, mat in [("objective", program.objective)] + [
        (f"nonneg row {k}", b) for k, b in enumerate(program.nonneg)
    ]:
        for i, j in _support(mat):
            if sign[i] == sign[j]:
                bad.append(f"{label} has same-block support at ({i}, {j})")
    return bad


def span_witness(program: SdpProgram, tol: float = SPAN_TOL) -> SpanWitness | None:
    """Nonnegative u with sum_k u_k B_k = J, or None when J is outside the
    positive span of the nonnegativity matrices."""
    model.require_valid(program)
    target = linalg.svec(program.objective)
    columns = [linalg.svec(b) for b in program.nonneg]
    u, residual = solver.nnls(columns, target)
    if residual <= tol * (1.0 + float(np.linalg.norm(target))):
        return SpanWitness(u=u, residual=residual)
    return None


def check_conditions(program: SdpProgram, tol: float = SPAN_TOL) -> ConditionReport:
    """Evaluate all product rules and report the strongest applicable one.

    Precedence: bipartite-span (needs nonnegativity rows), then
    bipartite-affine, then psd-objective (both need an empty
    nonnegativity list).
    """
    model.require_valid(program)
    psd_obj = linalg.is_psd(program.objective, 1e-9)
    partition = find_partition(program)
    witness = span_witness(program, tol)
    affine_only = program.num_nonneg == 0
    if partition is not None and not affine_only and witness is not None:
        rule = ProductRule.BIPARTITE_SPAN
    elif partition is not None and affine_only:
        rule = ProductRule.BIPARTITE_AFFINE
    elif psd_obj and affine_only:
        rule = ProductRule.PSD_OBJECTIVE
    else:
        rule = ProductRule.NONE
    return ConditionReport(
        psd_objective=psd_obj, partition=partition, witness=witness, rule=rule
    )


@dataclass(frozen=True)
class ProductDualCheck:
    """Feasibility record of the explicit product dual (y1 (x) y2, v)."""

    y: np.ndarray
    v: np.ndarray
    value: float
    slack_min_eigenvalue: float
    v_min: float
    le_sign_min: float

    def feasible(self, tol: float) -> bool:
        return (
            self.slack_min_eigenvalue >= -tol
            and self.v_min >= -tol
            and self.le_sign_min >= -tol
        )


@dataclass(frozen=True)
class ProductVerdict:
    report1: SolveReport
    report2: SolveReport
    product_report: SolveReport
    value1: float
    value2: float
    product_value: float
    multiplicative_gap: float
    within_tolerance: bool
    dual_check: ProductDualCheck | None


def _product_dual_candidate(
    p1: SdpProgram, p2: SdpProgram,
    r1: SolveReport, r2: SolveReport,
    w1: SpanWitness, w2: SpanWitness,
    prod: SdpProgram,
) -> ProductDualCheck:
    y = np.kron(r1.solution.y, r2.solution.y)
    z1, z2 = r1.solution.z, r2.solution.z
    v = np.kron(z1, z2) + np.kron(z1, w2.u) + np.kron(w1.u, z2)
    slack = model.dual_slack_matrix(prod, y, v)
    le_signs = [
        coeff
        for coeff, con in zip(y, prod.constraints)
        if con.relation is Relation.LE
    ]
    return ProductDualCheck(
        y=y,
        v=v,
        value=float(y @ prod.rhs_vector()),
        slack_min_eigenvalue=linalg.min_eigenvalue(slack),
        v_min=float(np.min(v)) if v.size else 0.0,
        le_sign_min=min(le_signs) if le_signs else 0.0,
    )


def verify_perfect_product(
    p1: SdpProgram,
    p2: SdpProgram,
    config: SolverConfig | None = None,
    rel_tol: float = 5e-5,
) -> ProductVerdict:
    """Solve both factors and their product and compare values.

    The verdict records |alpha(p1 x p2) - alpha(p1) alpha(p2)| against
    rel_tol * (1 + |alpha(p1) alpha(p2)|).  When both factors carry span
    witnesses, the explicit product dual from the factor duals is built
    and checked for feasibility directly (no solve involved).
    """
    cfg = config or SolverConfig()
    r1 = solver.solve(p1, cfg)
    r2 = solver.solve(p2, cfg)
    prod = model.product(p1, p2)
    rp = solver.solve(prod, cfg)
    v1, v2 = r1.solution.primal_value, r2.solution.primal_value
    vp = rp.solution.primal_value
    gap = abs(vp - v1 * v2)
    dual_check = None
    w1 = span_witness(p1)
    w2 = span_witness(p2)
    if w1 is not None and w2 is not None:
        dual_check = _product_dual_candidate(p1, p2, r1, r2, w1, w2, prod)
    return ProductVerdict(
        report1=r1,
        report2=r2,
        product_report=rp,
        value1=v1,
        value2=v2,
        product_value=vp,
        multiplicative_gap=gap,
        within_tolerance=gap <= rel_tol * (1.0 + abs(v1 * v2)),
        dual_check=dual_check,
    )
