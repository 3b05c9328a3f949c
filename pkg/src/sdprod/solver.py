"""Interior-point solver for small dense structured SDPs.

The algorithm is a primal log-barrier path-following method with the
dual read off the barrier multipliers:

* the program is compiled to svec coordinates with every constraint row
  scaled to unit Frobenius norm (duals are rescaled on the way out);
* a strictly feasible start is found from a handful of deterministic
  candidates (equality least-norm point, identity blends, a push along
  the nonnegativity normals) or, failing that, from a phase-I program
  that maximizes the minimum constraint margin;
* Newton centering follows the central path, multiplying the barrier
  parameter t geometrically until the duality-gap bound nu/t meets the
  configured tolerance;
* at the final center the multipliers 1/(t s_i) of the inequality rows,
  1/(t g_j) of the nonnegativity rows and the equality KKT vector nu/t
  form an exactly sign-feasible dual whose slack matrix equals X^{-1}/t.

Programs without a strictly feasible point (they exist in this domain:
global block-sum equality rows can force every feasible X to be
singular) are handled by facial reduction.  Phase-I then certifies the
empty interior with a positive semidefinite combination S of constraint
matrices; the face is the null space of S, the program is restricted to
it and re-solved, and the reduced dual is lifted back by adding a
multiple of the certificate, which changes the dual value only by the
certificate's pairing with the right-hand sides (reported honestly in
the residuals).

Everything is deterministic: no randomness, fixed sweep orders, and
pure numpy/scipy linear algebra.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse

from . import linalg, model
from .model import Relation, SdpProgram, SdpSolution

__all__ = [
    "SolverConfig",
    "SolveStatus",
    "SolveReport",
    "solve",
    "dual_slack",
    "nnls",
]


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITERS = "max-iters"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and barrier schedule.

    gap_tol bounds |primal - dual| relative to 1 + |primal|; feas_tol is
    the absolute bound on every feasibility residual; max_iters caps the
    total number of Newton steps across all phases.
    """

    gap_tol: float = 1e-6
    feas_tol: float = 1e-7
    max_iters: int = 500
    t_init: float = 1.0
    mu: float = 30.0
    newton_tol: float = 0.30
    newton_tol_final: float = 1e-8
    interior_margin: float = 1e-5
    certificate_gap: float = 1e-9
    t_cap: float = 1e13
    unbounded_cap: float = 1e12
    max_reduction_depth: int = 4

    def __post_init__(self):
        for name in ("gap_tol", "feas_tol", "t_init", "mu", "newton_tol",
                     "newton_tol_final", "interior_margin", "certificate_gap",
                     "t_cap", "unbounded_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters <= 0:
            raise ValueError("max_iters must be positive")


@dataclass(frozen=True)
class SolveReport:
    solution: SdpSolution
    status: SolveStatus
    iterations: int


def dual_slack(program: SdpProgram, y, z, sign: str = "minus") -> np.ndarray:
    """y^T A - (z^T B + J) for sign="minus", y^T A + (z^T B + J) for "plus"."""
    if sign not in ("minus", "plus"):
        raise ValueError(f"sign must be 'minus' or 'plus', got {sign!r}")
    return model.dual_slack_matrix(program, y, z, plus=(sign == "plus"))


def nnls(columns, target) -> tuple[np.ndarray, float]:
    """Nonnegative least squares min ||sum_k c_k columns_k - target||, c >= 0.

    Active-set method; the optimum of this convex problem is reached to
    working precision.  Returns (coefficients, Euclidean residual).
    """
    target = np.asarray(target, dtype=float)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if not cols:
        return np.zeros(0), float(np.linalg.norm(target))
    a = np.column_stack(cols)
    if a.shape[0] != target.size:
        raise ValueError(
            f"columns have length {a.shape[0]}, target has length {target.size}"
        )
    coeffs, residual = scipy.optimize.nnls(a, target, maxiter=max(30 * a.shape[1], 300))
    return coeffs, float(residual)


# ---------------------------------------------------------------------------
# Compilation to normalized svec rows.
# ---------------------------------------------------------------------------

_ZERO_ROW_TOL = 1e-13


class _Infeasible(Exception):
    pass


class _Unbounded(Exception):
    pass


class _OutOfIterations(Exception):
    pass


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def take(self):
        if self.used >= self.limit:
            raise _OutOfIterations()
        self.used += 1


@dataclass
class _Compiled:
    """Normalized problem data in svec coordinates.

    Rows are grouped by kind: equality (dense E), inequality (sparse L)
    and nonnegativity (sparse N).  *_src maps each kept row back to its
    index in the source program; *_scale holds the Frobenius norms the
    rows were divided by (zero-matrix rows are dropped and keep dual 0).
    """

    n: int
    p: int
    c: np.ndarray
    E: np.ndarray
    b_e: np.ndarray
    L: scipy.sparse.csr_matrix
    b_l: np.ndarray
    N: scipy.sparse.csr_matrix
    eq_src: np.ndarray
    le_src: np.ndarray
    nn_src: np.ndarray
    eq_scale: np.ndarray
    le_scale: np.ndarray
    nn_scale: np.ndarray

    @property
    def m_eq(self) -> int:
        return self.E.shape[0]

    @property
    def m_le(self) -> int:
        return self.L.shape[0]

    @property
    def m_nn(self) -> int:
        return self.N.shape[0]

    @property
    def barrier_count(self) -> int:
        return self.n + self.m_le + self.m_nn

    def eq_matrices(self) -> list[np.ndarray]:
        return [linalg.smat(row, self.n) for row in self.E]

    def le_matrices(self) -> list[np.ndarray]:
        dense = self.L.toarray()
        return [linalg.smat(row, self.n) for row in dense]

    def nn_matrices(self) -> list[np.ndarray]:
        dense = self.N.toarray()
        return [linalg.smat(row, self.n) for row in dense]


def _sparse_from_rows(rows: list[np.ndarray], p: int) -> scipy.sparse.csr_matrix:
    if not rows:
        return scipy.sparse.csr_matrix((0, p))
    return scipy.sparse.csr_matrix(np.vstack(rows))


def _compile(program: SdpProgram) -> _Compiled:
    n = program.dim
    eq_rows, le_rows = [], []
    b_e, b_l = [], []
    eq_src, le_src, eq_scale, le_scale = [], [], [], []
    for k, con in enumerate(program.constraints):
        norm = float(np.linalg.norm(con.matrix))
        if norm <= _ZERO_ROW_TOL:
            if con.relation is Relation.EQ and abs(con.rhs) > 1e-12:
                raise _Infeasible(f"affine row {k} is zero with rhs {con.rhs}")
            if con.relation is Relation.LE and con.rhs < -1e-12:
                raise _Infeasible(f"affine row {k} is zero with rhs {con.rhs} < 0")
            continue
        row = linalg.svec(con.matrix) / norm
        if con.relation is Relation.EQ:
            eq_rows.append(row)
            b_e.append(con.rhs / norm)
            eq_src.append(k)
            eq_scale.append(norm)
        else:
            le_rows.append(row)
            b_l.append(con.rhs / norm)
            le_src.append(k)
            le_scale.append(norm)
    nn_rows, nn_src, nn_scale = [], [], []
    for j, b in enumerate(program.nonneg):
        norm = float(np.linalg.norm(b))
        if norm <= _ZERO_ROW_TOL:
            continue
        nn_rows.append(linalg.svec(b) / norm)
        nn_src.append(j)
        nn_scale.append(norm)
    p = n * (n + 1) // 2
    return _Compiled(
        n=n,
        p=p,
        c=linalg.svec(program.objective),
        E=np.vstack(eq_rows) if eq_rows else np.zeros((0, p)),
        b_e=np.array(b_e),
        L=_sparse_from_rows(le_rows, p),
        b_l=np.array(b_l),
        N=_sparse_from_rows(nn_rows, p),
        eq_src=np.array(eq_src, dtype=int),
        le_src=np.array(le_src, dtype=int),
        nn_src=np.array(nn_src, dtype=int),
        eq_scale=np.array(eq_scale),
        le_scale=np.array(le_scale),
        nn_scale=np.array(nn_scale),
    )


# ---------------------------------------------------------------------------
# Barrier machinery.
# ---------------------------------------------------------------------------


def _psd_hessian(xi: np.ndarray, ii: np.ndarray, jj: np.ndarray,
                 w: np.ndarray) -> np.ndarray:
    """Hessian of -logdet at X in svec coordinates, xi = X^{-1}."""
    h = xi[np.ix_(ii, ii)] * xi[np.ix_(jj, jj)]
    h += xi[np.ix_(ii, jj)] * xi[np.ix_(jj, ii)]
    h *= 0.5
    h *= w[:, None]
    h *= w[None, :]
    return h


@dataclass
class _CenterState:
    x: np.ndarray
    nu: np.ndarray          # equality multipliers of the last KKT solve
    slacks_le: np.ndarray
    margins_nn: np.ndarray
    xi: np.ndarray          # inverse of X(x)
    decrement: float


class _Barrier:
    """Newton centering for phi_t(x) = -t c.x - logdet X - sum log margins."""

    def __init__(self, comp: _Compiled, cfg: SolverConfig, budget: _Budget):
        self.comp = comp
        self.cfg = cfg
        self.budget = budget
        ii, jj = linalg.svec_indices(comp.n)
        self.ii, self.jj = ii, jj
        self.w = np.where(ii == jj, 1.0, np.sqrt(2.0))
        # Sparse algebra only pays off for genuinely sparse rows; reduced
        # programs have dense rows, where plain BLAS is much faster.
        self._l_dense = self._densify(comp.L)
        self._n_dense = self._densify(comp.N)

    @staticmethod
    def _densify(mat) -> np.ndarray | None:
        if mat.shape[0] == 0:
            return None
        density = mat.nnz / max(mat.shape[0] * mat.shape[1], 1)
        return mat.toarray() if density > 0.2 else None

    def margins(self, x: np.ndarray):
        comp = self.comp
        s = comp.b_l - comp.L @ x if comp.m_le else np.zeros(0)
        g = comp.N @ x if comp.m_nn else np.zeros(0)
        return s, g

    def value(self, x: np.ndarray, t: float) -> float:
        comp = self.comp
        X = linalg.smat(x, comp.n)
        try:
            chol = np.linalg.cholesky(X)
        except np.linalg.LinAlgError:
            return np.inf
        s, g = self.margins(x)
        if (comp.m_le and np.min(s) <= 0.0) or (comp.m_nn and np.min(g) <= 0.0):
            return np.inf
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        val = -t * float(comp.c @ x) - logdet
        if comp.m_le:
            val -= float(np.sum(np.log(s)))
        if comp.m_nn:
            val -= float(np.sum(np.log(g)))
        return val

    def center(self, x: np.ndarray, t: float, tol: float,
               max_steps: int = 80) -> _CenterState:
        comp, cfg = self.comp, self.cfg
        best = None
        for _ in range(max_steps):
            self.budget.take()
            X = linalg.smat(x, comp.n)
            cho = scipy.linalg.cho_factor(X, lower=True, check_finite=False)
            xi = scipy.linalg.cho_solve(cho, np.eye(comp.n), check_finite=False)
            xi = 0.5 * (xi + xi.T)
            s, g = self.margins(x)
            grad = -t * comp.c - linalg.svec(xi)
            h = _psd_hessian(xi, self.ii, self.jj, self.w)
            if comp.m_le:
                inv_s = 1.0 / s
                grad += self._l_dense.T @ inv_s if self._l_dense is not None \
                    else comp.L.T @ inv_s
                h += self._weighted_gram(self._l_dense, comp.L, inv_s)
            if comp.m_nn:
                inv_g = 1.0 / g
                grad -= self._n_dense.T @ inv_g if self._n_dense is not None \
                    else comp.N.T @ inv_g
                h += self._weighted_gram(self._n_dense, comp.N, inv_g)
            dx, nu = self._kkt(h, grad, x)
            dec_sq = float(dx @ h @ dx)
            state = _CenterState(
                x=x, nu=nu, slacks_le=s, margins_nn=g, xi=xi,
                decrement=np.sqrt(max(dec_sq, 0.0)),
            )
            if state.decrement <= tol:
                return state
            if best is None or state.decrement < best.decrement:
                best = state
            x_new, moved = self._line_search(x, dx, grad, t)
            if not moved:
                # Line search cannot make progress: the floating-point floor
                # of this centering problem is reached.
                return best
            x = x_new
            if abs(float(comp.c @ x)) > cfg.unbounded_cap:
                raise _Unbounded()
        # Centering did not converge inside the step cap; report the best
        # state and let the caller decide whether the answer is usable.
        return best if best is not None else state

    @staticmethod
    def _weighted_gram(dense, sparse_mat, inv_margin):
        d = inv_margin * inv_margin
        if dense is not None:
            return (dense * d[:, None]).T @ dense
        scaled = sparse_mat.multiply(inv_margin[:, None])
        return (scaled.T @ scaled).toarray()

    def _kkt(self, h: np.ndarray, grad: np.ndarray, x: np.ndarray):
        comp = self.comp
        try:
            cho = scipy.linalg.cho_factor(h, lower=True, check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            # Severely ill-conditioned Hessian; regularize minimally.
            bump = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(h)))))
            cho = scipy.linalg.cho_factor(
                h + bump * np.eye(comp.p), lower=True, check_finite=False
            )
        if comp.m_eq == 0:
            return -scipy.linalg.cho_solve(cho, grad, check_finite=False), np.zeros(0)
        u1 = scipy.linalg.cho_solve(cho, grad, check_finite=False)
        u2 = scipy.linalg.cho_solve(cho, comp.E.T, check_finite=False)
        schur = comp.E @ u2
        r_eq = comp.b_e - comp.E @ x
        rhs = -(comp.E @ u1) - r_eq
        nu = _sym_pinv_solve(schur, rhs)
        dx = -u1 - u2 @ nu
        return dx, nu

    def _line_search(self, x: np.ndarray, dx: np.ndarray, grad: np.ndarray,
                     t: float) -> tuple[np.ndarray, bool]:
        """Armijo backtracking; the flag reports whether the barrier value
        actually improved (False signals the floating-point floor)."""
        comp = self.comp
        alpha = 1.0
        s, g = self.margins(x)
        if comp.m_le:
            ds = comp.L @ dx
            hit = ds > 0
            if np.any(hit):
                alpha = min(alpha, 0.99 * float(np.min(s[hit] / ds[hit])))
        if comp.m_nn:
            dg = comp.N @ dx
            hit = dg < 0
            if np.any(hit):
                alpha = min(alpha, 0.99 * float(np.min(g[hit] / (-dg[hit]))))
        base = self.value(x, t)
        slope = float(grad @ dx)
        for _ in range(60):
            cand = x + alpha * dx
            val = self.value(cand, t)
            if np.isfinite(val) and val <= base + 0.25 * alpha * slope:
                return cand, bool(val < base)
            alpha *= 0.5
        return x, False


def _sym_pinv_solve(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a symmetric PSD system, tolerating rank deficiency."""
    if a.shape[0] == 0:
        return np.zeros(0)
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    cutoff = max(1e-11 * max(float(w[-1]), 0.0), 1e-300)
    inv = np.where(w > cutoff, 1.0 / np.maximum(w, cutoff), 0.0)
    return v @ (inv * (v.T @ rhs))


# ---------------------------------------------------------------------------
# Strictly feasible starts.
# ---------------------------------------------------------------------------


def _eq_solve(comp: _Compiled) -> np.ndarray:
    """Least-norm solution of the equality rows (raises if inconsistent)."""
    if comp.m_eq == 0:
        return np.zeros(comp.p)
    x, *_ = np.linalg.lstsq(comp.E, comp.b_e, rcond=1e-8)
    resid = comp.b_e - comp.E @ x
    corr, *_ = np.linalg.lstsq(comp.E, resid, rcond=1e-8)
    x = x + corr
    if np.linalg.norm(comp.E @ x - comp.b_e) > 1e-7 * (1.0 + np.linalg.norm(comp.b_e)):
        raise _Infeasible("equality rows are inconsistent")
    return x


def _project_eq(comp: _Compiled, x: np.ndarray) -> np.ndarray:
    if comp.m_eq == 0:
        return x
    d, *_ = np.linalg.lstsq(comp.E, comp.E @ x - comp.b_e, rcond=1e-8)
    return x - d


def _min_margin(comp: _Compiled, x: np.ndarray) -> float:
    vals = [linalg.min_eigenvalue(linalg.smat(x, comp.n))]
    if comp.m_le:
        vals.append(float(np.min(comp.b_l - comp.L @ x)))
    if comp.m_nn:
        vals.append(float(np.min(comp.N @ x)))
    return min(vals)


def _interior_start(
    comp: _Compiled, cfg: SolverConfig, warm: np.ndarray | None = None
) -> np.ndarray | None:
    bases = []
    if warm is not None:
        bases.append(_project_eq(comp, warm))
    x_ln = _eq_solve(comp)
    if comp.m_eq:
        bases.append(x_ln)
    eye = linalg.svec(np.eye(comp.n))
    for scale in (1.0 / comp.n, 1.0, 0.1 / comp.n):
        bases.append(_project_eq(comp, scale * eye))
    candidates = list(bases)
    if comp.m_nn:
        push = np.asarray(comp.N.sum(axis=0)).ravel()
        norm = np.linalg.norm(push)
        if norm > 0:
            push /= norm
            for base in bases:
                base_scale = max(float(np.linalg.norm(base)), 1e-6)
                for eta in (0.5, 0.05):
                    candidates.append(_project_eq(comp, base + eta * base_scale * push))
    for x in candidates:
        if comp.m_eq and np.linalg.norm(comp.E @ x - comp.b_e) > 1e-8 * (
            1.0 + np.linalg.norm(comp.b_e)
        ):
            continue
        if _min_margin(comp, x) >= cfg.interior_margin:
            return x
    return None


# ---------------------------------------------------------------------------
# Phase I: maximize the minimum margin.
# ---------------------------------------------------------------------------


@dataclass
class _Certificate:
    """A combination sum_k d_k row_k of constraint rows that is (nearly)
    PSD and pairs to (nearly) zero against the right-hand sides.

    Coefficients on LE and nonnegativity rows are nonnegative, so adding
    a positive multiple to a dual keeps its sign constraints.  Every
    feasible X then satisfies S . X <= shift, which for a PSD S with
    tiny shift forces X onto null(S): the certificate simultaneously
    identifies the face and repairs lifted duals.
    """

    d_eq: np.ndarray
    d_le: np.ndarray
    d_nn: np.ndarray
    matrix: np.ndarray
    shift: float


@dataclass
class _PhaseOneOutcome:
    kind: str                      # "interior" | "reduce"
    x: np.ndarray | None = None
    x_point: np.ndarray | None = None       # max-margin primal point
    certificate: _Certificate | None = None  # from the barrier multipliers


def _phase_one_compiled(comp: _Compiled, tau0: float) -> _Compiled:
    """Embed max-margin as a program on (n+1)-dimensional matrices.

    The variable is X' = [[W, *], [*, delta]] with X = W + tau I and
    tau = tau0 + delta; the margin constraints become ordinary rows on
    X' and the single objective entry is delta.
    """
    n, n1 = comp.n, comp.n + 1
    p1 = n1 * (n1 + 1) // 2

    def embed(mat_n: np.ndarray, delta_coeff: float) -> np.ndarray:
        m = np.zeros((n1, n1))
        m[:n, :n] = mat_n
        m[n, n] = delta_coeff
        return m

    eq_rows, b_e = [], []
    for row, rhs in zip(comp.E, comp.b_e):
        a = linalg.smat(row, n)
        tr = float(np.trace(a))
        eq_rows.append(linalg.svec(embed(a, tr)))
        b_e.append(rhs - tau0 * tr)
    le_rows, b_l = [], []
    for row, rhs in zip(comp.L.toarray() if comp.m_le else [], comp.b_l):
        a = linalg.smat(row, n)
        tr = float(np.trace(a))
        le_rows.append(linalg.svec(embed(a, tr + 1.0)))
        b_l.append(rhs - tau0 * (tr + 1.0))
    for row in comp.N.toarray() if comp.m_nn else []:
        b = linalg.smat(row, n)
        tr = float(np.trace(b))
        le_rows.append(linalg.svec(embed(-b, 1.0 - tr)))
        b_l.append(-tau0 * (1.0 - tr))
    cap = np.zeros((n1, n1))
    cap[n, n] = 1.0
    le_rows.append(linalg.svec(cap))
    b_l.append(1.0 - tau0)

    obj = np.zeros(p1)
    obj[-1] = 1.0  # svec coordinate of the (n, n) entry is last
    return _Compiled(
        n=n1,
        p=p1,
        c=obj,
        E=np.vstack(eq_rows) if eq_rows else np.zeros((0, p1)),
        b_e=np.array(b_e),
        L=_sparse_from_rows(le_rows, p1),
        b_l=np.array(b_l),
        N=scipy.sparse.csr_matrix((0, p1)),
        eq_src=comp.eq_src.copy(),
        le_src=np.zeros(len(b_l), dtype=int),
        nn_src=np.zeros(0, dtype=int),
        eq_scale=np.ones(len(b_e)),
        le_scale=np.ones(len(b_l)),
        nn_scale=np.zeros(0),
    )


def _phase_one(comp: _Compiled, cfg: SolverConfig,
               budget: _Budget) -> _PhaseOneOutcome:
    x0 = _eq_solve(comp)
    tau0 = min(_min_margin(comp, x0), 1.0) - 1.0
    pcomp = _phase_one_compiled(comp, tau0)

    # Strict start by construction: W = X0 - tau I, delta = 1/2.
    w0 = linalg.smat(x0, comp.n) - (tau0 + 0.5) * np.eye(comp.n)
    start = np.zeros((comp.n + 1, comp.n + 1))
    start[: comp.n, : comp.n] = w0
    start[comp.n, comp.n] = 0.5
    x = linalg.svec(start)

    barrier = _Barrier(pcomp, cfg, budget)
    nu_count = pcomp.barrier_count
    mu = max(cfg.mu, 100.0)  # margins need less precision than objectives
    t = cfg.t_init
    while True:
        state = barrier.center(x, t, cfg.newton_tol)
        x = state.x
        gap = nu_count / t
        delta = linalg.smat(x, pcomp.n)[comp.n, comp.n]
        tau = tau0 + delta
        if tau >= cfg.interior_margin:
            return _PhaseOneOutcome(kind="interior", x=_phase_one_point(comp, x, tau0))
        # The gap bound nu/t is only meaningful at a converged center; a
        # stale iterate must never trigger an infeasibility verdict or a
        # premature reduction.
        converged = state.decrement <= 1.01 * cfg.newton_tol
        if not converged:
            if tau < -1e-6:
                raise _OutOfIterations()
            # Round-off floor with the margin already pinned near zero:
            # classify with what we have.
        if converged and tau + gap < -1e-9:
            raise _Infeasible("phase I certifies an empty feasible set")
        if (
            not converged
            or gap <= max(0.1 * abs(tau), cfg.certificate_gap)
            or t >= cfg.t_cap
        ):
            if tau >= max(gap, 1e-9):
                # A thin but usable interior.
                return _PhaseOneOutcome(
                    kind="interior", x=_phase_one_point(comp, x, tau0)
                )
            # No usable interior; tighten the center so the eigenvalue
            # split of the primal point and the dual certificate are as
            # clean as the arithmetic allows, then reduce.
            state = barrier.center(x, t, cfg.newton_tol_final)
            return _phase_one_certificate(comp, pcomp, barrier, state, t, tau0)
        t *= mu


def _phase_one_point(comp: _Compiled, x_ext: np.ndarray, tau0: float) -> np.ndarray:
    full = linalg.smat(x_ext, comp.n + 1)
    tau = tau0 + full[comp.n, comp.n]
    X = full[: comp.n, : comp.n] + tau * np.eye(comp.n)
    return _project_eq(comp, linalg.svec(X))


def _certificate_from_coeffs(comp: _Compiled, d_eq, d_le, d_nn) -> _Certificate:
    combo = np.zeros(comp.p)
    if comp.m_eq:
        combo += comp.E.T @ d_eq
    if comp.m_le:
        combo += comp.L.T @ d_le
    if comp.m_nn:
        combo -= comp.N.T @ d_nn
    s_mat = linalg.smat(combo, comp.n)
    shift = 0.0
    if comp.m_eq:
        shift += float(d_eq @ comp.b_e)
    if comp.m_le:
        shift += float(d_le @ comp.b_l)
    return _Certificate(
        d_eq=np.asarray(d_eq, dtype=float),
        d_le=np.asarray(d_le, dtype=float),
        d_nn=np.asarray(d_nn, dtype=float),
        matrix=s_mat,
        shift=shift,
    )


def _phase_one_certificate(comp, pcomp, barrier, state, t, tau0) -> _PhaseOneOutcome:
    """Dual multipliers of phase I give S = sum of rows, PSD, with a
    near-zero pairing against the right-hand sides, so every feasible
    point is supported on null(S).  The max-margin primal point is kept
    as well: its eigenvalue split locates the face far more accurately
    than the certificate's (the null eigenvalues of the point sit at the
    remaining phase-I gap, while the certificate's small eigenvalues are
    genuine and carry relative noise)."""
    m_le_orig = comp.m_le
    mults = 1.0 / (t * state.slacks_le)  # one per phase-I LE row
    y_le = mults[:m_le_orig] if m_le_orig else np.zeros(0)
    z = mults[m_le_orig: m_le_orig + comp.m_nn] if comp.m_nn else np.zeros(0)
    y_eq = state.nu / t if comp.m_eq else np.zeros(0)
    cert = _certificate_from_coeffs(comp, y_eq, y_le, z)
    full = linalg.smat(state.x, comp.n + 1)
    tau = tau0 + full[comp.n, comp.n]
    x_point = linalg.svec(full[: comp.n, : comp.n] + tau * np.eye(comp.n))
    return _PhaseOneOutcome(kind="reduce", x_point=x_point, certificate=cert)


# ---------------------------------------------------------------------------
# Facial reduction.
# ---------------------------------------------------------------------------


def _null_seed(comp: _Compiled, outcome: _PhaseOneOutcome) -> np.ndarray | None:
    """Eigenvectors spanning the forced-null directions, seeded from the
    max-margin point (null eigenvalues sit at the phase-I gap, so the
    split is clean)."""
    point = linalg.smat(outcome.x_point, comp.n)
    w, v = np.linalg.eigh(point)
    scale = max(float(w[-1]), 0.0)
    if scale <= 0.0:
        return None
    null = w < max(1e-5 * scale, 1e-9)
    if not np.any(null) or np.all(null):
        return None
    return v[:, null]


def _polish_certificate(
    comp: _Compiled, seed: np.ndarray, cfg: SolverConfig
) -> _Certificate | None:
    """Fit a sign-feasible combination of constraint rows to the projector
    onto the suspected forced-null subspace.

    The fit is a nonnegative least-squares over columns [+-equality rows,
    +LE rows, -nonneg rows] with a heavily weighted extra row pinning the
    rhs pairing to zero.  Unlike the barrier multipliers, the result is
    built from exact row data, so its null space (the face) is as sharp
    as the fit residual.  Iterating the fit against its own range tightens
    an imperfect seed.
    """
    m_eq, m_le, m_nn = comp.m_eq, comp.m_le, comp.m_nn
    if 2 * m_eq + m_le + m_nn == 0 or 2 * m_eq + m_le + m_nn > 6000:
        return None
    penalty = 1e5

    def build_columns(include_ineq: bool):
        n_cols = 2 * m_eq + (m_le + m_nn if include_ineq else 0)
        if n_cols == 0:
            return None, None
        cols = np.zeros((comp.p + 1, n_cols))
        pairing = np.zeros(n_cols)
        pos = 0
        if m_eq:
            e_t = comp.E.T
            cols[: comp.p, pos: pos + m_eq] = e_t
            pairing[pos: pos + m_eq] = comp.b_e
            pos += m_eq
            cols[: comp.p, pos: pos + m_eq] = -e_t
            pairing[pos: pos + m_eq] = -comp.b_e
            pos += m_eq
        if include_ineq and m_le:
            cols[: comp.p, pos: pos + m_le] = comp.L.toarray().T
            pairing[pos: pos + m_le] = comp.b_l
            pos += m_le
        if include_ineq and m_nn:
            cols[: comp.p, pos: pos + m_nn] = -comp.N.toarray().T
            pos += m_nn
        cols[comp.p, :] = penalty * pairing
        return cols, n_cols

    def split_coeffs(d, include_ineq: bool):
        pos = 0
        if m_eq:
            d_eq = d[pos: pos + m_eq] - d[pos + m_eq: pos + 2 * m_eq]
            pos += 2 * m_eq
        else:
            d_eq = np.zeros(0)
        if include_ineq:
            d_le = d[pos: pos + m_le]
            pos += m_le
            d_nn = d[pos: pos + m_nn]
        else:
            d_le = np.zeros(m_le)
            d_nn = np.zeros(m_nn)
        return d_eq, d_le, d_nn

    def fit(nb, include_ineq: bool) -> _Certificate | None:
        cols, n_cols = build_columns(include_ineq)
        if cols is None:
            return None
        target = np.append(linalg.svec(nb @ nb.T), 0.0)
        try:
            d, resid = scipy.optimize.nnls(
                cols, target, maxiter=max(40 * n_cols, 400)
            )
        except RuntimeError:
            return None
        if resid > 0.9 * np.linalg.norm(target):
            return None
        new = _certificate_from_coeffs(comp, *split_coeffs(d, include_ineq))
        w = np.linalg.eigvalsh(new.matrix)
        top = max(float(w[-1]), 0.0)
        if top <= 1e-10 or abs(new.shift) > 1e-6 * (1.0 + top):
            return None
        return new

    nb = seed
    k = nb.shape[1]
    cert = None
    for _ in range(3):
        # Certificates are usually pure combinations of equality rows; try
        # the small fit first and fall back to the full column set.
        new_cert = fit(nb, include_ineq=False)
        if new_cert is None:
            new_cert = fit(nb, include_ineq=True)
        if new_cert is None:
            return cert
        w, v = np.linalg.eigh(new_cert.matrix)
        top = float(w[-1])
        strong = w >= 1e-2 * top
        if not np.any(strong) or np.all(strong):
            return cert
        cert = new_cert
        k_new = int(np.sum(strong))
        nb_new = v[:, strong]
        if k_new == k and np.linalg.norm(nb_new @ nb_new.T - nb @ nb.T) < 1e-12:
            break
        nb, k = nb_new, k_new
    return cert


def _face_of_certificate(cert: _Certificate, n: int) -> np.ndarray | None:
    w, v = np.linalg.eigh(cert.matrix)
    top = max(float(w[-1]), 0.0)
    if top <= 0.0:
        return None
    keep = w < 1e-2 * top
    if not np.any(keep) or np.all(keep):
        return None
    return v[:, keep]


def _face_and_certificate(
    comp: _Compiled, outcome: _PhaseOneOutcome, cfg: SolverConfig
) -> tuple[np.ndarray, _Certificate | None] | None:
    """Choose the face to reduce to and the certificate used to lift duals.

    Preferred: a polished certificate (exact row data, sharp null space);
    its null space is provably a valid face regardless of the seed.
    Fallbacks: the raw phase-I certificate, then the eigen-split of the
    max-margin point with no lift certificate.
    """
    seed = _null_seed(comp, outcome)
    if seed is not None:
        cert = _polish_certificate(comp, seed, cfg)
        if cert is not None:
            face = _face_of_certificate(cert, comp.n)
            if face is not None:
                return face, cert
    raw = outcome.certificate
    if raw is not None and float(np.trace(raw.matrix)) > 1e-10:
        w, v = np.linalg.eigh(raw.matrix / float(np.trace(raw.matrix)))
        keep = w <= 1e-6 * max(float(w[-1]), 1e-12)
        if np.any(keep) and not np.all(keep):
            return v[:, keep], raw
    if seed is not None and seed.shape[1] < comp.n:
        w, v = np.linalg.eigh(linalg.smat(outcome.x_point, comp.n))
        face = v[:, w >= max(1e-5 * max(float(w[-1]), 0.0), 1e-9)]
        if 0 < face.shape[1] < comp.n:
            return face, raw
    return None


def _reduce(comp: _Compiled, v: np.ndarray) -> _Compiled:
    """Restrict the program to X = V X~ V^T."""
    r = v.shape[1]
    pr = r * (r + 1) // 2

    def red(mat: np.ndarray) -> np.ndarray:
        m = v.T @ mat @ v
        return 0.5 * (m + m.T)

    eq_rows, b_e, eq_src, eq_scale = [], [], [], []
    for row, rhs, src, scale in zip(comp.E, comp.b_e, comp.eq_src, comp.eq_scale):
        m = red(linalg.smat(row, comp.n))
        norm = float(np.linalg.norm(m))
        if norm <= 1e-11:
            if abs(rhs) > 1e-7:
                raise _Infeasible(
                    "an equality row vanishes on the reduced face but has "
                    f"rhs {rhs:.3e}"
                )
            continue
        eq_rows.append(linalg.svec(m) / norm)
        b_e.append(rhs / norm)
        eq_src.append(src)
        eq_scale.append(scale * norm)
    le_rows, b_l, le_src, le_scale = [], [], [], []
    if comp.m_le:
        for row, rhs, src, scale in zip(
            comp.L.toarray(), comp.b_l, comp.le_src, comp.le_scale
        ):
            m = red(linalg.smat(row, comp.n))
            norm = float(np.linalg.norm(m))
            if norm <= 1e-11:
                if rhs < -1e-7:
                    raise _Infeasible(
                        "an inequality row vanishes on the reduced face but has "
                        f"rhs {rhs:.3e} < 0"
                    )
                continue
            le_rows.append(linalg.svec(m) / norm)
            b_l.append(rhs / norm)
            le_src.append(src)
            le_scale.append(scale * norm)
    nn_rows, nn_src, nn_scale = [], [], []
    if comp.m_nn:
        for row, src, scale in zip(comp.N.toarray(), comp.nn_src, comp.nn_scale):
            m = red(linalg.smat(row, comp.n))
            norm = float(np.linalg.norm(m))
            if norm <= 1e-11:
                continue
            nn_rows.append(linalg.svec(m) / norm)
            nn_src.append(src)
            nn_scale.append(scale * norm)
    e_mat = np.vstack(eq_rows) if eq_rows else np.zeros((0, pr))
    b_e = np.array(b_e)
    if len(b_e):
        # The face basis is accurate only to the phase-I gap, which leaves
        # the reduced equality system inconsistent at that level; project
        # the rhs onto the row range so Newton has an exact target.  The
        # final solution is re-fitted against the original rows afterwards.
        x_ls, *_ = np.linalg.lstsq(e_mat, b_e, rcond=1e-8)
        resid = b_e - e_mat @ x_ls
        if np.linalg.norm(resid) > 1e-5 * (1.0 + np.linalg.norm(b_e)):
            raise _Infeasible(
                "equality rows are inconsistent on the reduced face"
            )
        b_e = e_mat @ x_ls
    return _Compiled(
        n=r,
        p=pr,
        c=linalg.svec(red(linalg.smat(comp.c, comp.n))),
        E=e_mat,
        b_e=b_e,
        L=_sparse_from_rows(le_rows, pr),
        b_l=np.array(b_l),
        N=_sparse_from_rows(nn_rows, pr),
        eq_src=np.array(eq_src, dtype=int),
        le_src=np.array(le_src, dtype=int),
        nn_src=np.array(nn_src, dtype=int),
        eq_scale=np.array(eq_scale),
        le_scale=np.array(le_scale),
        nn_scale=np.array(nn_scale),
    )


# ---------------------------------------------------------------------------
# Inner solve: orchestration of start finding, reduction, path following.
# ---------------------------------------------------------------------------


@dataclass
class _Inner:
    """Solution in compiled coordinates, duals indexed by source rows."""

    x: np.ndarray
    y: np.ndarray       # per program.constraints index
    z: np.ndarray       # per program.nonneg index


def _solve_inner(program_dims: tuple[int, int], comp: _Compiled,
                 cfg: SolverConfig, budget: _Budget, depth: int = 0,
                 warm: np.ndarray | None = None) -> _Inner:
    x0 = _interior_start(comp, cfg, warm)
    if x0 is None:
        outcome = _phase_one(comp, cfg, budget)
        if outcome.kind == "interior":
            x0 = outcome.x
        else:
            if depth >= cfg.max_reduction_depth:
                raise _Infeasible("facial reduction depth exhausted")
            picked = _face_and_certificate(comp, outcome, cfg)
            if picked is None or picked[0].shape[1] >= comp.n:
                raise _Infeasible("phase I certificate does not expose a face")
            v, cert = picked
            rcomp = _reduce(comp, v)
            x_warm = linalg.svec(v.T @ linalg.smat(outcome.x_point, comp.n) @ v)
            inner = _solve_inner(
                program_dims, rcomp, cfg, budget, depth + 1, warm=x_warm
            )
            return _lift(program_dims, comp, v, inner, cert, cfg)
    return _phase_two(program_dims, comp, x0, cfg, budget)


def _phase_two(program_dims, comp: _Compiled, x0: np.ndarray,
               cfg: SolverConfig, budget: _Budget) -> _Inner:
    barrier = _Barrier(comp, cfg, budget)
    nu_count = comp.barrier_count
    t = cfg.t_init
    x = x0
    while True:
        state = barrier.center(x, t, cfg.newton_tol)
        x = state.x
        primal = float(comp.c @ x)
        if abs(primal) > cfg.unbounded_cap:
            raise _Unbounded()
        target = cfg.gap_tol * (1.0 + abs(primal))
        if 1.25 * nu_count / t <= target:
            break
        # Do not overshoot the barrier parameter: conditioning of the KKT
        # system grows with t, so stop exactly where the gap bound is met.
        t = min(t * cfg.mu, 1.6 * nu_count / target)
    state = barrier.center(x, t, cfg.newton_tol_final)
    x = state.x
    m_total, n_total = program_dims
    y = np.zeros(m_total)
    z = np.zeros(n_total)
    if comp.m_eq:
        y[comp.eq_src] = (state.nu / t) / comp.eq_scale
    if comp.m_le:
        y[comp.le_src] = (1.0 / (t * state.slacks_le)) / comp.le_scale
    if comp.m_nn:
        z[comp.nn_src] = (1.0 / (t * state.margins_nn)) / comp.nn_scale
    return _Inner(x=x, y=y, z=z)


def _lift(program_dims, comp: _Compiled, v: np.ndarray, inner: _Inner,
          cert: _Certificate | None, cfg: SolverConfig) -> _Inner:
    """Map a face solution back and repair dual semidefiniteness.

    The primal lifts as X = V X~ V^T.  The reduced duals reference the
    same source rows, so they carry over; the slack matrix is then PSD
    only on the face, and adding t * certificate (a PSD combination of
    the same rows with near-zero value shift) makes it PSD globally.
    """
    x_red = inner.x
    r = int(v.shape[1])
    X = v @ linalg.smat(x_red, r) @ v.T
    x = linalg.svec(0.5 * (X + X.T))
    y, z = inner.y.copy(), inner.z.copy()
    if cert is None:
        return _Inner(x=x, y=y, z=z)

    def slack(y_vec, z_vec) -> np.ndarray:
        combo = -comp.c.copy()
        if comp.m_eq:
            combo += comp.E.T @ (y_vec[comp.eq_src] * comp.eq_scale)
        if comp.m_le:
            combo += comp.L.T @ (y_vec[comp.le_src] * comp.le_scale)
        if comp.m_nn:
            combo -= comp.N.T @ (z_vec[comp.nn_src] * comp.nn_scale)
        return linalg.smat(combo, comp.n)

    def apply_cert(t):
        y2, z2 = y.copy(), z.copy()
        if comp.m_eq:
            y2[comp.eq_src] += t * cert.d_eq / comp.eq_scale
        if comp.m_le:
            y2[comp.le_src] += t * cert.d_le / comp.le_scale
        if comp.m_nn:
            z2[comp.nn_src] += t * cert.d_nn / comp.nn_scale
        return y2, z2

    eig0 = linalg.min_eigenvalue(slack(y, z))
    if eig0 < -0.5 * cfg.feas_tol:
        best = (eig0, y, z)
        t_try = max(abs(eig0), 1e-9)
        for _ in range(48):
            y2, z2 = apply_cert(t_try)
            eig = linalg.min_eigenvalue(slack(y2, z2))
            if eig > best[0]:
                best = (eig, y2, z2)
            if eig >= -0.5 * cfg.feas_tol:
                break
            t_try *= 2.0
        _, y, z = best
    return _Inner(x=x, y=y, z=z)


# ---------------------------------------------------------------------------
# Public entry point.
# ---------------------------------------------------------------------------


def solve(program: SdpProgram, config: SolverConfig | None = None) -> SolveReport:
    """Solve a structured program, returning primal, dual and residuals.

    Statuses other than OPTIMAL are best-effort classifications and never
    raised as exceptions; ill-formed programs (asymmetric or mismatched
    matrices) raise ValueError before any solving starts.
    """
    cfg = config or SolverConfig()
    model.require_valid(program)
    budget = _Budget(cfg.max_iters)
    dims = (program.num_affine, program.num_nonneg)
    status = SolveStatus.OPTIMAL
    inner = None
    try:
        comp = _compile(program)
        inner = _solve_inner(dims, comp, cfg, budget, depth=0)
    except _Infeasible:
        status = SolveStatus.INFEASIBLE
    except _Unbounded:
        status = SolveStatus.UNBOUNDED
    except _OutOfIterations:
        status = SolveStatus.MAX_ITERS

    if inner is None:
        X = np.zeros((program.dim, program.dim))
        y = np.zeros(program.num_affine)
        z = np.zeros(program.num_nonneg)
    else:
        X = linalg.smat(_refit_equalities(program, inner.x), program.dim)
        y, z = inner.y, inner.z
        X = _round_to_optimal_face(program, X, y, z, cfg)

    primal = linalg.frobenius_dot(program.objective, X)
    dual = float(y @ program.rhs_vector()) if program.num_affine else 0.0
    residuals = model.compute_residuals(program, X, y, z, primal, dual)
    if status is SolveStatus.OPTIMAL and not _within_tolerances(
        program, residuals, y, primal, cfg
    ):
        status = SolveStatus.MAX_ITERS
    solution = SdpSolution(
        X=X, y=y, z=z, primal_value=primal, dual_value=dual, residuals=residuals
    )
    return SolveReport(solution=solution, status=status, iterations=budget.used)


def _round_to_optimal_face(
    program: SdpProgram, X: np.ndarray, y: np.ndarray, z: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray:
    """Snap the primal onto the face complementary to the dual slack.

    At an optimum, X is supported on the null space of the dual slack
    matrix; the barrier iterate stops a little short of that face.  The
    projection of the iterate onto the face, corrected back onto the
    equality rows, is a candidate with a strictly better value whenever
    the dual is accurate; it is kept only if it stays feasible and does
    improve.  This removes the primal lag left by the Newton floor on
    degenerate instances.
    """
    slack = model.dual_slack_matrix(program, y, z)
    w, v = np.linalg.eigh(slack)
    scale = max(float(w[-1]), 0.0)
    if scale <= 0.0:
        return X
    face = v[:, w <= 1e-5 * scale]
    r = face.shape[1]
    if r == 0 or r >= program.dim:
        return X
    m0 = face.T @ X @ face
    m0 = 0.5 * (m0 + m0.T)
    eq_rows, resid = [], []
    for con in program.constraints:
        if con.relation is not Relation.EQ:
            continue
        reduced = face.T @ con.matrix @ face
        eq_rows.append(linalg.svec(0.5 * (reduced + reduced.T)))
        resid.append(con.rhs - linalg.frobenius_dot(reduced, m0))
    if eq_rows:
        e = np.vstack(eq_rows)
        d, *_ = np.linalg.lstsq(e, np.array(resid), rcond=1e-8)
        m = m0 + linalg.smat(d, r)
    else:
        m = m0
    cand = face @ m @ face.T
    cand = linalg.smat(_refit_equalities(program, linalg.svec(cand)), program.dim)
    guard = 0.9 * cfg.feas_tol
    if linalg.min_eigenvalue(cand) < -guard:
        return X
    for con in program.constraints:
        val = linalg.frobenius_dot(con.matrix, cand)
        if con.relation is Relation.EQ:
            if abs(val - con.rhs) > guard:
                return X
        elif val > con.rhs + guard:
            return X
    for b in program.nonneg:
        if linalg.frobenius_dot(b, cand) < -guard:
            return X
    old = linalg.frobenius_dot(program.objective, X)
    new = linalg.frobenius_dot(program.objective, cand)
    return cand if new > old else X


def _refit_equalities(program: SdpProgram, x: np.ndarray) -> np.ndarray:
    """Least-norm correction putting x back on the original equality rows.

    Facial reduction solves against a face known only to the phase-I gap;
    this removes the resulting drift (and any accumulated round-off) with
    a perturbation of the same tiny magnitude.
    """
    rows = [
        linalg.svec(con.matrix)
        for con in program.constraints
        if con.relation is Relation.EQ
    ]
    if not rows:
        return x
    e = np.vstack(rows)
    b = np.array(
        [con.rhs for con in program.constraints if con.relation is Relation.EQ]
    )
    d, *_ = np.linalg.lstsq(e, e @ x - b, rcond=1e-8)
    if np.linalg.norm(d) > 1e-4 * (1.0 + np.linalg.norm(x)):
        return x  # do not apply large corrections; report the honest residual
    return x - d


def _within_tolerances(program, residuals, y, primal, cfg) -> bool:
    if residuals.max_affine > cfg.feas_tol:
        return False
    if residuals.max_nonneg > cfg.feas_tol:
        return False
    if residuals.x_min_eigenvalue < -cfg.feas_tol:
        return False
    if residuals.dual_slack_min_eigenvalue < -cfg.feas_tol:
        return False
    for coeff, con in zip(y, program.constraints):
        if con.relation is Relation.LE and coeff < -cfg.feas_tol:
            return False
    if residuals.duality_gap > cfg.gap_tol * (1.0 + abs(primal)):
        return False
    return True
