import numpy as np
import pytest

from sdprod import library, linalg, model, solver
from sdprod.model import LinearConstraint, Relation, SdpProgram
from sdprod.solver import SolveStatus, SolverConfig


def one_dim_trivial():
    return SdpProgram(
        dim=1, objective=np.array([[1.0]]),
        constraints=(LinearConstraint(np.array([[1.0]]), 1.0),),
    )


def counterexample_square_optimum() -> float:
    """Oracle for the squared counterexample, independent of the solver.

    Dropping the nonnegativity row leaves max J.X over unit-trace PSD X,
    whose optimum is the top eigenvalue of J; the rank-one witness
    (e0 + e3)(e0 + e3)^T / 2 is feasible for the full program and attains
    that bound, pinning the value exactly.
    """
    ce = library.counterexample_program()
    prod = model.product(ce, ce)
    upper = linalg.eigen(prod.objective).eigenvalues[-1]
    v = np.zeros(4)
    v[0] = v[3] = 1.0
    witness = np.outer(v, v) / 2.0
    res = model.compute_residuals(prod, witness, np.zeros(1), np.zeros(4))
    assert res.max_affine < 1e-15 and res.max_nonneg == 0.0
    attained = linalg.frobenius_dot(prod.objective, witness)
    assert abs(attained - upper) < 1e-15
    return float(upper)


class TestBasicSolves:
    def test_one_dim(self):
        rep = solver.solve(one_dim_trivial())
        assert rep.status is SolveStatus.OPTIMAL
        assert abs(rep.solution.primal_value - 1.0) < 1e-6

    def test_counterexample_value_zero(self, counterexample):
        rep = solver.solve(counterexample)
        assert rep.status is SolveStatus.OPTIMAL
        assert abs(rep.solution.primal_value) < 1e-6

    def test_counterexample_square_value(self, counterexample):
        oracle = counterexample_square_optimum()
        assert oracle == 1.0
        rep = solver.solve(model.product(counterexample, counterexample))
        assert rep.status is SolveStatus.OPTIMAL
        assert abs(rep.solution.primal_value - oracle) < 1e-4

    def test_postconditions_on_optimal(self, gamma_2x2):
        cfg = SolverConfig()
        rep = solver.solve(gamma_2x2, cfg)
        assert rep.status is SolveStatus.OPTIMAL
        sol, res = rep.solution, rep.solution.residuals
        assert res.max_affine <= cfg.feas_tol
        assert res.max_nonneg <= cfg.feas_tol
        assert res.x_min_eigenvalue >= -cfg.feas_tol
        assert res.dual_slack_min_eigenvalue >= -cfg.feas_tol
        assert np.all(sol.z >= -1e-12)
        assert res.duality_gap <= cfg.gap_tol * (1 + abs(sol.primal_value))

    def test_weak_duality(self, theta_c5, gamma_1x1, counterexample):
        cfg = SolverConfig()
        for prog in (theta_c5, gamma_1x1, counterexample, one_dim_trivial()):
            rep = solver.solve(prog, cfg)
            assert rep.status is SolveStatus.OPTIMAL
            assert (
                rep.solution.dual_value
                >= rep.solution.primal_value - cfg.gap_tol * (1 + abs(rep.solution.primal_value))
            )

    def test_determinism_bit_identical(self, theta_c5):
        a = solver.solve(theta_c5)
        b = solver.solve(theta_c5)
        assert a.status is b.status and a.iterations == b.iterations
        assert a.solution.primal_value == b.solution.primal_value
        assert a.solution.dual_value == b.solution.dual_value
        assert np.array_equal(a.solution.X, b.solution.X)
        assert np.array_equal(a.solution.y, b.solution.y)
        assert np.array_equal(a.solution.z, b.solution.z)

    def test_objective_scaling(self, gamma_1x1):
        base = solver.solve(gamma_1x1).solution.primal_value
        scaled_prog = SdpProgram(
            dim=gamma_1x1.dim,
            objective=7.0 * gamma_1x1.objective,
            constraints=gamma_1x1.constraints,
            nonneg=gamma_1x1.nonneg,
        )
        scaled = solver.solve(scaled_prog).solution.primal_value
        assert abs(scaled - 7.0 * base) < 1e-6 * 7.0 * (1 + abs(base))


class TestStatuses:
    def test_infeasible_equalities(self):
        rows = (
            LinearConstraint(np.array([[1.0]]), 1.0),
            LinearConstraint(np.array([[1.0]]), 2.0),
        )
        rep = solver.solve(SdpProgram(dim=1, objective=np.eye(1), constraints=rows))
        assert rep.status is SolveStatus.INFEASIBLE

    def test_unbounded(self):
        rep = solver.solve(SdpProgram(dim=2, objective=np.eye(2)))
        assert rep.status is SolveStatus.UNBOUNDED

    def test_max_iters(self, theta_c5):
        rep = solver.solve(theta_c5, SolverConfig(max_iters=3))
        assert rep.status is SolveStatus.MAX_ITERS

    def test_invalid_program_raises(self):
        bad = SdpProgram(dim=2, objective=np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError):
            solver.solve(bad)


class TestDualSlackOp:
    def test_zero_duals_give_minus_objective(self, counterexample):
        out = solver.dual_slack(counterexample, np.zeros(1), np.zeros(2), "minus")
        assert np.array_equal(out, -counterexample.objective)

    def test_one_dim_at_optimum(self):
        p = one_dim_trivial()
        out = solver.dual_slack(p, np.array([1.0]), np.zeros(0), "minus")
        assert np.array_equal(out, np.zeros((1, 1)))

    def test_minus_slack_psd_at_gamma_optimum(self, gamma_2x2, solved):
        rep = solved("gamma_2x2", gamma_2x2)
        minus = solver.dual_slack(gamma_2x2, rep.solution.y, rep.solution.z, "minus")
        # verified independently through the eigendecomposition
        assert linalg.eigen(minus).eigenvalues[0] >= -1e-7

    def test_bad_sign_rejected(self, gamma_2x2):
        with pytest.raises(ValueError):
            solver.dual_slack(gamma_2x2, np.zeros(gamma_2x2.num_affine),
                              np.zeros(gamma_2x2.num_nonneg), "plus-minus")


class TestSignFlip:
    def test_flip_preserved_at_bipartite_optima(self, gamma_1x1, gamma_2x2,
                                                counterexample, solved):
        from sdprod import structure
        for key, prog in [("gamma_1x1", gamma_1x1), ("gamma_2x2", gamma_2x2),
                          ("ce", counterexample)]:
            rep = solved(key, prog)
            assert rep.status is SolveStatus.OPTIMAL
            assert structure.find_partition(prog) is not None
            y, z = rep.solution.y, rep.solution.z
            minus = solver.dual_slack(prog, y, z, "minus")
            plus = solver.dual_slack(prog, y, z, "plus")
            if linalg.min_eigenvalue(minus) >= -1e-7:
                assert linalg.min_eigenvalue(plus) >= -1e-7


class TestNnls:
    def test_exact_multiple_of_first_column(self):
        cols = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        coeffs, resid = solver.nnls(cols, 2.0 * cols[0])
        assert np.allclose(coeffs, [2.0, 0.0], atol=1e-12)
        assert resid < 1e-12

    def test_orthogonal_target(self):
        cols = [np.array([1.0, 0.0, 0.0])]
        target = np.array([0.0, 3.0, 4.0])
        coeffs, resid = solver.nnls(cols, target)
        assert np.allclose(coeffs, [0.0], atol=1e-12)
        assert abs(resid - 5.0) < 1e-12

    def test_signed_combination_clipped(self):
        # target = col0 - col1 with orthonormal columns.  Stationarity of
        # the clipped problem gives coefficients (1, 0) and residual 1:
        # the col1 weight would need to be negative, so it is active at 0.
        cols = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        target = cols[0] - cols[1]
        coeffs, resid = solver.nnls(cols, target)
        assert np.allclose(coeffs, [1.0, 0.0], atol=1e-9)
        assert abs(resid - 1.0) < 1e-9

    def test_empty_columns(self):
        coeffs, resid = solver.nnls([], np.array([1.0, 1.0]))
        assert coeffs.size == 0
        assert abs(resid - np.sqrt(2.0)) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            solver.nnls([np.array([1.0, 0.0])], np.array([1.0, 0.0, 0.0]))
