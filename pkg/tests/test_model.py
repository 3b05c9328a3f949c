import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdprod import library, linalg, model, solver
from sdprod.model import LinearConstraint, Relation, SdpProgram

RNG = np.random.default_rng(11)


def one_dim_trivial():
    return SdpProgram(
        dim=1,
        objective=np.array([[1.0]]),
        constraints=(LinearConstraint(np.array([[1.0]]), 1.0),),
    )


class TestValidate:
    def test_well_formed(self):
        p = SdpProgram(
            dim=2,
            objective=np.eye(2),
            constraints=(LinearConstraint(np.eye(2), 1.0),),
            nonneg=(np.eye(2),),
        )
        assert model.validate(p) == []

    def test_dimension_mismatch(self):
        p = SdpProgram(
            dim=3,
            objective=np.ones((3, 3)),
            constraints=(LinearConstraint(np.eye(2), 1.0),),
        )
        defects = model.validate(p)
        assert any("dimension" in d for d in defects)

    def test_asymmetric_rejected_not_repaired(self):
        j = np.array([[0.0, 1.0], [0.0, 0.0]])
        p = SdpProgram(dim=2, objective=j)
        defects = model.validate(p)
        assert any("symmetric" in d for d in defects)
        # the stored matrix is untouched
        assert np.array_equal(p.objective, j)


class TestProduct:
    def test_trivial_one_dim(self):
        p = one_dim_trivial()
        pp = model.product(p, p)
        assert pp.dim == 1
        assert pp.num_affine == 1
        assert pp.constraints[0].rhs == 1.0

    def test_counterexample_square_objective_is_antidiagonal_ones(self):
        ce = library.counterexample_program()
        pp = model.product(ce, ce)
        expected = np.fliplr(np.eye(4))
        assert np.array_equal(pp.objective, expected)

    def test_constraint_counts_multiply(self):
        ce = library.counterexample_program()          # 1 affine, 2 nonneg
        g2 = library.gamma2inf_program(
            library.SignMatrix(np.array([[1.0, -1.0]]))
        )
        pp = model.product(ce, g2)
        assert pp.num_affine == ce.num_affine * g2.num_affine
        assert pp.num_nonneg == ce.num_nonneg * g2.num_nonneg
        assert pp.dim == ce.dim * g2.dim

    def test_relation_combination(self):
        le_row = LinearConstraint(np.eye(1), 1.0, Relation.LE)
        eq_row = LinearConstraint(np.eye(1), 1.0, Relation.EQ)
        p_le = SdpProgram(dim=1, objective=np.eye(1), constraints=(le_row, eq_row))
        pp = model.product(p_le, p_le)
        rels = [c.relation for c in pp.constraints]
        # lexicographic (i, j) pairing: only EQxEQ stays EQ
        assert rels == [Relation.LE, Relation.LE, Relation.LE, Relation.EQ]

    def test_invalid_input_raises(self):
        bad = SdpProgram(dim=2, objective=np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError):
            model.product(bad, bad)

    def test_rhs_multiplies(self):
        p1 = SdpProgram(
            dim=1, objective=np.eye(1),
            constraints=(LinearConstraint(np.eye(1), 3.0),),
        )
        p2 = SdpProgram(
            dim=1, objective=np.eye(1),
            constraints=(LinearConstraint(np.eye(1), 5.0),),
        )
        assert model.product(p1, p2).constraints[0].rhs == 15.0


class TestBipartiteTensor:
    def test_scalar(self):
        assert np.array_equal(
            model.bipartite_tensor(np.array([[1.0]])),
            np.array([[0.0, 1.0], [1.0, 0.0]]),
        )

    def test_two_by_two_shape(self):
        a = RNG.normal(size=(2, 2))
        h = model.bipartite_tensor(a)
        assert h.shape == (8, 8)
        assert np.array_equal(h, h.T)
        assert np.array_equal(h[:4, :4], np.zeros((4, 4)))
        assert np.array_equal(h[4:, 4:], np.zeros((4, 4)))

    def test_matches_submatrix_embedding(self):
        for _ in range(5):
            a = RNG.normal(size=(2, 2))
            big = linalg.kron(linalg.hat(a), linalg.hat(a))
            idx = [i * 4 + j for i in range(2) for j in range(2)]
            idx += [(2 + i) * 4 + (2 + j) for i in range(2) for j in range(2)]
            assert np.array_equal(big[np.ix_(idx, idx)], model.bipartite_tensor(a))


class TestTensorFeasibility:
    def test_tensor_of_feasible_points_is_feasible(self, theta_c5, gamma_1x1):
        # Handcrafted exactly feasible points.
        x1 = np.eye(5) / 5.0                       # theta: trace 1, edges 0
        x2 = np.full((2, 2), 0.5)                  # gamma 1x1: trace 1, cross >= 0
        prod = model.product(theta_c5, gamma_1x1)
        x = linalg.kron(x1, x2)
        res = model.compute_residuals(prod, x, np.zeros(prod.num_affine),
                                      np.zeros(prod.num_nonneg))
        assert res.max_affine < 1e-8
        assert res.max_nonneg < 1e-8
        assert res.x_min_eigenvalue > -1e-12

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_tensor_feasibility_random_gram_points(self, seed):
        # For programs with only a trace row, any unit-trace Gram matrix is
        # feasible and so is the tensor product of two of them.
        rng = np.random.default_rng(seed)

        def trace_program(n):
            return SdpProgram(
                dim=n, objective=np.zeros((n, n)),
                constraints=(LinearConstraint(np.eye(n), 1.0),),
            )

        def gram(n):
            g = rng.normal(size=(n, n))
            x = g @ g.T
            return x / np.trace(x)

        p1, p2 = trace_program(2), trace_program(3)
        x = linalg.kron(gram(2), gram(3))
        res = model.compute_residuals(
            model.product(p1, p2), x, np.zeros(1), np.zeros(0)
        )
        assert res.max_affine < 1e-8
        assert res.x_min_eigenvalue > -1e-10


class TestProductValueSymmetry:
    def test_factor_exchange_keeps_value(self, counterexample, gamma_1x1):
        r1 = solver.solve(model.product(counterexample, gamma_1x1))
        r2 = solver.solve(model.product(gamma_1x1, counterexample))
        assert abs(r1.solution.primal_value - r2.solution.primal_value) < 2e-6


class TestDualSlack:
    def test_length_mismatch(self, counterexample):
        with pytest.raises(ValueError):
            model.dual_slack_matrix(counterexample, np.zeros(3), np.zeros(2))
        with pytest.raises(ValueError):
            model.dual_slack_matrix(counterexample, np.zeros(1), np.zeros(1))
