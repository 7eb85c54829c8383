import numpy as np
import pytest

from vqpde.driver import (ConvergenceRecord, NearSingularEnergyError,
                          OptimizerOptions, build_context,
                          evaluate_loss, evaluate_loss_dense, extract_profile,
                          gradient, optimize, quad_form_quantum)
from vqpde.fem import BeamProblem, BoundaryCase, LoadKind, LoadSpec
from vqpde.simulator import prepare_ansatz


def make_problem(case=BoundaryCase.CANTILEVER, n=3, **kw):
    defaults = dict(length=1.0, youngs_modulus=1.0, second_moment=1.0)
    defaults.update(kw)
    return BeamProblem(num_qubits=n, boundary_case=case, **defaults)


@pytest.fixture(scope="module")
def ctx3():
    return build_context(make_problem(), reps=2)


class TestBuildContext:
    @pytest.mark.parametrize("case", list(BoundaryCase))
    def test_target_energy_matches_direct_solve(self, case):
        ctx = build_context(make_problem(case), reps=2)
        u = np.linalg.solve(ctx.K_mod, ctx.load.vector)
        expected = -0.5 * float(ctx.load.vector @ u)
        assert ctx.target_energy == pytest.approx(expected, rel=1e-10)

    def test_load_is_normalized(self, ctx3):
        assert np.linalg.norm(ctx3.load.vector) == pytest.approx(1.0)

    def test_circuit_count_bookkeeping(self, ctx3):
        op = ctx3.structured
        assert ctx3.circuits_per_eval == len(op.terms) + len(op.bc_pairs) + 1

    def test_zero_load_rejected(self):
        with pytest.raises(ValueError):
            LoadSpec(LoadKind.CUSTOM, np.zeros(8), 1.0)


class TestLoss:
    def test_circuit_and_dense_paths_agree(self, ctx3):
        rng = np.random.default_rng(0)
        for _ in range(5):
            theta = rng.uniform(-np.pi, np.pi, ctx3.n_params)
            a = evaluate_loss(theta, ctx3)
            b = evaluate_loss_dense(theta, ctx3)
            assert a.loss == pytest.approx(b.loss, abs=1e-10)
            assert a.quad == pytest.approx(b.quad, abs=1e-8)
            assert a.overlap == pytest.approx(b.overlap, abs=1e-10)
            assert a.c_star == pytest.approx(b.c_star, abs=1e-10)

    def test_quad_form_matches_matrix(self, ctx3):
        theta = np.full(ctx3.n_params, 0.4)
        phi = prepare_ansatz(ctx3.n_qubits, ctx3.reps, theta)
        direct = float(phi.real_vector() @ ctx3.K_mod @ phi.real_vector())
        assert quad_form_quantum(ctx3, phi) == pytest.approx(direct, abs=1e-8)

    def test_loss_at_reference_equals_target(self, ctx3):
        """At phi = u_ref/||u_ref|| the reduced loss hits the exact optimum."""
        phi = ctx3.u_ref / np.linalg.norm(ctx3.u_ref)
        quad = float(phi @ ctx3.K_mod @ phi)
        overlap = float(ctx3.load.vector @ phi)
        loss = -overlap ** 2 / (2.0 * quad)
        assert loss == pytest.approx(ctx3.target_energy, rel=1e-10)

    def test_loss_bounded_below_by_target(self, ctx3):
        rng = np.random.default_rng(3)
        for _ in range(20):
            theta = rng.uniform(-np.pi, np.pi, ctx3.n_params)
            assert evaluate_loss_dense(theta, ctx3).loss >= \
                ctx3.target_energy - 1e-12

    def test_collapsed_quadratic_form_raises(self):
        import dataclasses
        ctx = build_context(make_problem(BoundaryCase.CANTILEVER), reps=0)
        # The constrained operator is positive definite, so the guard can only
        # trip on a degenerate system; emulate one through the dense path.
        bad = dataclasses.replace(ctx, K_mod=np.zeros_like(ctx.K_mod))
        with pytest.raises(NearSingularEnergyError):
            evaluate_loss_dense(np.zeros(3), bad)

    def test_gradient_against_coarse_differences(self, ctx3):
        theta = np.linspace(-1.0, 1.0, ctx3.n_params)
        g = gradient(theta, ctx3)
        h = 1e-5
        for k in [0, ctx3.n_params // 2, ctx3.n_params - 1]:
            step = np.zeros_like(theta)
            step[k] = h
            fd = (evaluate_loss_dense(theta + step, ctx3).loss
                  - evaluate_loss_dense(theta - step, ctx3).loss) / (2 * h)
            assert g[k] == pytest.approx(fd, rel=1e-3, abs=1e-8)


class TestExtractProfile:
    def test_reference_state_round_trip(self, ctx3):
        """Feeding the normalized classical solution reproduces it exactly."""
        phi = ctx3.u_ref / np.linalg.norm(ctx3.u_ref)
        quad = float(phi @ ctx3.K_mod @ phi)
        overlap = float(ctx3.load.vector @ phi)
        from vqpde.driver import LossBreakdown
        breakdown = LossBreakdown(quad, overlap, overlap / quad,
                                  -overlap ** 2 / (2 * quad))
        profile = extract_profile(ctx3, breakdown, phi)
        np.testing.assert_allclose(profile.state, ctx3.u_ref, atol=1e-10)
        np.testing.assert_allclose(profile.deflections, ctx3.u_ref[0::2],
                                   atol=1e-10)
        np.testing.assert_allclose(profile.rotations, ctx3.u_ref[1::2],
                                   atol=1e-10)

    def test_sign_gauge(self, ctx3):
        phi = ctx3.u_ref / np.linalg.norm(ctx3.u_ref)
        quad = float(phi @ ctx3.K_mod @ phi)
        overlap = float(ctx3.load.vector @ (-phi))
        from vqpde.driver import LossBreakdown
        breakdown = LossBreakdown(quad, overlap, overlap / quad,
                                  -overlap ** 2 / (2 * quad))
        profile = extract_profile(ctx3, breakdown, -phi)
        np.testing.assert_allclose(profile.state, ctx3.u_ref, atol=1e-10)


class TestOptimize:
    @pytest.mark.parametrize("case", list(BoundaryCase))
    def test_small_problem_converges(self, case):
        problem = make_problem(case)
        opts = OptimizerOptions(seed=0, restarts=3, max_iter=300)
        record, profile, breakdown = optimize(problem, opts, reps=3)
        ctx = build_context(problem, reps=3)
        rel = abs(breakdown.loss - ctx.target_energy) / abs(ctx.target_energy)
        assert rel <= 0.05
        assert isinstance(record, ConvergenceRecord)
        assert record.iterations >= 1
        assert len(record.restart_final_losses) == 3

    def test_deterministic_given_seed(self):
        problem = make_problem()
        opts = OptimizerOptions(seed=11, restarts=2, max_iter=60)
        rec1, prof1, bd1 = optimize(problem, opts, reps=2)
        rec2, prof2, bd2 = optimize(problem, opts, reps=2)
        np.testing.assert_array_equal(rec1.theta_final, rec2.theta_final)
        assert bd1.loss == bd2.loss
        np.testing.assert_array_equal(prof1.state, prof2.state)

    def test_different_seeds_differ(self):
        problem = make_problem()
        a = optimize(problem, OptimizerOptions(seed=1, restarts=1, max_iter=30),
                     reps=2)[0]
        b = optimize(problem, OptimizerOptions(seed=2, restarts=1, max_iter=30),
                     reps=2)[0]
        assert not np.array_equal(a.theta_final, b.theta_final)

    def test_restart_count_validated(self):
        with pytest.raises(ValueError):
            optimize(make_problem(), OptimizerOptions(restarts=0), reps=2)

    def test_history_is_monotone_enough(self):
        """BFGS with line search never ends above its own start."""
        problem = make_problem()
        record, _, bd = optimize(
            problem, OptimizerOptions(seed=5, restarts=1, max_iter=200), reps=2)
        assert bd.loss <= record.loss_history[0] + 1e-12
