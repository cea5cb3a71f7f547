import numpy as np
import pytest

from sparda.solvers import (LassoProblem, SolverConfig, group_soft_threshold,
                            lasso_cd, lasso_path, soft_threshold)


def lasso_objective(x, y, beta, beta0, lam):
    r = y - beta0 - x @ beta
    return np.mean(r**2) + lam * np.sum(np.abs(beta))


class TestSoftThreshold:
    def test_hand_values(self):
        assert soft_threshold(2.0, 0.5) == 1.5
        assert soft_threshold(0.3, 0.5) == 0.0
        assert soft_threshold(-1.0, 0.25) == -0.75

    def test_contraction_and_sign(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            z = rng.normal(scale=3)
            t = abs(rng.normal())
            out = soft_threshold(z, t)
            assert abs(out) <= abs(z)
            assert out == 0 or np.sign(out) == np.sign(z)


class TestGroupSoftThreshold:
    def test_kills_vector_at_its_norm(self):
        assert np.array_equal(group_soft_threshold(np.array([3.0, 4.0]), 5.0),
                              np.zeros(2))

    def test_shrinks_preserving_direction(self):
        out = group_soft_threshold(np.array([3.0, 4.0]), 2.5)
        assert np.allclose(out, [1.5, 2.0])

    def test_zero_threshold_is_identity(self):
        v = np.array([0.3, -1.2, 0.0])
        assert np.array_equal(group_soft_threshold(v, 0.0), v)

    def test_zero_vector_stays_zero(self):
        assert np.array_equal(group_soft_threshold(np.zeros(3), 1.0), np.zeros(3))


def random_problem(rng, n=20, p=6):
    x = rng.standard_normal((n, p)) @ (np.eye(p) + 0.3 * rng.standard_normal((p, p)))
    beta = np.zeros(p)
    beta[: p // 2] = rng.normal(size=p // 2)
    y = x @ beta + rng.normal(scale=0.5, size=n)
    return x, y


class TestLassoCd:
    def test_zero_solution_at_lambda_max(self):
        rng = np.random.default_rng(1)
        x, y = random_problem(rng)
        xc = x - x.mean(axis=0)
        yc = y - y.mean()
        lam_max = np.max(np.abs(2.0 * xc.T @ yc / len(y)))
        res = lasso_cd(LassoProblem(x, y, lam_max))
        assert np.array_equal(res.beta, np.zeros(x.shape[1]))
        res2 = lasso_cd(LassoProblem(x, y, lam_max * 1.5))
        assert np.array_equal(res2.beta, np.zeros(x.shape[1]))

    def test_orthonormal_design_closed_form(self):
        # columns scaled so that x'x/n = I: each coordinate solves
        # beta_j = soft_threshold(2*x_j'y/n, lambda)/2 under the 1/n loss
        rng = np.random.default_rng(2)
        n, p = 16, 4
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        x = q[:, 1:p + 1] * np.sqrt(n)  # orthogonal to the constant? ensure centered
        x = x - x.mean(axis=0)
        g = x.T @ x / n
        x = x @ np.linalg.inv(np.linalg.cholesky(g)).T  # exact x'x/n = I
        y = rng.standard_normal(n)
        lam = 0.3
        res = lasso_cd(LassoProblem(x, y, lam))
        yc = y - y.mean()
        closed = soft_threshold(2.0 * x.T @ yc / n, lam) / 2.0
        assert np.max(np.abs(res.beta - closed)) < 1e-10

    def test_beats_grid_oracle(self):
        rng = np.random.default_rng(3)
        grid_1d = np.linspace(-2.0, 2.0, 51)
        gg = np.stack(np.meshgrid(grid_1d, grid_1d, grid_1d, indexing="ij"), -1)
        grid = gg.reshape(-1, 3)
        for _ in range(5):
            x = rng.standard_normal((6, 3))
            y = rng.standard_normal(6)
            lam = abs(rng.normal(scale=0.5)) + 0.05
            res = lasso_cd(LassoProblem(x, y, lam))
            ours = lasso_objective(x, y, res.beta, res.intercept, lam)
            # oracle: brute-force objective over the grid, intercept at the
            # analytic optimum for each candidate beta
            xm, ym = x.mean(axis=0), y.mean()
            b0 = ym - grid @ xm
            r = y[None, :] - b0[:, None] - grid @ x.T
            objs = np.mean(r**2, axis=1) + lam * np.sum(np.abs(grid), axis=1)
            assert ours <= objs.min() + 1e-6

    def test_kkt_residuals_along_generated_path(self):
        rng = np.random.default_rng(4)
        tol = 1e-7
        for _ in range(5):
            x, y = random_problem(rng, n=40, p=10)
            xc = x - x.mean(axis=0)
            yc = y - y.mean()
            n = len(y)
            lam_max = np.max(np.abs(2.0 * xc.T @ yc / n))
            lambdas = np.linspace(lam_max, 0.05 * lam_max, 20)
            betas, _, flags = lasso_path(x, y, lambdas)
            assert flags.all()
            for lam, beta in zip(lambdas, betas):
                g = 2.0 * xc.T @ (yc - xc @ beta) / n
                active = beta != 0
                if np.any(active):
                    resid = np.abs(g[active] - lam * np.sign(beta[active]))
                    assert resid.max() <= 10 * tol
                if np.any(~active):
                    assert np.all(np.abs(g[~active]) <= lam + 10 * tol)

    def test_warm_start_matches_cold_solve(self):
        rng = np.random.default_rng(5)
        x, y = random_problem(rng, n=30, p=8)
        xc = x - x.mean(axis=0)
        lam_max = np.max(np.abs(2.0 * xc.T @ (y - y.mean()) / len(y)))
        lam_hi, lam_lo = 0.5 * lam_max, 0.2 * lam_max
        cfg = SolverConfig(tol=1e-10)  # solve tight enough to compare at 1e-8
        warm = lasso_cd(LassoProblem(x, y, lam_hi), cfg).beta
        from_warm = lasso_cd(LassoProblem(x, y, lam_lo), cfg, warm=warm).beta
        cold = lasso_cd(LassoProblem(x, y, lam_lo), cfg).beta
        assert np.max(np.abs(from_warm - cold)) < 1e-8

    def test_objective_nonincreasing_per_sweep(self):
        rng = np.random.default_rng(6)
        x, y = random_problem(rng, n=25, p=12)
        cfg = SolverConfig(track_objective=True)
        res = lasso_cd(LassoProblem(x, y, 0.1), cfg)
        trace = np.asarray(res.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12)

    def test_constant_column_is_excluded(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((20, 4))
        x[:, 2] = 3.14
        y = x[:, 0] + rng.normal(scale=0.1, size=20)
        res = lasso_cd(LassoProblem(x, y, 0.05))
        assert res.beta[2] == 0.0

    def test_nonconvergence_is_flagged(self):
        rng = np.random.default_rng(8)
        x, y = random_problem(rng, n=30, p=10)
        res = lasso_cd(LassoProblem(x, y, 1e-6), SolverConfig(max_sweeps=2))
        assert not res.converged

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(max_sweeps=0)
        with pytest.raises(ValueError):
            SolverConfig(tol=0.0)
        with pytest.raises(ValueError):
            LassoProblem(np.zeros((3, 2)), np.zeros(3), -0.1)

    def test_intercept_recovers_means(self):
        rng = np.random.default_rng(9)
        x, y = random_problem(rng, n=30, p=5)
        res = lasso_cd(LassoProblem(x, y, 0.05))
        assert res.intercept == pytest.approx(y.mean() - x.mean(axis=0) @ res.beta)
