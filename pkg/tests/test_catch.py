import numpy as np
import pytest

from sparda.catch import (catch, catch_lambda_max, catch_matrix,
                          estimate_kron_cov)
from sparda.lda import encode_labels, estimate_stats
from sparda.msda import cd_original
from sparda.simulate import TensorSimSpec, sim_tensor_cov
from sparda.solvers import group_soft_threshold
from sparda.tensor import sample_tensor_normal, TensorNormalParams


def ar_matrix(p, rho):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def labeled_tensor_normal(rng, n, dims, covs, shift):
    params0 = TensorNormalParams(np.zeros(dims), covs)
    mu2 = np.zeros(dims)
    mu2[(0,) * len(dims)] = shift
    params1 = TensorNormalParams(mu2, covs)
    half = n // 2
    x = np.concatenate([
        sample_tensor_normal(params0, rng, size=half),
        sample_tensor_normal(params1, rng, size=n - half),
    ])
    y = np.array([1] * half + [2] * (n - half))
    return x, y


class TestEstimateKronCov:
    def test_identity_recovery(self):
        rng = np.random.default_rng(0)
        covs = [np.eye(4)] * 3
        x, y = labeled_tensor_normal(rng, 200, (4, 4, 4), covs, 0.5)
        kron = estimate_kron_cov(x, y)
        for s in kron.sigmas:
            assert np.max(np.abs(s - np.eye(4))) < 0.15

    def test_leading_modes_normalized_exactly(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((30, 3, 4, 2))
        y = np.array([1, 2, 3] * 10)
        kron = estimate_kron_cov(x, y)
        assert kron.sigmas[0][0, 0] == 1.0
        assert kron.sigmas[1][0, 0] == 1.0

    def test_ar_structure_recovered_up_to_normalization(self):
        rng = np.random.default_rng(2)
        covs = [ar_matrix(4, 0.5), np.eye(3), np.eye(3)]
        x, y = labeled_tensor_normal(rng, 500, (4, 3, 3), covs, 0.4)
        kron = estimate_kron_cov(x, y)
        truth = covs[0] / covs[0][0, 0]
        assert np.max(np.abs(kron.sigmas[0] - truth)) < 0.1

    def test_replication_average_close_to_identity(self):
        rng = np.random.default_rng(3)
        dims = (3, 3, 3)
        covs = [np.eye(3)] * 3
        acc = [np.zeros((3, 3)) for _ in range(3)]
        reps = 200
        for _ in range(reps):
            x, y = labeled_tensor_normal(rng, 500, dims, covs, 0.3)
            kron = estimate_kron_cov(x, y)
            for j in range(3):
                acc[j] += kron.sigmas[j] / reps
        for j in range(3):
            assert np.max(np.abs(acc[j] - np.eye(3))) < 0.02

    def test_scale_behavior_under_predictor_rescaling(self):
        # scaling the data by c leaves the normalized modes untouched and,
        # with this normalization, multiplies the last mode by c^(4-2M)
        rng = np.random.default_rng(4)
        x = rng.standard_normal((40, 3, 3, 3))
        y = np.array([1, 2] * 20)
        c = 1.7
        a = estimate_kron_cov(x, y)
        b = estimate_kron_cov(c * x, y)
        m = 3
        for j in range(m - 1):
            assert np.allclose(a.sigmas[j], b.sigmas[j])
        assert np.allclose(b.sigmas[m - 1], c ** (4 - 2 * m) * a.sigmas[m - 1])

    def test_needs_enough_observations(self):
        with pytest.raises(ValueError):
            estimate_kron_cov(np.zeros((2, 2, 2)), np.array([1, 2]))


@pytest.fixture(scope="module")
def ten_sim():
    return sim_tensor_cov(TensorSimSpec(seed=123456))


class TestCatchFit:
    def test_zero_solution_at_lambda_max(self):
        rng = np.random.default_rng(5)
        x, y = labeled_tensor_normal(rng, 40, (3, 3), [np.eye(3)] * 2, 1.0)
        lam = catch_lambda_max(x, y)
        fit = catch(x, y, lambdas=[lam * 1.0001])
        assert fit.df[0] == 0

    def test_identity_covariance_closed_form(self):
        # forced identity mode covariances decouple the positions: the
        # minimizer applies the group threshold to each mean-difference
        # entry directly
        rng = np.random.default_rng(6)
        x, y = labeled_tensor_normal(rng, 60, (3, 4), [np.eye(3), np.eye(4)], 1.2)
        stats = estimate_stats(x, y)
        delta = stats.means[1:] - stats.means[0]
        from sparda.catch import _catch_cd

        lam = 0.4 * float(np.max(np.abs(delta)))
        eye = [np.eye(3), np.eye(4)]
        quad = np.ones((3, 4))
        b, _, ok, _ = _catch_cd(eye, delta, lam, None, 1e-10, 10_000, quad)
        assert ok
        expected = np.zeros_like(delta)
        for i in range(3):
            for j in range(4):
                expected[:, i, j] = group_soft_threshold(delta[:, i, j], lam)
        assert np.max(np.abs(b - expected)) < 1e-10

    def test_one_mode_reduction_matches_group_cd(self):
        # M=1 tensors are plain vectors; the Kronecker estimator then
        # reduces to the pooled covariance, so the fits must agree
        rng = np.random.default_rng(7)
        n, p = 60, 12
        x = rng.standard_normal((n, p))
        y = np.array([1, 2, 3] * 20)
        x[y == 2, :3] += 1.0
        x[y == 3, 3:6] += 1.0
        stats = estimate_stats(x, y, pooled_cov=True)
        delta = (stats.means[1:] - stats.means[0]).T
        lam = 0.3 * float(np.max(np.linalg.norm(delta, axis=1)))
        fit = catch(x.reshape(n, p), y, lambdas=[lam], tol=1e-10)
        b_msda, _, _ = cd_original(stats.pooled_cov, delta, lam, tol=1e-10)
        b_catch = fit.betas[0].reshape(2, p).T
        assert np.max(np.abs(b_catch - b_msda)) < 1e-6

    def test_group_kkt_at_convergence(self):
        rng = np.random.default_rng(8)
        tol = 1e-8
        x, y = labeled_tensor_normal(rng, 50, (3, 3, 2), [np.eye(3), np.eye(3), np.eye(2)], 1.0)
        stats = estimate_stats(x, y)
        kron = estimate_kron_cov(x, y)
        delta = stats.means[1:] - stats.means[0]
        lam_max = catch_lambda_max(x, y)
        from sparda.catch import _catch_cd
        from sparda.tensor import tucker_transform

        quad = kron.diag_tensor()
        for lam in np.linspace(lam_max, 0.1 * lam_max, 5):
            b, _, ok, _ = _catch_cd(kron.sigmas, delta, lam, None, tol, 100_000, quad)
            assert ok
            grad = np.stack([tucker_transform(bk, kron.sigmas) for bk in b]) - delta
            norms = np.sqrt(np.sum(grad**2, axis=0))
            act = np.any(b != 0, axis=0)
            assert np.all(norms[~act] <= lam + 10 * tol)
            for pos in np.argwhere(act):
                sel = (slice(None),) + tuple(pos)
                u = b[sel] / np.linalg.norm(b[sel])
                assert np.linalg.norm(grad[sel] + lam * u) <= 10 * tol

    def test_objective_nonincreasing(self):
        rng = np.random.default_rng(9)
        x, y = labeled_tensor_normal(rng, 40, (3, 3), [np.eye(3)] * 2, 1.0)
        stats = estimate_stats(x, y)
        kron = estimate_kron_cov(x, y)
        delta = stats.means[1:] - stats.means[0]
        from sparda.catch import _catch_cd

        lam = 0.3 * catch_lambda_max(x, y)
        *_, trace = _catch_cd(kron.sigmas, delta, lam, None, 1e-8, 10_000,
                              kron.diag_tensor(), track_objective=True)
        assert np.all(np.diff(np.asarray(trace)) <= 1e-12)

    def test_dfmax_truncates(self):
        rng = np.random.default_rng(10)
        x, y = labeled_tensor_normal(rng, 50, (4, 4), [np.eye(4)] * 2, 1.0)
        fit = catch(x, y, nlambda=30, dfmax=4)
        assert np.all(fit.df <= 4)
        assert len(fit.lambdas) < 30

    def test_simulated_tensor_error_band(self, ten_sim):
        fit = catch(ten_sim.x, ten_sim.y, z=ten_sim.z,
                    testx=ten_sim.testx, testz=ten_sim.testz)
        errs = np.mean(fit.pred != ten_sim.testy[:, None], axis=0)
        assert 0.10 <= errs.min() <= 0.24

    def test_path_index_predictions_invariant_under_rescaling(self, ten_sim):
        # balanced classes: scaling all tensors by c > 0 rescales the auto
        # grid by c and maps solutions one-to-one, so the labels at each
        # path index agree
        keep = np.r_[0:30, 75:105]  # balanced slice of both classes
        x = ten_sim.x[keep]
        y = ten_sim.y[keep]
        testx = ten_sim.testx[:100]
        c = 2.5
        f1 = catch(x, y, nlambda=15)
        f2 = catch(c * x, y, nlambda=15)
        assert np.allclose(f2.lambdas, c * f1.lambdas)
        assert np.array_equal(f1.predict(testx), f2.predict(c * testx))

    def test_missing_covariates_at_predict_raises(self, ten_sim):
        keep = np.r_[0:30, 75:105]
        fit = catch(ten_sim.x[keep], ten_sim.y[keep], z=ten_sim.z[keep], nlambda=5)
        with pytest.raises(ValueError):
            fit.predict(ten_sim.testx[:5])

    def test_zero_fit_predicts_majority(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((30, 3, 3))
        y = np.array([1] * 10 + [2] * 20)
        lam = catch_lambda_max(x, y)
        fit = catch(x, y, lambdas=[lam * 1.001])
        pred = fit.predict(rng.standard_normal((15, 3, 3)))
        assert np.all(pred == 2)


class TestCatchMatrix:
    def test_accepts_csa_shaped_matrices(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((42, 36, 3))
        y = np.array([1, 2, 3] * 14)
        x[y == 2, :4, 0] += 1.0
        fit = catch_matrix(x, y, nlambda=6)
        assert fit.betas[0].shape == (2, 36, 3)

    def test_identical_to_catch_on_same_data(self):
        rng = np.random.default_rng(13)
        x = rng.standard_normal((30, 5, 4))
        y = np.array([1, 2] * 15)
        x[y == 2, :2, :2] += 1.0
        a = catch_matrix(x, y, nlambda=8)
        b = catch(x, y, nlambda=8)
        assert np.array_equal(np.asarray(a.betas), np.asarray(b.betas))

    def test_rejects_higher_order_input(self):
        with pytest.raises(ValueError):
            catch_matrix(np.zeros((10, 2, 2, 2)), np.array([1, 2] * 5))

    def test_row_matrices_match_vector_directions(self):
        # 1 x p matrices: the group objective only differs from the
        # vector one by a positive covariance rescaling, so directions
        # (and supports) coincide
        rng = np.random.default_rng(14)
        n, p = 60, 8
        x = rng.standard_normal((n, p))
        y = np.array([1, 2, 3] * 20)
        x[y == 2, :2] += 1.0
        x[y == 3, 2:4] += 1.0
        stats = estimate_stats(x, y, pooled_cov=True)
        delta = (stats.means[1:] - stats.means[0]).T
        # equalize the penalty scale: the matrix fit sees covariance
        # c*Sigma, whose solution at lam equals the vector solution at
        # the same lam scaled by 1/c
        xm = x.reshape(n, 1, p)
        kron = estimate_kron_cov(xm, y)
        cscale = kron.sigmas[1][0, 0] / stats.pooled_cov[0, 0]
        lam = 0.25 * float(np.max(np.linalg.norm(delta, axis=1)))
        fit = catch_matrix(xm, y, lambdas=[lam], tol=1e-10)
        b_vec, _, _ = cd_original(stats.pooled_cov, delta, lam, tol=1e-10)
        b_mat = fit.betas[0].reshape(2, p).T
        assert np.array_equal(b_mat != 0, b_vec != 0)
        assert np.max(np.abs(b_mat * cscale - b_vec)) < 1e-6
