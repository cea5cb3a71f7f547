import numpy as np
import pytest

from sparda.covariates import CovariateError, adjten, adjvec
from sparda.lda import encode_labels
from sparda.tensor import vec_batch


def centered(m, codes, k):
    means = np.stack([m[codes == c].mean(axis=0) for c in range(k)])
    return m - means[codes]


class TestAdjvec:
    def test_exact_recovery_without_noise(self):
        rng = np.random.default_rng(0)
        n, p, q = 40, 6, 2
        u = rng.standard_normal((n, q))
        alpha = rng.standard_normal((p, q))
        y = np.array([1, 2] * (n // 2))
        x = u @ alpha.T  # no residual at all
        adj, xadj = adjvec(x, u, y)
        assert np.max(np.abs(adj.alpha - alpha)) < 1e-10
        assert np.max(np.abs(xadj)) < 1e-9

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(1)
        n, p, q = 50, 8, 3
        u = rng.standard_normal((n, q))
        x = rng.standard_normal((n, p)) + u @ rng.standard_normal((q, p))
        y = rng.integers(1, 4, size=n)
        adj, xadj = adjvec(x, u, y)
        codes, classes = encode_labels(y)
        k = len(classes)
        cross = centered(u, codes, k).T @ centered(xadj, codes, k)
        assert np.max(np.abs(cross)) < 1e-9

    def test_hand_two_by_two_solve(self):
        # q=2, p=1, one class: alpha = (U'U)^{-1} U'x by hand 2x2 inversion
        u = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 1.0]])
        x = np.array([[2.0], [1.0], [3.5], [-0.5]])
        y = np.ones(4, dtype=int)
        uc = u - u.mean(axis=0)
        xc = x - x.mean(axis=0)
        gram = uc.T @ uc
        det = gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[1, 0]
        inv = np.array([[gram[1, 1], -gram[0, 1]], [-gram[1, 0], gram[0, 0]]]) / det
        expected = (inv @ (uc.T @ xc)).ravel()
        adj, _ = adjvec(x, u, y)
        assert np.allclose(adj.alpha.ravel(), expected)

    def test_zero_covariate_column_raises(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((20, 3))
        u = np.zeros((20, 2))
        with pytest.raises(CovariateError):
            adjvec(x, u, np.array([1, 2] * 10))

    def test_collinear_covariates_raise(self):
        rng = np.random.default_rng(3)
        u1 = rng.standard_normal(30)
        u = np.column_stack([u1, 2 * u1])
        with pytest.raises(CovariateError):
            adjvec(rng.standard_normal((30, 4)), u, np.array([1, 2] * 15))

    def test_covariate_stats(self):
        rng = np.random.default_rng(4)
        n, q = 60, 2
        u = rng.standard_normal((n, q))
        y = np.array([1] * 30 + [2] * 30)
        u[y == 2] += [0.5, -0.2]
        x = rng.standard_normal((n, 3))
        adj, _ = adjvec(x, u, y)
        assert np.allclose(adj.phis[0], u[:30].mean(axis=0))
        codes, _ = encode_labels(y)
        uc = centered(u, codes, 2)
        psi = uc.T @ uc / (n - 2)
        assert np.allclose(adj.psi, psi)
        assert np.allclose(adj.gammas[0],
                           np.linalg.solve(psi, adj.phis[1] - adj.phis[0]))


class TestAdjten:
    def test_matches_adjvec_on_vectorized_data(self):
        rng = np.random.default_rng(5)
        n, dims, q = 30, (3, 4, 2), 2
        x = rng.standard_normal((n,) + dims)
        u = rng.standard_normal((n, q))
        y = np.array([1, 2, 3] * 10)
        adj_t, xadj_t = adjten(x, u, y)
        adj_v, xadj_v = adjvec(vec_batch(x), u, y)
        assert np.array_equal(vec_batch(xadj_t), xadj_v)
        assert np.array_equal(adj_t.alpha.reshape(-1, q, order="F"), adj_v.alpha)

    def test_recovers_block_alpha_without_noise(self):
        # alpha = 1 on a leading block of the first covariate, as in the
        # tensor simulator, recovered exactly when there is no noise
        rng = np.random.default_rng(6)
        n, dims, q = 40, (6, 6, 6), 2
        alpha = np.zeros(dims + (q,))
        alpha[:5, :5, :5, 0] = 1.0
        u = rng.standard_normal((n, q))
        y = np.array([1, 2] * (n // 2))
        mu = np.zeros(dims)
        x = np.tensordot(u, alpha, axes=(1, 3)) + mu
        adj, xadj = adjten(x, u, y)
        assert np.max(np.abs(adj.alpha - alpha)) < 1e-10
        assert np.max(np.abs(xadj)) < 1e-9

    def test_adjust_applies_to_new_data(self):
        rng = np.random.default_rng(7)
        n, dims, q = 30, (4, 3), 2
        x = rng.standard_normal((n,) + dims)
        u = rng.standard_normal((n, q))
        y = np.array([1, 2] * 15)
        adj, xadj = adjten(x, u, y)
        again = adj.adjust(x, u)
        assert np.allclose(again, xadj)

    def test_orthogonality_entrywise(self):
        rng = np.random.default_rng(8)
        n, dims, q = 36, (3, 3), 2
        x = rng.standard_normal((n,) + dims)
        u = rng.standard_normal((n, q))
        y = np.array([1, 2, 3] * 12)
        adj, xadj = adjten(x, u, y)
        codes, classes = encode_labels(y)
        k = len(classes)
        cross = np.tensordot(centered(u, codes, k),
                             centered(xadj.reshape(n, -1), codes, k), axes=(0, 0))
        assert np.max(np.abs(cross)) < 1e-9


class TestGammaReparametrization:
    def test_predictions_invariant_under_invertible_covariate_map(self):
        from sparda.binary import dsda

        rng = np.random.default_rng(9)
        n, p, q = 60, 10, 2
        u = rng.standard_normal((n, q))
        y = np.array([1] * 30 + [2] * 30)
        u[y == 2] += 0.4
        x = rng.standard_normal((n, p)) + u @ rng.standard_normal((q, p))
        x[y == 2, :3] += 1.0
        a = np.array([[2.0, 0.5], [-1.0, 1.5]])
        b = np.array([0.3, -0.7])
        u2 = u @ a.T + b
        testu = rng.standard_normal((40, q))
        testx = rng.standard_normal((40, p)) + testu @ rng.standard_normal((q, p))
        fit1 = dsda(x, y, z=u, nlambda=12)
        fit2 = dsda(x, y, z=u2, nlambda=12)
        assert np.array_equal(fit1.predict(testx, testu),
                              fit2.predict(testx, testu @ a.T + b))
