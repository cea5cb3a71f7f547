"""Dataset simulators and the F-statistic variable screen.

Both simulators draw from the generative models used throughout the
package's examples: a binary vector problem with compound-symmetry
covariance and a sparse discriminant direction, and a binary tensor
problem with identity mode covariances, a covariate-shifted mean and a
low-dimensional covariate effect on the tensor.  All draws come from a
single seeded generator, so a fixed seed reproduces the datasets exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .lda import encode_labels
from .tensor import vec_batch

__all__ = [
    "VectorSimSpec",
    "TensorSimSpec",
    "VectorData",
    "TensorData",
    "sim_binary_vector",
    "sim_tensor_cov",
    "f_screen",
]


@dataclass
class VectorSimSpec:
    p: int = 500
    n_per_class: int = 75
    n_test: int = 1000
    rho: float = 0.3
    beta_value: float = 0.5
    n_signal: int = 10
    seed: int = 0

    def covariance(self):
        sigma = np.full((self.p, self.p), self.rho)
        np.fill_diagonal(sigma, 1.0)
        return sigma

    def direction(self):
        beta = np.zeros(self.p)
        beta[: self.n_signal] = self.beta_value
        return beta


@dataclass
class VectorData:
    x: np.ndarray
    y: np.ndarray
    testx: np.ndarray
    testy: np.ndarray

    @property
    def train(self):
        return LabeledDataset(self.x, self.y)

    @property
    def test(self):
        return LabeledDataset(self.testx, self.testy)


def _test_labels(rng, n):
    # ceiling of uniform*2: labels 1/2 with random near-half priors
    return np.maximum(np.ceil(rng.uniform(size=n) * 2).astype(int), 1)


def sim_binary_vector(spec=None):
    """Simulate the binary vector problem (train and test).

    Class 1 is centered at zero; class 2 is shifted by Sigma @ beta so the
    population discriminant direction is exactly the sparse beta.  Both
    classes share the compound-symmetry covariance, applied through its
    lower Cholesky factor.
    """
    spec = spec or VectorSimSpec()
    rng = np.random.default_rng(spec.seed)
    sigma = spec.covariance()
    chol = np.linalg.cholesky(sigma)
    mu2 = sigma @ spec.direction()
    n1 = spec.n_per_class
    y = np.concatenate([np.ones(n1, dtype=int), np.full(n1, 2, dtype=int)])
    testy = _test_labels(rng, spec.n_test)
    x = rng.standard_normal((2 * n1, spec.p)) @ chol.T
    x[y == 2] += mu2
    testx = rng.standard_normal((spec.n_test, spec.p)) @ chol.T
    testx[testy == 2] += mu2
    return VectorData(x, y, testx, testy)


@dataclass
class TensorSimSpec:
    dims: tuple = (10, 10, 10)
    q: int = 2
    n_per_class: int = 75
    n_test: int = 1000
    b_value: float = 0.8
    b_block: int = 2
    alpha_value: float = 1.0
    alpha_block: int = 5
    phi_shift: float = 0.3
    seed: int = 0
    mode_covs: list = field(default=None)

    def covariances(self):
        if self.mode_covs is not None:
            return [np.asarray(s, dtype=float) for s in self.mode_covs]
        return [np.eye(d) for d in self.dims]

    def coef_tensor(self):
        b = np.zeros(self.dims)
        b[(slice(0, self.b_block),) * len(self.dims)] = self.b_value
        return b

    def alpha_tensor(self):
        a = np.zeros(self.dims + (self.q,))
        block = (slice(0, self.alpha_block),) * len(self.dims) + (0,)
        a[block] = self.alpha_value
        return a


@dataclass
class TensorData:
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    testx: np.ndarray
    testz: np.ndarray
    testy: np.ndarray
    vec_x: np.ndarray
    vec_testx: np.ndarray

    @property
    def train(self):
        return LabeledDataset(self.x, self.y, self.z)

    @property
    def test(self):
        return LabeledDataset(self.testx, self.testy, self.testz)


def sim_tensor_cov(spec=None):
    """Simulate the binary tensor problem with covariates.

    The covariates get a class-2 mean shift; the tensors are noise plus
    the covariate effect (alpha contracted against u), pushed through the
    per-mode Cholesky factors and shifted by the class mean [[B; S_1..S_M]]
    for class 2.  ``vec_x``/``vec_testx`` carry the vectorized tensors,
    one row per observation in column-major entry order.
    """
    spec = spec or TensorSimSpec()
    rng = np.random.default_rng(spec.seed)
    sigmas = spec.covariances()
    chols = [np.linalg.cholesky(s) for s in sigmas]
    m = len(spec.dims)
    b2 = spec.coef_tensor()
    mu2 = b2
    for j, s in enumerate(sigmas):
        mu2 = np.moveaxis(np.tensordot(s, mu2, axes=(1, j)), 0, j)
    alpha = spec.alpha_tensor()
    n1 = spec.n_per_class
    n = 2 * n1
    y = np.concatenate([np.ones(n1, dtype=int), np.full(n1, 2, dtype=int)])
    testy = _test_labels(rng, spec.n_test)

    z = rng.standard_normal((n, spec.q))
    z[y == 2] += spec.phi_shift
    testz = rng.standard_normal((spec.n_test, spec.q))
    testz[testy == 2] += spec.phi_shift

    def build(labels, covs, count):
        noise = rng.standard_normal((count,) + spec.dims)
        t = noise + np.tensordot(covs, alpha, axes=(1, m))
        for j, l in enumerate(chols):
            t = np.moveaxis(np.tensordot(l, t, axes=(1, j + 1)), 0, j + 1)
        t[labels == 2] += mu2
        return t

    x = build(y, z, n)
    testx = build(testy, testz, spec.n_test)
    return TensorData(x, z, y, testx, testz, testy, vec_batch(x), vec_batch(testx))


@dataclass
class FScreenResult:
    f: np.ndarray
    ranking: np.ndarray

    def top(self, m):
        return self.ranking[:m]


def f_screen(x, y):
    """Per-variable one-way ANOVA F statistics for class separation.

    Variables with zero within-class variance get +inf and rank first.
    Returns the statistics and the indices sorted by decreasing F.
    """
    x = np.asarray(x, dtype=float)
    codes, classes = encode_labels(y)
    k = len(classes)
    n = x.shape[0]
    if k < 2:
        raise ValueError("need at least 2 classes")
    if n <= k:
        raise ValueError("need n > K observations")
    counts = np.bincount(codes, minlength=k)
    means = np.stack([x[codes == c].mean(axis=0) for c in range(k)])
    grand = x.mean(axis=0)
    between = (counts[:, None] * (means - grand) ** 2).sum(axis=0) / (k - 1)
    within = ((x - means[codes]) ** 2).sum(axis=0) / (n - k)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(within > 0, between / within, np.inf)
    ranking = np.argsort(-f, kind="stable")
    return FScreenResult(f, ranking)
