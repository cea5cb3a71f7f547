"""Class statistics and the linear Bayes-rule classifier.

Every fitting routine in the package reduces prediction to the same shape:
per-class scores ``a_k + gamma_k'u + <beta_k, x_adj>`` with the class-1
score normalized to zero, argmax over k, ties going to the lowest class
index.  Class labels are remapped internally to 0..K-1 by first appearance
in the training data; the mapping is stored and inverted at prediction.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "EstimationError",
    "ClassStats",
    "estimate_stats",
    "DiscriminantRule",
    "classify",
    "postfit_univariate",
    "UnivariateRule",
]


class EstimationError(ValueError):
    """Raised when class statistics cannot be estimated from the data."""


def encode_labels(y):
    """Map labels to 0..K-1 by first appearance; returns (codes, classes)."""
    y = np.asarray(y)
    classes, idx = np.unique(y, return_index=True)
    classes = y[np.sort(idx)]
    lookup = {c: k for k, c in enumerate(classes)}
    codes = np.array([lookup[v] for v in y], dtype=int)
    return codes, classes


class ClassStats:
    """Priors, per-class means and (optionally) the pooled covariance.

    ``means`` has one row (or one tensor slice) per class in internal
    order; ``pooled_cov`` uses the unbiased within-group denominator n-K
    and is only available for vector predictors.
    """

    def __init__(self, classes, counts, means, pooled_cov=None):
        self.classes = np.asarray(classes)
        self.counts = np.asarray(counts, dtype=int)
        self.n = int(self.counts.sum())
        self.priors = self.counts / self.n
        self.means = means
        self.pooled_cov = pooled_cov

    @property
    def n_classes(self):
        return len(self.classes)


def estimate_stats(x, y, pooled_cov=False):
    """Within-class means, priors and optional pooled covariance.

    ``x`` is (n, p) for vectors or (n, p_1, ..., p_M) for tensors; ``y``
    holds arbitrary labels, every class nonempty.
    """
    x = np.asarray(x, dtype=float)
    codes, classes = encode_labels(y)
    k = len(classes)
    counts = np.bincount(codes, minlength=k)
    if np.any(counts == 0):
        raise EstimationError("every class needs at least one observation")
    means = np.stack([x[codes == c].mean(axis=0) for c in range(k)])
    cov = None
    if pooled_cov:
        if x.ndim != 2:
            raise EstimationError("pooled covariance requires vector predictors")
        n = x.shape[0]
        if n <= k:
            raise EstimationError("pooled covariance requires n > K")
        xc = x - means[codes]
        cov = xc.T @ xc / (n - k)
    return ClassStats(classes, counts, means, cov)


def center_within_class(x, codes, k):
    """Subtract the within-class mean from every observation."""
    x = np.asarray(x, dtype=float)
    means = np.stack([x[codes == c].mean(axis=0) for c in range(k)])
    return x - means[codes], means


class DiscriminantRule:
    """Linear discriminant rule with optional covariate block.

    ``coefs`` stacks beta_k for k = 2..K (class 1 is the zero baseline),
    one row per class, matching the predictor's shape.  When the rule was
    fitted with covariates it also carries ``gammas`` (K-1, q), ``alpha``
    (predictor dims + (q,)) used to adjust x, and the covariate intercept
    already folded into ``intercepts``.
    """

    def __init__(self, classes, priors, coefs, intercepts, gammas=None, alpha=None):
        self.classes = np.asarray(classes)
        self.priors = np.asarray(priors, dtype=float)
        self.coefs = np.asarray(coefs, dtype=float)
        self.intercepts = np.asarray(intercepts, dtype=float)
        self.gammas = None if gammas is None else np.asarray(gammas, dtype=float)
        self.alpha = None if alpha is None else np.asarray(alpha, dtype=float)


def classify(rule, x, u=None, return_scores=False):
    """Apply a discriminant rule to one or more observations.

    Scores per class k >= 2 are ``a_k + gamma_k'u + <beta_k, x - alpha xbar u>``
    with the class-1 score fixed at 0; the argmax wins and exact ties go to
    the lowest class index.
    """
    x = np.asarray(x, dtype=float)
    coef_ndim = rule.coefs.ndim - 1
    single = x.ndim == coef_ndim
    if single:
        x = x[None]
    if x.shape[1:] != rule.coefs.shape[1:]:
        raise ValueError(
            f"predictor dims {x.shape[1:]} do not match rule dims {rule.coefs.shape[1:]}"
        )
    n = x.shape[0]
    if rule.gammas is not None:
        if u is None:
            raise ValueError("rule was fitted with covariates; u is required")
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if rule.alpha is not None:
            x = x - np.tensordot(u, rule.alpha, axes=(1, rule.alpha.ndim - 1))
    scores = np.zeros((n, len(rule.classes)))
    flat_x = x.reshape(n, -1)
    flat_b = rule.coefs.reshape(rule.coefs.shape[0], -1)
    scores[:, 1:] = rule.intercepts + flat_x @ flat_b.T
    if rule.gammas is not None:
        scores[:, 1:] += u @ rule.gammas.T
    labels = rule.classes[np.argmax(scores, axis=1)]
    if single:
        labels = labels[0]
        scores = scores[0]
    return (labels, scores) if return_scores else labels


class UnivariateRule:
    """1-D LDA threshold rule fitted on projected data.

    Scores are ``slope * z + intercept`` for the second class against 0
    for the first; ``slope == 0`` encodes the prior-majority rule.
    """

    def __init__(self, slope, intercept, classes, priors, means=None, var=None):
        self.slope = float(slope)
        self.intercept = float(intercept)
        self.classes = np.asarray(classes)
        self.priors = np.asarray(priors, dtype=float)
        self.means = means
        self.var = var

    def score(self, z):
        return self.slope * np.asarray(z, dtype=float) + self.intercept

    def predict(self, z):
        return np.where(self.score(z) > 0, self.classes[1], self.classes[0])


def postfit_univariate(projections, y):
    """Fit the 1-D LDA model on projected data and return its linear rule.

    Mirrors refitting a two-class LDA on ``{y_i, x_i' beta}``: class means
    m_1, m_2, pooled variance s^2 (denominator n-2) and empirical priors.
    A degenerate projection vector (all equal, e.g. beta == 0) falls back
    to the prior-majority rule, ties preferring the first class.
    """
    z = np.asarray(projections, dtype=float)
    codes, classes = encode_labels(y)
    if len(classes) != 2:
        raise EstimationError("postfit expects exactly two classes")
    n = len(z)
    counts = np.bincount(codes, minlength=2)
    priors = counts / n
    m = np.array([z[codes == 0].mean(), z[codes == 1].mean()])
    ss = np.sum((z - m[codes]) ** 2)
    var = ss / (n - 2)
    if var <= 0 or not np.isfinite(var):
        if m[1] != m[0]:
            # zero within-class spread but separated means: midpoint cut
            slope = float(np.sign(m[1] - m[0]))
            return UnivariateRule(
                slope, -slope * (m[0] + m[1]) / 2.0, classes, priors, m, var
            )
        # constant projections (e.g. beta == 0): majority class rule
        inter = 1.0 if priors[1] > priors[0] else -1.0
        return UnivariateRule(0.0, inter, classes, priors, m, var)
    slope = (m[1] - m[0]) / var
    intercept = float(np.log(priors[1] / priors[0]) - slope * (m[0] + m[1]) / 2.0)
    return UnivariateRule(slope, intercept, classes, priors, m, var)
