"""Semiparametric sparse discriminant analysis.

Each variable is mapped through an estimated monotone transform that makes
the within-class distributions approximately standard normal, and the
penalized least-squares path is fitted on the transformed data.  The
transform is the probit of a Winsorized empirical CDF: with class sample
size n_c, the ECDF is clamped to [1/n_c^2, 1 - 1/n_c^2] so the probit
stays finite at the tails.

Two estimators are available.  The naive one uses only the larger class:
h_j = probit(F_1j).  The pooled one also transforms through the second
class and shifts it by an estimated class-2 mean before mixing the two
with the class proportions; it is usually the more accurate choice and is
the default.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .binary import BinaryPath, dsda, dsda_lambda_max
from .lda import encode_labels
from .tuning import DEFAULT_MIN_RATIO, DEFAULT_NLAMBDA

__all__ = [
    "winsorized_ecdf",
    "MonotoneTransform",
    "fit_transform",
    "sesda",
    "SesdaFit",
    "sesda_lambda_max",
]


def winsorized_ecdf(values, x):
    """Empirical CDF of a sample, clamped away from 0 and 1.

    Evaluates the right-continuous ECDF of ``values`` at ``x`` (scalar or
    array) and clamps the result to [1/n^2, 1 - 1/n^2] for sample size n.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.searchsorted(v, np.asarray(x, dtype=float), side="right") / n
    lo = 1.0 / n**2
    return np.clip(f, lo, 1.0 - lo)


class MonotoneTransform:
    """Per-variable monotone transforms estimated from a binary sample.

    Holds, per variable, the sorted within-class samples (the ECDF knots),
    the Winsorization clamps implied by the class sizes, the mixing
    proportions and the pooled shift.  ``variant`` is "naive" or "pooled".
    Applying the transform only uses ranks, so it is invariant under
    strictly increasing per-variable rescalings of the data.
    """

    def __init__(self, knots1, knots2, pi1, pi2, mu2_pool, variant, classes):
        self.knots1 = knots1  # (n1, p) sorted per column; the larger class
        self.knots2 = knots2
        self.pi1 = float(pi1)
        self.pi2 = float(pi2)
        self.mu2_pool = mu2_pool
        self.variant = variant
        self.classes = classes

    @property
    def n1(self):
        return self.knots1.shape[0]

    @property
    def n2(self):
        return self.knots2.shape[0]

    def _probit_ecdf(self, knots, x):
        n = knots.shape[0]
        lo = 1.0 / n**2
        out = np.empty_like(x)
        for j in range(x.shape[1]):
            f = np.searchsorted(knots[:, j], x[:, j], side="right") / n
            out[:, j] = np.clip(f, lo, 1.0 - lo)
        return ndtri(out)

    def transform(self, x):
        """Apply the fitted transforms column by column."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None]
        h1 = self._probit_ecdf(self.knots1, x)
        if self.variant == "naive":
            out = h1
        else:
            h2 = self._probit_ecdf(self.knots2, x) + self.mu2_pool
            out = self.pi1 * h1 + self.pi2 * h2
        return out[0] if single else out


def fit_transform(x, y, variant="pooled"):
    """Estimate the monotone transforms from a binary training sample.

    The class with more observations plays the reference role (its
    transformed mean is pinned near zero); if the second class is larger
    the roles are swapped internally, which does not affect labeling.
    """
    if variant not in ("naive", "pooled"):
        raise ValueError("variant must be 'naive' or 'pooled'")
    x = np.asarray(x, dtype=float)
    codes, classes = encode_labels(y)
    if len(classes) != 2:
        raise ValueError("transform estimation needs exactly 2 classes")
    counts = np.bincount(codes, minlength=2)
    if np.any(counts < 2):
        raise ValueError("each class needs at least 2 observations")
    big, small = (0, 1) if counts[0] >= counts[1] else (1, 0)
    x1 = x[codes == big]
    x2 = x[codes == small]
    n = counts.sum()
    pi1, pi2 = counts[big] / n, counts[small] / n
    knots1 = np.sort(x1, axis=0)
    knots2 = np.sort(x2, axis=0)

    mu2_pool = np.zeros(x.shape[1])
    if variant == "pooled":
        n1, n2 = x1.shape[0], x2.shape[0]
        lo1, lo2 = 1.0 / n1**2, 1.0 / n2**2
        # class-2 points through the class-1 ECDF, and vice versa
        mu_a = np.zeros(x.shape[1])
        mu_b = np.zeros(x.shape[1])
        for j in range(x.shape[1]):
            f12 = np.searchsorted(knots1[:, j], x2[:, j], side="right") / n1
            mu_a[j] = np.mean(ndtri(np.clip(f12, lo1, 1.0 - lo1)))
            f21 = np.searchsorted(knots2[:, j], x1[:, j], side="right") / n2
            mu_b[j] = -np.mean(ndtri(np.clip(f21, lo2, 1.0 - lo2)))
        mu2_pool = pi1 * mu_a + pi2 * mu_b
    return MonotoneTransform(knots1, knots2, pi1, pi2, mu2_pool, variant,
                             (classes[big], classes[small]))


def sesda_lambda_max(x, y, variant="pooled"):
    """Zero-path bound of the least-squares step on transformed data."""
    tf = fit_transform(x, y, variant)
    return dsda_lambda_max(tf.transform(x), y)


class SesdaFit:
    """A fitted transform plus the discriminant path on transformed data."""

    method = "sesda"

    def __init__(self, transform, path):
        self.transform = transform
        self.path = path
        self.pred = None

    @property
    def lambdas(self):
        return self.path.lambdas

    @property
    def df(self):
        return self.path.df

    def predict(self, x, u=None):
        return self.path.predict(self.transform.transform(x))

    def to_dict(self):
        t = self.transform
        return {
            "method": "sesda",
            "transform": {
                "knots1": t.knots1.tolist(),
                "knots2": t.knots2.tolist(),
                "pi1": t.pi1,
                "pi2": t.pi2,
                "mu2_pool": t.mu2_pool.tolist(),
                "variant": t.variant,
                "classes": np.asarray(t.classes).tolist(),
            },
            "path": self.path.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        t = d["transform"]
        transform = MonotoneTransform(
            np.asarray(t["knots1"], dtype=float),
            np.asarray(t["knots2"], dtype=float),
            t["pi1"],
            t["pi2"],
            np.asarray(t["mu2_pool"], dtype=float),
            t["variant"],
            tuple(t["classes"]),
        )
        return cls(transform, BinaryPath.from_dict(d["path"]))


def sesda(x, y, lambdas=None, variant="pooled", testx=None,
          nlambda=DEFAULT_NLAMBDA, lambda_min_ratio=DEFAULT_MIN_RATIO,
          config=None):
    """Fit the semiparametric discriminant path.

    The transform is estimated on the training data and frozen; the
    least-squares path runs on the transformed predictors, and prediction
    pushes new data through the same transform.
    """
    tf = fit_transform(x, y, variant)
    hx = tf.transform(x)
    path = dsda(hx, y, lambdas=lambdas, nlambda=nlambda,
                lambda_min_ratio=lambda_min_ratio, config=config)
    fit = SesdaFit(tf, path)
    if testx is not None:
        fit.pred = fit.predict(testx)
    return fit
