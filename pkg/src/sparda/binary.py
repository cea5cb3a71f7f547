"""Binary sparse discriminant fits: the penalized least-squares path, plus
the affine-constrained and optimal-scoring solution paths recovered from it.

The least-squares route encodes a binary response as y_i = -n/n_1 for the
first class and +n/n_2 for the second (zero-mean coding), solves the lasso
at each lambda with warm starts, then refits a one-dimensional LDA on the
projected training data to turn each coefficient vector into a classifier.
The affine-constrained variant (``road``) rescales every path point to
satisfy beta'(mu_2 - mu_1)/2 = 1; the optimal-scoring variant (``sos``)
is an exact rescaling identity:

    beta_sos(lambda) = s * beta_dsda(lambda / s),   s = sqrt(pi_1 pi_2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariates import adjvec
from .lda import encode_labels, postfit_univariate
from .solvers import SolverConfig, lasso_path
from .tuning import DEFAULT_MIN_RATIO, DEFAULT_NFOLDS, DEFAULT_NLAMBDA, uniform_grid

__all__ = ["BinaryPath", "dsda", "road", "sos", "dsda_all", "dsda_lambda_max"]


def _binary_setup(x, y):
    x = np.asarray(x, dtype=float)
    codes, classes = encode_labels(y)
    if len(classes) != 2:
        raise ValueError(f"binary method needs exactly 2 classes, got {len(classes)}")
    counts = np.bincount(codes, minlength=2)
    if np.any(counts == 0):
        raise ValueError("both classes must be nonempty")
    return x, codes, classes, counts


def _response(codes, counts):
    n = counts.sum()
    resp = np.where(codes == 0, -n / counts[0], n / counts[1])
    return resp.astype(float)


def dsda_lambda_max(x, y, u=None):
    """Smallest lambda at which the lasso path is identically zero."""
    x, codes, classes, counts = _binary_setup(x, y)
    if u is not None:
        _, x = adjvec(x, u, y)
    resp = _response(codes, counts)
    xc = x - x.mean(axis=0)
    yc = resp - resp.mean()
    n = len(resp)
    return float(np.max(np.abs(2.0 * (xc.T @ yc) / n)))


class BinaryPath:
    """Solution path of a binary fit: one coefficient vector per lambda.

    ``lambdas`` is decreasing (on the method's own scale); ``betas`` is
    (L, p); ``rules`` holds the per-lambda univariate post-fit rules.  For
    the affine-constrained method, ``input_lambdas``/``degenerate`` record
    the least-squares lambdas that were mapped and which of them produced
    an all-zero (skipped) coefficient.
    """

    method = "dsda"

    def __init__(self, method, lambdas, betas, rules, classes, priors,
                 adjustment=None, input_lambdas=None, degenerate=None,
                 converged=None):
        self.method = method
        self.lambdas = np.asarray(lambdas, dtype=float)
        self.betas = np.asarray(betas, dtype=float)
        self.rules = rules
        self.classes = np.asarray(classes)
        self.priors = np.asarray(priors, dtype=float)
        self.adjustment = adjustment
        self.input_lambdas = input_lambdas
        self.degenerate = degenerate
        self.converged = converged
        self.pred = None

    @property
    def df(self):
        """Number of nonzero coefficients per path point."""
        return np.count_nonzero(self.betas, axis=1)

    def _covariate_offset(self, u):
        adj = self.adjustment
        u = np.atleast_2d(np.asarray(u, dtype=float))
        center = (adj.phis[0] + adj.phis[1]) / 2.0
        return (u - center) @ adj.gammas[0]

    def predict(self, x, u=None):
        """Labels per lambda, shape (n, L)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None]
        if self.adjustment is not None:
            if u is None:
                raise ValueError("fit used covariates; u is required for prediction")
            x = self.adjustment.adjust(x, u)
            offset = self._covariate_offset(u)
        else:
            offset = 0.0
        proj = x @ self.betas.T  # (n, L)
        labels = np.empty(proj.shape, dtype=self.classes.dtype)
        for i, rule in enumerate(self.rules):
            score = rule.score(proj[:, i])
            if self.adjustment is not None:
                score = score + offset
            labels[:, i] = np.where(score > 0, rule.classes[1], rule.classes[0])
        return labels

    def to_dict(self):
        out = {
            "method": self.method,
            "lambdas": self.lambdas.tolist(),
            "betas": self.betas.tolist(),
            "rules": [
                {"slope": r.slope, "intercept": r.intercept} for r in self.rules
            ],
            "classes": self.classes.tolist(),
            "priors": self.priors.tolist(),
        }
        if self.input_lambdas is not None:
            out["input_lambdas"] = np.asarray(self.input_lambdas).tolist()
        if self.degenerate is not None:
            out["degenerate"] = np.asarray(self.degenerate).tolist()
        if self.adjustment is not None:
            a = self.adjustment
            out["covariate"] = {
                "alpha": a.alpha.tolist(),
                "phis": np.asarray(a.phis).tolist(),
                "psi": a.psi.tolist(),
                "gammas": np.asarray(a.gammas).tolist(),
                "classes": np.asarray(a.classes).tolist(),
            }
        return out

    @classmethod
    def from_dict(cls, d):
        from .covariates import Adjustment
        from .lda import UnivariateRule

        classes = np.asarray(d["classes"])
        priors = np.asarray(d["priors"], dtype=float)
        rules = [
            UnivariateRule(r["slope"], r["intercept"], classes, priors)
            for r in d["rules"]
        ]
        adjustment = None
        if "covariate" in d:
            c = d["covariate"]
            adjustment = Adjustment(
                np.asarray(c["alpha"], dtype=float),
                np.asarray(c["phis"], dtype=float),
                np.asarray(c["psi"], dtype=float),
                np.asarray(c["gammas"], dtype=float),
                np.asarray(c["classes"]),
            )
        return cls(
            d["method"],
            np.asarray(d["lambdas"], dtype=float),
            np.asarray(d["betas"], dtype=float),
            rules,
            classes,
            priors,
            adjustment=adjustment,
            input_lambdas=(
                np.asarray(d["input_lambdas"], dtype=float)
                if "input_lambdas" in d
                else None
            ),
            degenerate=(
                np.asarray(d["degenerate"], dtype=bool) if "degenerate" in d else None
            ),
        )


def dsda(x, y, lambdas=None, z=None, testx=None, testz=None,
         nlambda=DEFAULT_NLAMBDA, lambda_min_ratio=DEFAULT_MIN_RATIO,
         config=None):
    """Fit the penalized least-squares discriminant path.

    With covariates ``z`` the predictors are adjusted first and the rule
    gains the covariate block of the adjusted Bayes rule.  Supplying
    ``testx`` attaches per-lambda test predictions as ``fit.pred``.
    """
    x, codes, classes, counts = _binary_setup(x, y)
    adjustment = None
    if z is not None:
        adjustment, x = adjvec(x, z, y)
    resp = _response(codes, counts)
    if lambdas is None:
        xc = x - x.mean(axis=0)
        lam_max = float(np.max(np.abs(2.0 * (xc.T @ (resp - resp.mean())) / len(resp))))
        lambdas = uniform_grid(lam_max, nlambda, lambda_min_ratio).values
    else:
        lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1].copy()
    betas, _, converged = lasso_path(x, resp, lambdas, config or SolverConfig())
    rules = [postfit_univariate(x @ b, y) for b in betas]
    fit = BinaryPath("dsda", lambdas, betas, rules, classes, counts / counts.sum(),
                     adjustment=adjustment, converged=converged)
    if testx is not None:
        fit.pred = fit.predict(testx, testz)
    return fit


def road(x, y, lambdas=None, nlambda=DEFAULT_NLAMBDA,
         lambda_min_ratio=DEFAULT_MIN_RATIO, config=None):
    """Affine-constrained sparse discriminant path.

    Runs the least-squares path at the supplied lambdas, rescales each
    coefficient vector by c = 2 / (beta'(mu_2 - mu_1)) so the constraint
    beta'(mu_2 - mu_1)/2 = 1 holds exactly, and reports the constrained
    problem's own penalty value recovered from stationarity,
    lambda_road = lambda * c * n/(n-2).  All-zero path points have no
    constrained counterpart and are dropped (recorded in ``degenerate``).
    """
    x, codes, classes, counts = _binary_setup(x, y)
    base = dsda(x, y, lambdas=lambdas, nlambda=nlambda,
                lambda_min_ratio=lambda_min_ratio, config=config)
    n = counts.sum()
    mu1 = x[codes == 0].mean(axis=0)
    mu2 = x[codes == 1].mean(axis=0)
    delta = mu2 - mu1
    t = base.betas @ delta
    degenerate = t <= 0
    keep = ~degenerate
    c = np.zeros_like(t)
    c[keep] = 2.0 / t[keep]
    betas = base.betas[keep] * c[keep, None]
    road_lams = base.lambdas[keep] * c[keep] * n / (n - 2)
    rules = [postfit_univariate(x @ b, y) for b in betas]
    return BinaryPath("road", road_lams, betas, rules, classes,
                      counts / counts.sum(), input_lambdas=base.lambdas,
                      degenerate=degenerate)


def sos(x, y, lambdas=None, nlambda=DEFAULT_NLAMBDA,
        lambda_min_ratio=DEFAULT_MIN_RATIO, config=None):
    """Optimal-scoring path via the exact rescaling identity.

    The least-squares path is evaluated at lambda/s and scaled by
    s = sqrt(pi_1 pi_2); for balanced classes the lasso-scale lambdas are
    exactly double the optimal-scoring ones.
    """
    x, codes, classes, counts = _binary_setup(x, y)
    pri = counts / counts.sum()
    s = float(np.sqrt(pri[0] * pri[1]))
    if lambdas is None:
        lam_max = dsda_lambda_max(x, y) * s
        lambdas = uniform_grid(lam_max, nlambda, lambda_min_ratio).values
    else:
        lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1].copy()
    base = dsda(x, y, lambdas=np.asarray(lambdas) / s, config=config)
    betas = base.betas * s
    rules = [postfit_univariate(x @ b, y) for b in betas]
    return BinaryPath("sos", np.asarray(lambdas, dtype=float), betas, rules,
                      classes, pri, input_lambdas=base.lambdas)


@dataclass
class DsdaAllResult:
    chosen_lambda: float
    error: float
    report: object
    fit: BinaryPath


def dsda_all(x, y, testx, testy, nfolds=DEFAULT_NFOLDS, seed=0,
             lambdas=None, nlambda=DEFAULT_NLAMBDA,
             lambda_min_ratio=DEFAULT_MIN_RATIO):
    """Cross-validate, refit at the chosen lambda, and report test error."""
    from .tuning import kfold_cv

    report = kfold_cv(x, y, method="dsda", nfolds=nfolds, lambdas=lambdas,
                      seed=seed, nlambda=nlambda,
                      lambda_min_ratio=lambda_min_ratio)
    fit = dsda(x, y, lambdas=[report.chosen_lambda])
    pred = fit.predict(testx)[:, 0]
    err = float(np.mean(pred != np.asarray(testy)))
    return DsdaAllResult(report.chosen_lambda, err, report, fit)
