"""Multiclass sparse discriminant analysis by group-lasso coordinate descent.

The objective, over coefficient columns beta_k for k = 2..K, is

    sum_k { (1/2) beta_k' Sigma beta_k - (mu_k - mu_1)' beta_k }
        + lambda * sum_j ||beta_{.j}||_2,

with the pooled covariance Sigma (denominator n-K) and the group norm
taken across classes at each variable, so a variable is selected jointly
or not at all.  Two equivalent solvers are provided: ``cd_original``
works from an explicitly formed covariance (fine for moderate p), while
``cd_modified`` keeps only the centered data and reconstructs the needed
covariance columns from cross-products with the active variables, so its
auxiliary storage stays O(p) instead of O(p^2).  Binary problems can be
delegated to the penalized least-squares path, which reaches the same
classifier at lower cost.
"""

from __future__ import annotations

import numpy as np

from .covariates import adjvec
from .lda import DiscriminantRule, classify, encode_labels, estimate_stats
from .solvers import group_soft_threshold
from .tuning import DEFAULT_MIN_RATIO, DEFAULT_NLAMBDA, uniform_grid

__all__ = ["MsdaFit", "msda", "cd_original", "cd_modified", "msda_lambda_max"]


def _delta_matrix(means):
    """Rows j give the across-class mean-difference block, shape (p, K-1)."""
    return (means[1:] - means[0]).T


def msda_lambda_max(x, y, u=None):
    """Smallest lambda with an all-zero solution: max_j ||delta_{.j}||."""
    x = np.asarray(x, dtype=float)
    if u is not None:
        _, x = adjvec(x, u, y)
    stats = estimate_stats(x, y)
    delta = _delta_matrix(stats.means)
    return float(np.max(np.linalg.norm(delta, axis=1)))


def _group_cd(delta, lam, warm, tol, max_sweeps, diag, col_dot, rank1_update,
              full_grad, track_objective, objective):
    """Shared active-set blockwise coordinate descent.

    ``diag`` holds the per-variable curvatures sigma_jj; ``col_dot(j)``
    returns the j-th row of Sigma @ B for the current coefficients;
    ``rank1_update(j, dv)`` applies a coefficient change at variable j to
    the cached products; ``full_grad()`` returns Sigma @ B - delta for all
    variables at once.
    """
    p, km1 = delta.shape
    b = np.zeros((p, km1)) if warm is None else np.asarray(warm, dtype=float).copy()
    live = diag > 0
    b[~live] = 0.0
    kkt_tol = 5.0 * tol
    active = set(np.flatnonzero(np.any(b != 0, axis=1) & live))
    sweeps = 0
    converged = False
    trace = []
    if track_objective:
        trace.append(objective(b, lam))

    while sweeps < max_sweeps:
        while sweeps < max_sweeps:
            delta_max = 0.0
            for j in sorted(active):
                bj = b[j]
                c = delta[j] - col_dot(j) + diag[j] * bj
                new = group_soft_threshold(c, lam) / diag[j]
                dv = new - bj
                if np.any(dv != 0):
                    rank1_update(j, dv)
                    b[j] = new
                    delta_max = max(delta_max, float(np.max(np.abs(dv))))
            sweeps += 1
            if track_objective:
                trace.append(objective(b, lam))
            if delta_max < tol:
                break
        grad = full_grad()
        norms = np.linalg.norm(grad, axis=1)
        act = np.any(b != 0, axis=1)
        viol_inactive = np.flatnonzero(live & ~act & (norms > lam + kkt_tol))
        bad_active = False
        for j in np.flatnonzero(act):
            u = b[j] / np.linalg.norm(b[j])
            if np.linalg.norm(grad[j] + lam * u) > kkt_tol:
                bad_active = True
                break
        if viol_inactive.size == 0 and not bad_active:
            converged = True
            break
        active.update(viol_inactive.tolist())
        active.update(np.flatnonzero(act).tolist())
    return b, sweeps, converged, trace


def cd_original(sigma, delta, lam, warm=None, tol=1e-7, max_sweeps=100_000,
                track_objective=False):
    """Blockwise coordinate descent with an explicit covariance matrix.

    ``delta`` is (p, K-1).  Returns (B, sweeps, converged[, trace]).
    Variables with zero variance are excluded (coefficients stay zero).
    """
    sigma = np.asarray(sigma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    p = sigma.shape[0]
    r = [np.zeros_like(delta)]  # r[0] = Sigma @ B, maintained incrementally

    if warm is not None:
        r[0] = sigma @ np.asarray(warm, dtype=float)

    def col_dot(j):
        return r[0][j]

    def rank1_update(j, dv):
        r[0] += np.outer(sigma[:, j], dv)

    def full_grad():
        return r[0] - delta

    def objective(b, lam_):
        return float(0.5 * np.sum(b * r[0]) - np.sum(delta * b)
                     + lam_ * np.sum(np.linalg.norm(b, axis=1)))

    b, sweeps, converged, trace = _group_cd(
        delta, lam, warm, tol, max_sweeps, np.diag(sigma).copy(), col_dot,
        rank1_update, full_grad, track_objective, objective)
    if track_objective:
        return b, sweeps, converged, trace
    return b, sweeps, converged


def cd_modified(xc, delta, n_minus_k, lam, warm=None, tol=1e-7,
                max_sweeps=100_000, track_objective=False):
    """Blockwise coordinate descent that never forms the covariance.

    ``xc`` is the within-class-centered data.  Covariance-vector products
    are reconstructed as xc' (xc @ B) / (n - K) with the n-vector cache
    xc @ B maintained incrementally, the per-variable curvatures are the
    cached column sums of squares, and only active variables contribute
    to the cross-products, keeping auxiliary storage O(p).
    """
    xc = np.asarray(xc, dtype=float)
    delta = np.asarray(delta, dtype=float)
    nmk = float(n_minus_k)
    diag = np.einsum("ij,ij->j", xc, xc) / nmk
    t = [np.zeros((xc.shape[0], delta.shape[1]))]  # t[0] = xc @ B

    if warm is not None:
        t[0] = xc @ np.asarray(warm, dtype=float)

    def col_dot(j):
        return (xc[:, j] @ t[0]) / nmk

    def rank1_update(j, dv):
        t[0] += np.outer(xc[:, j], dv)

    def full_grad():
        return (xc.T @ t[0]) / nmk - delta

    def objective(b, lam_):
        return float(0.5 * np.sum(t[0] ** 2) / nmk - np.sum(delta * b)
                     + lam_ * np.sum(np.linalg.norm(b, axis=1)))

    b, sweeps, converged, trace = _group_cd(
        delta, lam, warm, tol, max_sweeps, diag, col_dot, rank1_update,
        full_grad, track_objective, objective)
    if track_objective:
        return b, sweeps, converged, trace
    return b, sweeps, converged


class MsdaFit:
    """Group-sparse multiclass path: coefficients (L, p, K-1) plus the
    class statistics needed to assemble the Bayes-rule intercepts."""

    method = "msda"

    def __init__(self, lambdas, betas, classes, priors, means, model_option,
                 adjustment=None, binary_path=None, converged=None):
        self.lambdas = np.asarray(lambdas, dtype=float)
        self.betas = betas
        self.classes = np.asarray(classes)
        self.priors = np.asarray(priors, dtype=float)
        self.means = means
        self.model_option = model_option
        self.adjustment = adjustment
        self.binary_path = binary_path
        self.converged = converged
        self.pred = None

    @property
    def df(self):
        """Selected-variable count (rows with any nonzero) per lambda."""
        if self.binary_path is not None:
            return self.binary_path.df
        return np.array([int(np.any(b != 0, axis=1).sum()) for b in self.betas])

    def rule_at(self, i):
        """Discriminant rule for path point i."""
        b = self.betas[i].T  # (K-1, p)
        inter = (np.log(self.priors[1:] / self.priors[0])
                 - 0.5 * np.einsum("kp,kp->k", b, self.means[1:] + self.means[0]))
        gammas = alpha = None
        if self.adjustment is not None:
            a = self.adjustment
            gammas = np.asarray(a.gammas, dtype=float)
            alpha = a.alpha
            inter = inter - 0.5 * np.einsum(
                "kq,kq->k", gammas, np.asarray(a.phis)[1:] + np.asarray(a.phis)[0])
        return DiscriminantRule(self.classes, self.priors, b, inter,
                                gammas=gammas, alpha=alpha)

    def predict(self, x, u=None):
        """Labels per lambda, shape (n, L)."""
        if self.binary_path is not None:
            return self.binary_path.predict(x, u)
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None]
        out = np.empty((x.shape[0], len(self.lambdas)), dtype=self.classes.dtype)
        for i in range(len(self.lambdas)):
            out[:, i] = classify(self.rule_at(i), x, u)
        return out

    def to_dict(self):
        out = {
            "method": "msda",
            "model_option": self.model_option,
            "lambdas": self.lambdas.tolist(),
            "classes": self.classes.tolist(),
            "priors": self.priors.tolist(),
        }
        if self.binary_path is not None:
            out["binary_path"] = self.binary_path.to_dict()
            return out
        out["betas"] = np.asarray(self.betas).tolist()
        out["means"] = np.asarray(self.means).tolist()
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
        from .binary import BinaryPath
        from .covariates import Adjustment

        if "binary_path" in d:
            bp = BinaryPath.from_dict(d["binary_path"])
            return cls(np.asarray(d["lambdas"], dtype=float), None,
                       np.asarray(d["classes"]),
                       np.asarray(d["priors"], dtype=float), None,
                       d["model_option"], binary_path=bp)
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
        return cls(np.asarray(d["lambdas"], dtype=float),
                   np.asarray(d["betas"], dtype=float),
                   np.asarray(d["classes"]),
                   np.asarray(d["priors"], dtype=float),
                   np.asarray(d["means"], dtype=float),
                   d["model_option"], adjustment=adjustment)


ORIGINAL_MAX_P = 2000  # dispatch threshold between the two solvers


def msda(x, y, z=None, lambdas=None, nlambda=DEFAULT_NLAMBDA,
         lambda_min_ratio=DEFAULT_MIN_RATIO, dfmax=None, model=None,
         tol=1e-7, max_sweeps=100_000, testx=None, testz=None):
    """Fit the multiclass group-sparse discriminant path.

    ``model`` picks the implementation: "binary" (two classes only,
    delegated to the least-squares path), "multi.original" (explicit
    covariance) or "multi.modified" (O(p) storage).  Left unset, binary
    problems use "binary" and multiclass ones dispatch on p <= 2000.
    The path stops early once more than ``dfmax`` variables are selected.
    """
    x = np.asarray(x, dtype=float)
    codes, classes = encode_labels(y)
    k = len(classes)
    if k < 2:
        raise ValueError("need at least 2 classes")
    if model is None:
        if k == 2:
            model = "binary"
        else:
            model = "multi.original" if x.shape[1] <= ORIGINAL_MAX_P else "multi.modified"
    if model not in ("binary", "multi.original", "multi.modified"):
        raise ValueError(f"unknown model option {model!r}")
    if model == "binary":
        if k != 2:
            raise ValueError("model='binary' requires exactly 2 classes")
        from .binary import dsda

        path = dsda(x, y, lambdas=lambdas, z=z, testx=testx, testz=testz,
                    nlambda=nlambda, lambda_min_ratio=lambda_min_ratio)
        counts = np.bincount(codes, minlength=2)
        fit = MsdaFit(path.lambdas, None, classes, counts / counts.sum(),
                      None, "binary", binary_path=path)
        fit.pred = path.pred
        return fit

    adjustment = None
    if z is not None:
        adjustment, x = adjvec(x, z, y)
    stats = estimate_stats(x, y, pooled_cov=(model == "multi.original"))
    delta = _delta_matrix(stats.means)
    if lambdas is None:
        lam_max = float(np.max(np.linalg.norm(delta, axis=1)))
        lambdas = uniform_grid(lam_max, nlambda, lambda_min_ratio).values
    else:
        lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1].copy()

    n, p = x.shape
    if model == "multi.original":
        sigma = stats.pooled_cov
        solver = lambda lam, warm: cd_original(sigma, delta, lam, warm, tol, max_sweeps)
    else:
        xc = x - stats.means[codes]
        nmk = n - k
        solver = lambda lam, warm: cd_modified(xc, delta, nmk, lam, warm, tol, max_sweeps)

    betas = []
    kept = []
    flags = []
    warm = None
    for lam in lambdas:
        b, _, ok = solver(lam, warm)
        warm = b
        df = int(np.any(b != 0, axis=1).sum())
        if dfmax is not None and df > dfmax:
            break
        betas.append(b.copy())
        kept.append(lam)
        flags.append(ok)
    if not betas:
        raise ValueError("dfmax exceeded at the largest lambda; nothing to emit")
    fit = MsdaFit(np.asarray(kept), np.asarray(betas), classes, stats.priors,
                  stats.means, model, adjustment=adjustment,
                  converged=np.asarray(flags))
    if testx is not None:
        fit.pred = fit.predict(testx, testz)
    return fit
