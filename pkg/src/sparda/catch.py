"""Tensor discriminant analysis with Kronecker-structured covariance.

The per-mode covariances are estimated from within-class residuals by the
moment estimator: unfold the residuals along mode j, average the outer
products, then normalize so every mode but the last has unit (1,1) entry,
with the overall scale carried by the last mode via the pooled variance of
the first tensor entry.  The coefficient tensors solve a group-penalized
quadratic program,

    sum_k { (1/2) <B_k, [[B_k; S_1..S_M]]> - <B_k, mu_k - mu_1> }
        + lambda * sum_positions ||b across k||_2,

by cyclic coordinate descent over tensor positions: the curvature at a
position is the product of the per-mode diagonal entries, and changing one
coefficient updates the cached Tucker contraction by a rank-one
cross-profile instead of recomputing it.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .covariates import adjten
from .lda import DiscriminantRule, classify, encode_labels, estimate_stats
from .solvers import group_soft_threshold
from .tensor import tucker_transform
from .tuning import DEFAULT_MIN_RATIO, DEFAULT_NLAMBDA, uniform_grid

__all__ = [
    "KroneckerCov",
    "estimate_kron_cov",
    "CatchFit",
    "catch",
    "catch_matrix",
    "catch_lambda_max",
]


class DegenerateDataError(ValueError):
    """Within-class residuals carry no variance along some mode."""


class KroneckerCov:
    """Per-mode covariance factors; modes before the last are normalized
    to unit (1,1) entry, the last carries the overall scale."""

    def __init__(self, sigmas):
        self.sigmas = [np.asarray(s, dtype=float) for s in sigmas]

    @property
    def dims(self):
        return tuple(s.shape[0] for s in self.sigmas)

    def diag_tensor(self):
        """Tensor of per-position curvatures: outer product of diagonals."""
        diags = [np.diag(s) for s in self.sigmas]
        return reduce(np.multiply.outer, diags)


def estimate_kron_cov(x, y):
    """Moment estimator of the mode covariances from labeled tensors."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    dims = x.shape[1:]
    m = len(dims)
    codes, classes = encode_labels(y)
    k = len(classes)
    if n <= k:
        raise ValueError("need n > K observations")
    means = np.stack([x[codes == c].mean(axis=0) for c in range(k)])
    resid = x - means[codes]

    s_tilde = []
    for j in range(m):
        w = np.moveaxis(resid, j + 1, 1).reshape(n, dims[j], -1)
        rest = w.shape[2]
        s_tilde.append(np.einsum("iab,icb->ac", w, w) / (n * rest))
    first_entry = resid[(slice(None),) + (0,) * m]
    var_hat = float(np.sum(first_entry**2) / (n - k))

    s11 = [s[0, 0] for s in s_tilde]
    if any(v <= 0 for v in s11):
        raise DegenerateDataError("zero variance in the leading entry of a mode")
    sigmas = [s_tilde[j] / s11[j] for j in range(m - 1)]
    sigmas.append(var_hat / np.prod(s11) * s_tilde[m - 1])
    return KroneckerCov(sigmas)


def _multi_outer(cols):
    return reduce(np.multiply.outer, cols)


def catch_lambda_max(x, y, u=None):
    """Smallest lambda with an all-zero solution: max position group norm."""
    x = np.asarray(x, dtype=float)
    if u is not None:
        _, x = adjten(x, u, y)
    stats = estimate_stats(x, y)
    delta = stats.means[1:] - stats.means[0]
    return float(np.max(np.sqrt(np.sum(delta**2, axis=0))))


def _catch_cd(sigmas, delta, lam, warm, tol, max_sweeps, quad,
              track_objective=False):
    """Group coordinate descent over tensor positions.

    ``delta`` has shape (K-1, p_1, ..., p_M); the cached contraction
    C_k = [[B_k; S_1..S_M]] is updated rank-one per coefficient change.
    Returns (B, sweeps, converged, trace).
    """
    km1 = delta.shape[0]
    dims = delta.shape[1:]
    mm = len(dims)
    b = np.zeros_like(delta) if warm is None else np.asarray(warm, dtype=float).copy()
    live = quad > 0
    b[:, ~live] = 0.0
    if warm is None or not np.any(b):
        contr = np.zeros_like(delta)
    else:
        contr = np.stack([tucker_transform(b[kk], sigmas) for kk in range(km1)])
    kkt_tol = 5.0 * tol
    kshape = (km1,) + (1,) * mm

    active = {tuple(pos) for pos in np.argwhere(np.any(b != 0, axis=0))}
    sweeps = 0
    converged = False
    trace = []

    def objective():
        pen = np.sum(np.sqrt(np.sum(b**2, axis=0)))
        return float(0.5 * np.sum(b * contr) - np.sum(delta * b) + lam * pen)

    if track_objective:
        trace.append(objective())

    while sweeps < max_sweeps:
        while sweeps < max_sweeps:
            delta_max = 0.0
            for pos in sorted(active):
                sel = (slice(None),) + pos
                q = quad[pos]
                c = delta[sel] - contr[sel] + q * b[sel]
                new = group_soft_threshold(c, lam) / q
                dv = new - b[sel]
                if np.any(dv != 0):
                    rank1 = _multi_outer(
                        [sigmas[m][:, pos[m]] for m in range(mm)])
                    contr += dv.reshape(kshape) * rank1
                    b[sel] = new
                    delta_max = max(delta_max, float(np.max(np.abs(dv))))
            sweeps += 1
            if track_objective:
                trace.append(objective())
            if delta_max < tol:
                break
        grad = contr - delta
        norms = np.sqrt(np.sum(grad**2, axis=0))
        act = np.any(b != 0, axis=0)
        viol = np.argwhere(~act & live & (norms > lam + kkt_tol))
        bad_active = False
        for pos in np.argwhere(act):
            sel = (slice(None),) + tuple(pos)
            u = b[sel] / np.linalg.norm(b[sel])
            if np.linalg.norm(grad[sel] + lam * u) > kkt_tol:
                bad_active = True
                break
        if viol.size == 0 and not bad_active:
            converged = True
            break
        active.update(tuple(pos) for pos in viol)
        active.update(tuple(pos) for pos in np.argwhere(act))
    return b, sweeps, converged, trace


class CatchFit:
    """Tensor discriminant path: coefficient tensors per lambda plus the
    statistics that assemble the Bayes-rule intercepts."""

    method = "catch"

    def __init__(self, lambdas, betas, classes, priors, means, kron,
                 adjustment=None, converged=None):
        self.lambdas = np.asarray(lambdas, dtype=float)
        self.betas = betas  # (L, K-1, p_1..p_M)
        self.classes = np.asarray(classes)
        self.priors = np.asarray(priors, dtype=float)
        self.means = means
        self.kron = kron
        self.adjustment = adjustment
        self.converged = converged
        self.pred = None

    @property
    def dims(self):
        return self.means.shape[1:]

    @property
    def df(self):
        """Selected-position count (any nonzero across classes) per lambda."""
        return np.array([int(np.any(b != 0, axis=0).sum()) for b in self.betas])

    def rule_at(self, i):
        b = self.betas[i]
        km1 = b.shape[0]
        flat_b = b.reshape(km1, -1)
        flat_mid = (self.means[1:] + self.means[0]).reshape(km1, -1)
        inter = (np.log(self.priors[1:] / self.priors[0])
                 - 0.5 * np.einsum("kp,kp->k", flat_b, flat_mid))
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
        x = np.asarray(x, dtype=float)
        if x.ndim == len(self.dims):
            x = x[None]
        out = np.empty((x.shape[0], len(self.lambdas)), dtype=self.classes.dtype)
        for i in range(len(self.lambdas)):
            out[:, i] = classify(self.rule_at(i), x, u)
        return out

    def to_dict(self):
        out = {
            "method": "catch",
            "lambdas": self.lambdas.tolist(),
            "dims": list(self.dims),
            "betas": np.asarray(self.betas).tolist(),
            "classes": self.classes.tolist(),
            "priors": self.priors.tolist(),
            "means": np.asarray(self.means).tolist(),
            "sigmas": [s.tolist() for s in self.kron.sigmas],
        }
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
                   KroneckerCov([np.asarray(s, dtype=float) for s in d["sigmas"]]),
                   adjustment=adjustment)


def catch(x, y, z=None, lambdas=None, nlambda=DEFAULT_NLAMBDA,
          lambda_min_ratio=DEFAULT_MIN_RATIO, dfmax=None, tol=1e-7,
          max_sweeps=100_000, testx=None, testz=None):
    """Fit the tensor discriminant path.

    Covariates, when given, are adjusted away first (the grid, the
    statistics and the covariance all use the adjusted tensors);
    prediction applies the same adjustment to new data.  Supplying
    ``testx`` (and ``testz`` if fitted with covariates) attaches
    per-lambda test predictions as ``fit.pred``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim < 2:
        raise ValueError("catch expects (n, p_1, ..., p_M) tensor data")
    codes, classes = encode_labels(y)
    if len(classes) < 2:
        raise ValueError("need at least 2 classes")
    adjustment = None
    if z is not None:
        adjustment, x = adjten(x, z, y)
    stats = estimate_stats(x, y)
    kron = estimate_kron_cov(x, y)
    delta = stats.means[1:] - stats.means[0]
    quad = kron.diag_tensor()
    if lambdas is None:
        lam_max = float(np.max(np.sqrt(np.sum(delta**2, axis=0))))
        lambdas = uniform_grid(lam_max, nlambda, lambda_min_ratio).values
    else:
        lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1].copy()

    betas = []
    kept = []
    flags = []
    warm = None
    for lam in lambdas:
        b, _, ok, _ = _catch_cd(kron.sigmas, delta, lam, warm, tol, max_sweeps, quad)
        warm = b
        df = int(np.any(b != 0, axis=0).sum())
        if dfmax is not None and df > dfmax:
            break
        betas.append(b.copy())
        kept.append(lam)
        flags.append(ok)
    if not betas:
        raise ValueError("dfmax exceeded at the largest lambda; nothing to emit")
    fit = CatchFit(np.asarray(kept), np.asarray(betas), classes, stats.priors,
                   stats.means, kron, adjustment=adjustment,
                   converged=np.asarray(flags))
    if testx is not None:
        fit.pred = fit.predict(testx, testz)
    return fit


def catch_matrix(x, y, z=None, **kwargs):
    """Tensor discriminant fit for matrix (2-way) predictors."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 3:
        raise ValueError("catch_matrix expects (n, rows, cols) matrix data")
    return catch(x, y, z=z, **kwargs)
