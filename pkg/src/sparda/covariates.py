"""Covariate adjustment for vector and tensor predictors.

The dependence of the predictor on low-dimensional covariates u is removed
by within-class least squares: with group-centered covariates U~ and
predictors X~, the coefficient solve is (U~'U~)^{-1} U~'X~, shared across
all predictor entries, and the adjusted predictor is x_i - alpha @ u_i.
The covariate side of the discriminant rule (class means phi_k, pooled
covariance Psi with denominator n-K, and gamma_k = Psi^{-1}(phi_k - phi_1))
is estimated alongside.
"""

from __future__ import annotations

import numpy as np

from .lda import encode_labels, center_within_class
from .tensor import vec_batch, unvec_batch

__all__ = ["CovariateError", "Adjustment", "adjvec", "adjten"]


class CovariateError(ValueError):
    """Raised when the covariate Gram matrix is singular (collinearity)."""


class Adjustment:
    """Fitted covariate adjustment.

    ``alpha`` has the predictor's dims plus a trailing covariate axis, so
    adjusting means contracting the covariate vector against the last axis.
    """

    def __init__(self, alpha, phis, psi, gammas, classes):
        self.alpha = alpha
        self.phis = phis
        self.psi = psi
        self.gammas = gammas
        self.classes = classes

    def adjust(self, x, u):
        """Remove the covariate effect: x_i - alpha xbar_(M+1) u_i."""
        x = np.asarray(x, dtype=float)
        u = np.atleast_2d(np.asarray(u, dtype=float))
        single = x.ndim == self.alpha.ndim - 1
        if single:
            x = x[None]
        adj = x - np.tensordot(u, self.alpha, axes=(1, self.alpha.ndim - 1))
        return adj[0] if single else adj


def _fit_alpha(xflat, u, y):
    """Shared least-squares solve over group-centered data.

    Returns (alpha (p, q), adjusted flat x, covariate stats).
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    codes, classes = encode_labels(y)
    k = len(classes)
    uc, ubar = center_within_class(u, codes, k)
    xc, _ = center_within_class(xflat, codes, k)
    gram = uc.T @ uc
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise CovariateError(
            "covariate Gram matrix is singular; check for collinear or "
            "constant covariate columns"
        )
    alpha = np.linalg.solve(gram, uc.T @ xc).T  # (p, q)
    adjusted = xflat - u @ alpha.T

    n = u.shape[0]
    if n <= k:
        raise CovariateError("covariate covariance requires n > K")
    psi = uc.T @ uc / (n - k)
    gammas = np.linalg.solve(psi, (ubar[1:] - ubar[0]).T).T  # (K-1, q)
    return alpha, adjusted, ubar, psi, gammas, classes


def adjvec(x, u, y):
    """Adjust vector predictors for covariates.

    Returns ``(Adjustment, adjusted_x)``; the adjusted predictors have
    within-class-centered residuals exactly orthogonal to the centered
    covariates (normal equations).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("adjvec expects an (n, p) predictor matrix")
    alpha, adjusted, ubar, psi, gammas, classes = _fit_alpha(x, u, y)
    return Adjustment(alpha, ubar, psi, gammas, classes), adjusted


def adjten(x, u, y):
    """Adjust tensor predictors for covariates, entry by entry.

    The same q x q Gram solve is shared across all tensor entries; the
    result is identical to running :func:`adjvec` on the vectorized data
    and reshaping back.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim < 2:
        raise ValueError("adjten expects (n, p_1, ..., p_M) tensors")
    n = x.shape[0]
    dims = x.shape[1:]
    flat = vec_batch(x)
    alpha_flat, adjusted_flat, ubar, psi, gammas, classes = _fit_alpha(flat, u, y)
    q = alpha_flat.shape[1]
    alpha = alpha_flat.reshape(dims + (q,), order="F")
    adjusted = unvec_batch(adjusted_flat, dims)
    return Adjustment(alpha, ubar, psi, gammas, classes), adjusted
