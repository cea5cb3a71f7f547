"""Automatic lambda sequences and k-fold cross-validation.

The upper bound of a tuning range is the smallest lambda that shrinks all
coefficients to zero (method-specific closed forms); the lower bound is
that value times ``lambda_min_ratio`` and the grid is uniformly (linearly)
spaced in between, largest first.  ``spacing="log"`` is available as a
knob but uniform is the default.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lda import encode_labels

__all__ = ["LambdaGrid", "uniform_grid", "gen_lambda", "CvReport", "kfold_cv"]

DEFAULT_NLAMBDA = 100
DEFAULT_MIN_RATIO = 0.05
DEFAULT_NFOLDS = 5


@dataclass
class LambdaGrid:
    lambda_max: float
    lambda_min_ratio: float
    nlambda: int
    spacing: str
    values: np.ndarray

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def uniform_grid(lambda_max, nlambda=DEFAULT_NLAMBDA, lambda_min_ratio=DEFAULT_MIN_RATIO,
                 spacing="uniform"):
    """Decreasing lambda sequence from lambda_max down to ratio*lambda_max."""
    lambda_max = float(lambda_max)
    if lambda_max <= 0:
        warnings.warn("degenerate data: zero mean differences, single-point grid at 0")
        return LambdaGrid(0.0, lambda_min_ratio, 1, spacing, np.zeros(1))
    lo = lambda_max * lambda_min_ratio
    if spacing == "uniform":
        values = np.linspace(lambda_max, lo, nlambda)
    elif spacing == "log":
        values = np.geomspace(lambda_max, lo, nlambda)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    return LambdaGrid(lambda_max, lambda_min_ratio, nlambda, spacing, values)


def _lambda_max_for(method, x, y, u):
    if method in ("dsda", "road", "sos"):
        from .binary import dsda_lambda_max

        return dsda_lambda_max(x, y, u)
    if method == "sesda":
        from .sesda import sesda_lambda_max

        return sesda_lambda_max(x, y)
    if method == "msda":
        from .msda import msda_lambda_max

        return msda_lambda_max(x, y, u)
    if method == "catch":
        from .catch import catch_lambda_max

        return catch_lambda_max(x, y, u)
    raise ValueError(f"unknown method {method!r}")


def gen_lambda(x, y, u=None, method="dsda", nlambda=DEFAULT_NLAMBDA,
               lambda_min_ratio=DEFAULT_MIN_RATIO, spacing="uniform"):
    """Generate the automatic tuning grid for a method on a dataset.

    Fitting the method at ``values[0]`` yields the all-zero solution.
    """
    return uniform_grid(_lambda_max_for(method, x, y, u), nlambda,
                        lambda_min_ratio, spacing)


def _fit_for(method, x, y, u, lambdas, **kw):
    if method == "dsda":
        from .binary import dsda

        return dsda(x, y, z=u, lambdas=lambdas, **kw)
    if method == "road":
        from .binary import road

        return road(x, y, lambdas=lambdas, **kw)
    if method == "sos":
        from .binary import sos

        return sos(x, y, lambdas=lambdas, **kw)
    if method == "sesda":
        from .sesda import sesda

        return sesda(x, y, lambdas=lambdas, **kw)
    if method == "msda":
        from .msda import msda

        return msda(x, y, z=u, lambdas=lambdas, **kw)
    if method == "catch":
        from .catch import catch

        return catch(x, y, z=u, lambdas=lambdas, **kw)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class CvReport:
    lambdas: np.ndarray
    mean_errors: np.ndarray
    nfolds: int
    seed: int
    rule: str
    chosen_lambda: float
    chosen_index: int
    fold_errors: np.ndarray = field(repr=False, default=None)


def stratified_folds(y, nfolds, rng):
    """Assign each observation to one validation fold, stratified by class.

    Within each class the (shuffled) members are dealt round-robin, so a
    training split can only lose a class if that class has a single member.
    """
    y = np.asarray(y)
    codes, classes = encode_labels(y)
    n = len(y)
    assign = np.empty(n, dtype=int)
    for c in range(len(classes)):
        idx = np.flatnonzero(codes == c)
        rng.shuffle(idx)
        assign[idx] = np.arange(len(idx)) % nfolds
    for f in range(nfolds):
        train_codes = codes[assign != f]
        if len(np.unique(train_codes)) < len(classes):
            raise ValueError(
                f"fold {f}: a class is absent from the training split; "
                "every class needs at least two observations for CV"
            )
    return assign


def kfold_cv(x, y, u=None, method="dsda", nfolds=DEFAULT_NFOLDS, lambdas=None,
             rule="min", seed=0, nlambda=DEFAULT_NLAMBDA,
             lambda_min_ratio=DEFAULT_MIN_RATIO, n_jobs=1, **method_kw):
    """Cross-validate a method over a lambda grid and pick the winner.

    The grid defaults to :func:`gen_lambda` on the full dataset.  Each
    fold fits on the remaining folds and scores misclassification on the
    held-out one.  Among lambdas attaining the minimal mean error, rule
    ``"min"`` picks the smallest and ``"max"`` the largest.
    """
    if rule not in ("min", "max"):
        raise ValueError("rule must be 'min' or 'max'")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if lambdas is None:
        lambdas = gen_lambda(x, y, u, method, nlambda, lambda_min_ratio).values
    else:
        lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1].copy()
    rng = np.random.default_rng(seed)
    assign = stratified_folds(y, nfolds, rng)

    def run_fold(f):
        tr = assign != f
        va = ~tr
        utr = None if u is None else np.asarray(u)[tr]
        uva = None if u is None else np.asarray(u)[va]
        fit = _fit_for(method, x[tr], y[tr], utr, lambdas, **method_kw)
        pred = fit.predict(x[va], uva)
        errs = np.full(len(lambdas), np.nan)
        fitted = pred.shape[1]
        errs[:fitted] = np.mean(pred != np.asarray(y)[va][:, None], axis=0)
        return errs

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            fold_errors = np.stack(list(pool.map(run_fold, range(nfolds))))
    else:
        fold_errors = np.stack([run_fold(f) for f in range(nfolds)])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean_errors = np.nanmean(fold_errors, axis=0)
    complete = ~np.any(np.isnan(fold_errors), axis=0)
    if not np.any(complete):
        raise RuntimeError("no lambda was fitted by every fold (dfmax too small?)")
    best = np.nanmin(mean_errors[complete])
    ties = np.flatnonzero(complete & (mean_errors <= best))
    # lambdas are decreasing: the last tie is the smallest lambda
    chosen = ties[-1] if rule == "min" else ties[0]
    return CvReport(
        lambdas=np.asarray(lambdas, dtype=float),
        mean_errors=mean_errors,
        nfolds=nfolds,
        seed=seed,
        rule=rule,
        chosen_lambda=float(lambdas[chosen]),
        chosen_index=int(chosen),
        fold_errors=fold_errors,
    )
