"""Dense M-way tensor algebra: unfolding, mode products, Tucker transforms,
inner products, and tensor-normal sampling.

Layout convention, used everywhere in this package: the vectorization
``vec(A)`` runs the first mode fastest (column-major), so the flat index of
entry ``(i_1, ..., i_M)`` is ``i_1 + p_1*i_2 + p_1*p_2*i_3 + ...`` (0-based).
Under this layout the Tucker/Kronecker identity holds:

    vec(tucker_transform(C, [G_1, ..., G_M])) == kron(G_M, ..., G_1) @ vec(C)

Modes are 0-based like numpy axes; mode 0 is the fastest-varying one.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionError",
    "FactorizationError",
    "DenseTensor",
    "TensorNormalParams",
    "vec",
    "vec_batch",
    "unvec_batch",
    "unfold",
    "refold",
    "mode_product",
    "tucker_transform",
    "inner",
    "sample_tensor_normal",
]


class DimensionError(ValueError):
    """Tensor dims and operand shapes do not line up."""


class FactorizationError(ValueError):
    """A covariance factor is not symmetric positive definite."""


def _as_array(t):
    a = np.asarray(t, dtype=float)
    if a.ndim == 0:
        raise DimensionError("expected an array with at least one mode")
    return a


class DenseTensor:
    """Immutable dense M-way tensor with an explicit dimension vector.

    The payload is kept as a flat column-major buffer of length prod(dims),
    so ``t.data`` is exactly ``vec(t)``.
    """

    __slots__ = ("dims", "data")

    def __init__(self, data, dims=None):
        a = np.asarray(data, dtype=float)
        if dims is None:
            if a.ndim < 1:
                raise DimensionError("scalar input needs explicit dims")
            dims = a.shape
            flat = a.ravel(order="F")
        else:
            dims = tuple(int(d) for d in dims)
            flat = a.ravel(order="F")
        if any(d < 1 for d in dims):
            raise DimensionError(f"dims must be positive, got {dims}")
        if flat.size != int(np.prod(dims)):
            raise DimensionError(
                f"buffer length {flat.size} != prod(dims)={int(np.prod(dims))}"
            )
        flat = flat.copy()
        flat.setflags(write=False)
        self.dims = dims
        self.data = flat

    @classmethod
    def from_vec(cls, vector, dims):
        """Build from a flat column-major buffer and a dimension vector."""
        return cls(np.asarray(vector, dtype=float), dims=dims)

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def array(self):
        """Read-only ndarray view of shape ``dims``."""
        return self.data.reshape(self.dims, order="F")

    @property
    def vec(self):
        return self.data

    def __array__(self, dtype=None, copy=None):
        a = self.array
        return a.astype(dtype) if dtype is not None else a

    def __getitem__(self, idx):
        return self.array[idx]

    def __repr__(self):
        return f"DenseTensor(dims={self.dims})"


def vec(t):
    """Column-major vectorization (mode 0 fastest)."""
    return _as_array(t).ravel(order="F")


def vec_batch(x):
    """Vectorize a batch: (n, p_1, ..., p_M) -> (n, prod p), rows = vec(X_i)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    return np.moveaxis(x, 0, -1).reshape(-1, n, order="F").T


def unvec_batch(flat, dims):
    """Inverse of :func:`vec_batch` for the given per-observation dims."""
    flat = np.asarray(flat, dtype=float)
    dims = tuple(int(d) for d in dims)
    n = flat.shape[0]
    if flat.shape[1] != int(np.prod(dims)):
        raise DimensionError(
            f"row length {flat.shape[1]} != prod(dims)={int(np.prod(dims))}"
        )
    return np.moveaxis(flat.T.reshape(dims + (n,), order="F"), -1, 0)


def unfold(t, mode):
    """Unfold along ``mode`` into a p_mode x prod(other dims) matrix.

    Column j holds a mode-``mode`` fiber; the columns are ordered so that
    ravelling the mode-0 unfolding column-major reproduces ``vec(t)``.
    """
    a = _as_array(t)
    if not 0 <= mode < a.ndim:
        raise DimensionError(f"mode {mode} out of range for {a.ndim}-way tensor")
    return np.moveaxis(a, mode, 0).reshape(a.shape[mode], -1, order="F")


def refold(mat, mode, dims):
    """Inverse of :func:`unfold` for the given full dimension vector."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= mode < len(dims):
        raise DimensionError(f"mode {mode} out of range for dims {dims}")
    m = np.asarray(mat, dtype=float)
    moved = (dims[mode],) + dims[:mode] + dims[mode + 1 :]
    if m.size != int(np.prod(dims)) or m.shape[0] != dims[mode]:
        raise DimensionError(f"matrix shape {m.shape} does not refold into {dims}")
    return np.moveaxis(m.reshape(moved, order="F"), 0, mode)


def mode_product(t, mode, g):
    """Mode-``mode`` product with a matrix g of shape (d, p_mode).

    Returns a tensor with dims ``p_0, ..., d, ..., p_{M-1}``.  A 1-D ``g``
    is treated as the mode-k vector product: the mode is contracted away
    and the result has M-1 modes.
    """
    a = _as_array(t)
    if not 0 <= mode < a.ndim:
        raise DimensionError(f"mode {mode} out of range for {a.ndim}-way tensor")
    g = np.asarray(g, dtype=float)
    if g.shape[-1] != a.shape[mode]:
        raise DimensionError(
            f"operand has {g.shape[-1]} columns, mode {mode} has size {a.shape[mode]}"
        )
    if g.ndim == 1:
        return np.tensordot(a, g, axes=(mode, 0))
    out = np.tensordot(g, a, axes=(1, mode))
    return np.moveaxis(out, 0, mode)


def tucker_transform(t, gs):
    """Multiply ``t`` by a matrix along every mode: t x_0 gs[0] x_1 gs[1] ...

    Satisfies ``vec(result) == kron(gs[-1], ..., gs[0]) @ vec(t)``.
    """
    a = _as_array(t)
    if len(gs) != a.ndim:
        raise DimensionError(f"need {a.ndim} factor matrices, got {len(gs)}")
    for m, g in enumerate(gs):
        a = mode_product(a, m, np.atleast_2d(np.asarray(g, dtype=float)))
    return a


def inner(a, b):
    """Entrywise inner product of two tensors with identical dims."""
    x = _as_array(a)
    y = _as_array(b)
    if x.shape != y.shape:
        raise DimensionError(f"dims mismatch: {x.shape} vs {y.shape}")
    return float(np.sum(x * y))


class TensorNormalParams:
    """Mean tensor plus one symmetric positive-definite covariance per mode."""

    def __init__(self, mean, mode_covs):
        self.mean = _as_array(mean)
        self.mode_covs = [np.asarray(s, dtype=float) for s in mode_covs]
        if len(self.mode_covs) != self.mean.ndim:
            raise DimensionError(
                f"{self.mean.ndim}-way mean needs {self.mean.ndim} covariances"
            )
        for m, s in enumerate(self.mode_covs):
            p = self.mean.shape[m]
            if s.shape != (p, p):
                raise DimensionError(f"mode-{m} covariance must be {p}x{p}")
            if not np.allclose(s, s.T):
                raise FactorizationError(f"mode-{m} covariance is not symmetric")

    def cholesky_factors(self):
        """Lower Cholesky factor per mode; raises if any is not PD."""
        ls = []
        for m, s in enumerate(self.mode_covs):
            try:
                ls.append(np.linalg.cholesky(s))
            except np.linalg.LinAlgError as exc:
                raise FactorizationError(
                    f"mode-{m} covariance is not positive definite"
                ) from exc
        return ls

    @property
    def dims(self):
        return self.mean.shape


def sample_tensor_normal(params, rng, size=None):
    """Draw from the tensor normal law mean + [[Z; L_1, ..., L_M]].

    Z has i.i.d. standard normal entries and L_m is the lower Cholesky
    factor of the mode-m covariance.  ``rng`` is a seeded numpy Generator,
    so a fixed seed yields a bitwise-reproducible draw.  With ``size=n``
    the result has a leading batch axis of length n (one rng stream,
    drawn in a single block).
    """
    ls = params.cholesky_factors()
    dims = params.dims
    batched = size is not None
    shape = ((size,) + dims) if batched else dims
    z = rng.standard_normal(shape)
    off = 1 if batched else 0
    for m, l in enumerate(ls):
        z = np.moveaxis(np.tensordot(l, z, axes=(1, m + off)), 0, m + off)
    return params.mean + z
