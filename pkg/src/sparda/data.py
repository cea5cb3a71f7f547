"""Labeled dataset container shared by the simulators, file I/O and CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["LabeledDataset"]


@dataclass
class LabeledDataset:
    """n observations of (vector or tensor predictor, optional covariates,
    class label)."""

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y)
        if self.u is not None:
            self.u = np.asarray(self.u, dtype=float)
            if self.u.ndim == 1:
                self.u = self.u[:, None]
            if self.u.shape[0] != self.x.shape[0]:
                raise ValueError("covariate rows do not match predictor rows")
        if len(self.y) != self.x.shape[0]:
            raise ValueError("label count does not match predictor rows")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def dims(self):
        return self.x.shape[1:]

    @property
    def is_tensor(self):
        return self.x.ndim > 2
