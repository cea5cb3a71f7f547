"""Dataset and model files.

Datasets are CSV with a JSON sidecar.  The CSV has a header row; the first
column is the class label and the remaining columns are the vectorized
predictor entries (column-major order for tensors) followed by any
covariate columns.  The sidecar, at ``<path>.json``, records
``{"dims": [...], "label_col": 0, "covariate_cols": [...]}``; a vector
dataset without covariates can be read without one.  Floats are written
with 17 significant digits so round trips are bit-exact.

Models are a single JSON document tagged by method; every fitted path
class knows how to rebuild itself from its dictionary form.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .data import LabeledDataset
from .tensor import unvec_batch, vec_batch

__all__ = [
    "DatasetFormatError",
    "write_dataset",
    "read_dataset",
    "write_model",
    "read_model",
]


class DatasetFormatError(ValueError):
    """Malformed dataset file; the message carries file and line context."""


def _sidecar_path(path):
    return str(path) + ".json"


def _parse_label(s):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            continue
    return s


def write_dataset(path, data):
    """Write a :class:`LabeledDataset` as CSV plus JSON sidecar."""
    x = data.x
    n = data.n
    dims = list(data.dims)
    flat = vec_batch(x) if data.is_tensor else np.asarray(x, dtype=float)
    p = flat.shape[1]
    q = 0 if data.u is None else data.u.shape[1]
    header = ["y"] + [f"x{j + 1}" for j in range(p)] + [f"u{j + 1}" for j in range(q)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(n):
            row = [str(data.y[i])]
            row.extend(f"{v:.17g}" for v in flat[i])
            if q:
                row.extend(f"{v:.17g}" for v in data.u[i])
            writer.writerow(row)
    sidecar = {
        "dims": dims,
        "label_col": 0,
        "covariate_cols": list(range(1 + p, 1 + p + q)),
    }
    with open(_sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh)
        fh.write("\n")


def read_dataset(path):
    """Read a CSV (+ sidecar) dataset back into a :class:`LabeledDataset`."""
    sidecar = None
    sc_path = _sidecar_path(path)
    if os.path.exists(sc_path):
        with open(sc_path) as fh:
            try:
                sidecar = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{sc_path}: invalid JSON sidecar: {exc}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file")
        width = len(header)
        if width < 2:
            raise DatasetFormatError(f"{path}: line 1: need a label and data columns")
        label_col = 0 if sidecar is None else int(sidecar.get("label_col", 0))
        cov_cols = [] if sidecar is None else [int(c) for c in sidecar.get("covariate_cols", [])]
        feat_cols = [j for j in range(width) if j != label_col and j not in cov_cols]
        labels = []
        feats = []
        covs = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected {width} fields, got {len(row)}"
                )
            labels.append(_parse_label(row[label_col]))
            try:
                feats.append([float(row[j]) for j in feat_cols])
                if cov_cols:
                    covs.append([float(row[j]) for j in cov_cols])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: {exc}")
    if not feats:
        raise DatasetFormatError(f"{path}: no data rows")
    flat = np.asarray(feats, dtype=float)
    u = np.asarray(covs, dtype=float) if cov_cols else None
    dims = [flat.shape[1]] if sidecar is None else [int(d) for d in sidecar["dims"]]
    if int(np.prod(dims)) != flat.shape[1]:
        raise DatasetFormatError(
            f"{path}: sidecar dims {dims} give {int(np.prod(dims))} entries "
            f"but rows have {flat.shape[1]}"
        )
    x = unvec_batch(flat, dims) if len(dims) > 1 else flat
    return LabeledDataset(x, np.asarray(labels), u)


def _fit_class(method):
    if method in ("dsda", "road", "sos"):
        from .binary import BinaryPath

        return BinaryPath
    if method == "sesda":
        from .sesda import SesdaFit

        return SesdaFit
    if method == "msda":
        from .msda import MsdaFit

        return MsdaFit
    if method == "catch":
        from .catch import CatchFit

        return CatchFit
    raise ValueError(f"unknown model method {method!r}")


def write_model(path, fit):
    """Serialize a fitted path to JSON."""
    with open(path, "w") as fh:
        json.dump(fit.to_dict(), fh)
        fh.write("\n")


def read_model(path):
    """Rebuild a fitted path from its JSON file."""
    with open(path) as fh:
        d = json.load(fh)
    if "method" not in d:
        raise DatasetFormatError(f"{path}: missing method tag")
    return _fit_class(d["method"]).from_dict(d)
