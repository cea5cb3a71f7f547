"""Sparse discriminant analysis for high-dimensional vector and tensor data.

Six penalized classifiers built on a common core: a lasso least-squares
path for binary problems (``dsda``), the affine-constrained and
optimal-scoring paths recovered from it (``road``, ``sos``), a
rank-transform semiparametric variant (``sesda``), group-lasso multiclass
fitting (``msda``) and a Kronecker-covariance tensor classifier
(``catch``), plus covariate adjustment, lambda-path generation,
cross-validation, data simulators and file I/O.
"""

from .binary import BinaryPath, dsda, dsda_all, road, sos
from .catch import (CatchFit, KroneckerCov, catch, catch_matrix,
                    estimate_kron_cov)
from .covariates import Adjustment, CovariateError, adjten, adjvec
from .data import LabeledDataset
from .io import (DatasetFormatError, read_dataset, read_model, write_dataset,
                 write_model)
from .lda import (ClassStats, DiscriminantRule, classify, estimate_stats,
                  postfit_univariate)
from .msda import MsdaFit, cd_modified, cd_original, msda
from .sesda import MonotoneTransform, SesdaFit, fit_transform, sesda, \
    winsorized_ecdf
from .simulate import (FScreenResult, TensorData, TensorSimSpec, VectorData,
                       VectorSimSpec, f_screen, sim_binary_vector,
                       sim_tensor_cov)
from .solvers import (LassoProblem, SolverConfig, group_soft_threshold,
                      lasso_cd, soft_threshold)
from .tensor import (DenseTensor, DimensionError, FactorizationError,
                     TensorNormalParams, inner, mode_product, refold,
                     sample_tensor_normal, tucker_transform, unfold, vec)
from .tuning import CvReport, LambdaGrid, gen_lambda, kfold_cv

__version__ = "0.1.0"

__all__ = [
    "BinaryPath", "dsda", "dsda_all", "road", "sos",
    "CatchFit", "KroneckerCov", "catch", "catch_matrix", "estimate_kron_cov",
    "Adjustment", "CovariateError", "adjten", "adjvec",
    "LabeledDataset",
    "DatasetFormatError", "read_dataset", "read_model", "write_dataset",
    "write_model",
    "ClassStats", "DiscriminantRule", "classify", "estimate_stats",
    "postfit_univariate",
    "MsdaFit", "cd_modified", "cd_original", "msda",
    "MonotoneTransform", "SesdaFit", "fit_transform", "sesda",
    "winsorized_ecdf",
    "FScreenResult", "TensorData", "TensorSimSpec", "VectorData",
    "VectorSimSpec", "f_screen", "sim_binary_vector", "sim_tensor_cov",
    "LassoProblem", "SolverConfig", "group_soft_threshold", "lasso_cd",
    "soft_threshold",
    "DenseTensor", "DimensionError", "FactorizationError",
    "TensorNormalParams", "inner", "mode_product", "refold",
    "sample_tensor_normal", "tucker_transform", "unfold", "vec",
    "CvReport", "LambdaGrid", "gen_lambda", "kfold_cv",
    "__version__",
]
