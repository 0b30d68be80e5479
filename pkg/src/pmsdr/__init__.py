"""Principal-machine sufficient dimension reduction.

Linear, kernel and realtime (streamed) estimators of the central subspace,
built on per-slice convex machines solved by coordinatewise gradient
descent, with BIC-type structural-dimension selection.  A FastAPI service
(:mod:`pmsdr.service`) exposes the estimators over HTTP and the ``pmsdr``
CLI drives that service.
"""

from .errors import (
    DegenerateBasisError,
    DegenerateSliceError,
    DivergenceError,
    ExpressionError,
    InputError,
    NumericError,
    PmsdrError,
    SingularMatrixError,
)
from .linalg import (
    EigenDecomposition,
    center_columns,
    projection_distance,
    sample_cov,
    solve_spd,
    sym_eigen,
)
from .losses import BUILTIN_FAMILIES, LossSpec, loss_derivative, loss_spec, loss_value
from .slicing import SliceScheme, make_slices, pseudo_labels
from .solver import SliceSolution, SolveConfig, gradient, objective, solve_slice
from .linear import DimensionEstimate, PmFit, bic_dimension, fit_linear, project
from .kernel import (
    KernelBasis,
    NpmFit,
    build_basis,
    feature_map,
    fit_kernel,
    median_heuristic_gamma,
    project_nonlinear,
)
from .realtime import (
    RealtimeFit,
    StreamState,
    state_from_json,
    state_to_json,
    stream_init,
    stream_result,
    stream_update,
)
from .datasets import MODELS, generate_dataset, dataset_csv_text, write_dataset_csv
from .expressions import parse_loss_expression

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_FAMILIES",
    "DegenerateBasisError",
    "DegenerateSliceError",
    "DimensionEstimate",
    "DivergenceError",
    "EigenDecomposition",
    "ExpressionError",
    "InputError",
    "KernelBasis",
    "LossSpec",
    "MODELS",
    "NpmFit",
    "NumericError",
    "PmFit",
    "PmsdrError",
    "RealtimeFit",
    "SingularMatrixError",
    "SliceScheme",
    "SliceSolution",
    "SolveConfig",
    "StreamState",
    "bic_dimension",
    "build_basis",
    "center_columns",
    "dataset_csv_text",
    "feature_map",
    "fit_kernel",
    "fit_linear",
    "generate_dataset",
    "gradient",
    "loss_derivative",
    "loss_spec",
    "loss_value",
    "make_slices",
    "median_heuristic_gamma",
    "objective",
    "parse_loss_expression",
    "project",
    "project_nonlinear",
    "projection_distance",
    "pseudo_labels",
    "sample_cov",
    "solve_slice",
    "solve_spd",
    "state_from_json",
    "state_to_json",
    "stream_init",
    "stream_result",
    "stream_update",
    "sym_eigen",
    "write_dataset_csv",
]
