"""faultline: detection and spline reconstruction of fault curves in
scattered bivariate data."""

from faultline.curvefit import FittedCurve, TooFewPointsError, fit_curve
from faultline.detector import (
    DetectorConfig,
    FaultCandidateSet,
    IndicatorField,
    detect,
    indicator_at,
)
from faultline.geometry import (
    DuplicateSiteError,
    PointCloud,
    SpatialIndex,
    Stencil,
    build_index,
    build_stencil,
    median_nn_spacing,
)
from faultline.io import IngestError, read_points, write_points
from faultline.metrics import (
    FaultMatching,
    FaultScore,
    hausdorff,
    match_faults,
    max_min_distance,
    min_distances,
)
from faultline.narrower import (
    NarrowConfig,
    NarrowedPoints,
    cluster,
    narrow,
    order_along_curve,
)
from faultline.numdiff import (
    DX,
    DY,
    DiffOperator,
    FormulaConfig,
    GradientWeights,
    SingularConstraintsError,
    gradient_weights,
    scale_stencil,
)
from faultline.pipeline import RunConfig, RunReport, run_pipeline
from faultline.synthdata import SamplerSpec, eval_surface, exact_faults, sample

__version__ = "0.1.0"

__all__ = [
    "DX",
    "DY",
    "DetectorConfig",
    "DiffOperator",
    "DuplicateSiteError",
    "FaultCandidateSet",
    "FaultMatching",
    "FaultScore",
    "FittedCurve",
    "FormulaConfig",
    "GradientWeights",
    "IndicatorField",
    "IngestError",
    "NarrowConfig",
    "NarrowedPoints",
    "PointCloud",
    "RunConfig",
    "RunReport",
    "SamplerSpec",
    "SingularConstraintsError",
    "SpatialIndex",
    "Stencil",
    "TooFewPointsError",
    "build_index",
    "build_stencil",
    "cluster",
    "detect",
    "eval_surface",
    "exact_faults",
    "fit_curve",
    "gradient_weights",
    "hausdorff",
    "indicator_at",
    "match_faults",
    "max_min_distance",
    "median_nn_spacing",
    "min_distances",
    "narrow",
    "order_along_curve",
    "read_points",
    "run_pipeline",
    "sample",
    "scale_stencil",
    "write_points",
]
