"""Jump detection from the response of local gradient formulas.

A gradient formula applied to smooth samples returns roughly the local
gradient, so its magnitude stays near the Lipschitz constant of the
data.  Across a jump the formula sees a finite value difference over a
shrinking distance and its response grows like one over the stencil
radius.  The indicator normalises the response by the largest value a
unit-Lipschitz field could produce on the same stencil, which makes the
threshold scale-free: smooth sites stay at O(local slope), sites whose
stencil straddles a discontinuity blow up as sampling refines.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DEFAULT_STENCIL_SIZE,
    PointCloud,
    SpatialIndex,
    Stencil,
    build_stencil,
)
from .numdiff import (
    FormulaConfig,
    GradientWeights,
    SingularConstraintsError,
    gradient_weights,
)

DEFAULT_THETA = 0.8


@dataclass(frozen=True)
class DetectorConfig:
    """Knobs for the detection sweep."""

    stencil_size: int = DEFAULT_STENCIL_SIZE
    theta: float = DEFAULT_THETA
    formula: FormulaConfig = field(default_factory=FormulaConfig)

    def __post_init__(self) -> None:
        if self.stencil_size < 2:
            raise ValueError("stencil_size must be at least 2")
        if not self.theta > 0.0:
            raise ValueError("theta must be positive")


@dataclass(frozen=True)
class IndicatorField:
    """Per-site indicator values from one detection sweep.

    ``values[i]`` is NaN when no usable formula exists at site ``i``
    even after stencil enlargement; those sites are listed in
    ``failed_sites`` and never become candidates.
    """

    values: np.ndarray
    theta: float
    failed_sites: list[int]


@dataclass(frozen=True)
class FaultCandidateSet:
    """Sites whose indicator strictly exceeds the threshold."""

    indices: np.ndarray
    theta: float

    def __len__(self) -> int:
        return len(self.indices)


def indicator_from_values(
    weights: GradientWeights,
    distances: np.ndarray,
    neighbor_values: np.ndarray,
    center_value: float,
) -> float:
    """Indicator for one stencil given sampled values.

    Numerator: Euclidean norm of the formula response applied to the
    samples.  Denominator: Euclidean norm of the per-component worst
    case over fields with unit Lipschitz constant, sum of |w| times
    distance.  Exactness on the matching linear monomial makes each
    denominator component at least 1, so the ratio is well defined.
    """
    response = weights.matrix.T @ neighbor_values + weights.center * center_value
    absw = np.abs(weights.matrix)
    worst = np.hypot(absw[:, 0] @ distances, absw[:, 1] @ distances)
    return float(np.hypot(response[0], response[1]) / worst)


def indicator_at(cloud: PointCloud, stencil: Stencil, weights: GradientWeights) -> float:
    """Indicator at a stencil's center, reading samples from the cloud."""
    return indicator_from_values(
        weights,
        stencil.distances,
        cloud.values[stencil.neighbor_indices],
        float(cloud.values[stencil.center_index]),
    )


def _site_value(
    cloud: PointCloud, index: SpatialIndex, site: int, config: DetectorConfig
) -> float:
    n = len(cloud)
    for size in (min(config.stencil_size, n - 1), min(2 * config.stencil_size, n - 1)):
        try:
            st = build_stencil(cloud, index, site, size)
            gw = gradient_weights(st, config.formula)
        except (SingularConstraintsError, ValueError):
            continue
        return indicator_at(cloud, st, gw)
    return math.nan


def detect(
    cloud: PointCloud,
    index: SpatialIndex,
    config: DetectorConfig = DetectorConfig(),
    workers: int = 1,
) -> tuple[IndicatorField, FaultCandidateSet]:
    """Sweep every site and flag those exceeding the threshold.

    Sites whose default stencil yields a singular constraint system get
    one retry with a stencil twice the size; a second failure records
    the site in ``failed_sites`` with a NaN value instead of raising,
    so one degenerate neighborhood cannot abort a whole scene.

    With ``workers`` above one the sweep is split into contiguous
    chunks evaluated on a thread pool; results are written by site
    position, so the output is identical to the serial sweep.
    """
    n = len(cloud)
    values = np.empty(n)

    def sweep(lo: int, hi: int) -> list[int]:
        failed = []
        for i in range(lo, hi):
            values[i] = _site_value(cloud, index, i, config)
            if math.isnan(values[i]):
                failed.append(i)
        return failed

    if workers <= 1:
        failed_sites = sweep(0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(sweep, bounds[:-1], bounds[1:])
        failed_sites = [i for chunk in chunks for i in chunk]

    with np.errstate(invalid="ignore"):
        candidates = np.flatnonzero(values > config.theta)
    field_ = IndicatorField(values=values, theta=config.theta, failed_sites=failed_sites)
    return field_, FaultCandidateSet(indices=candidates, theta=config.theta)
