"""Synthetic benchmark scene: piecewise surface, exact faults, samplers.

The surface on the unit square has three smooth branches separated by
two curves of discontinuity: a quarter circle of radius 0.4 around the
origin (a crease-plus-step against the surrounding tilted plane) and a
vertical sinusoid wall of constant height 0.2.  Both curves admit
closed-form discretizations, which makes the scene a ground-truth
benchmark for the whole detection pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PointCloud

DISC_RADIUS = 0.4
WALL_BASE_X = 0.7
WALL_AMPLITUDE = 0.1
WALL_STEP = 0.2

GENERATOR_NAME = "numpy.random.default_rng (PCG64)"

FAULT_NAMES = ("circle", "sinusoid")

_REJECTION_BATCH = 4096


def _as_points(points: np.ndarray) -> tuple[np.ndarray, bool]:
    arr = np.asarray(points, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be (2,) or (n, 2)")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("points must lie in the unit square [0,1]^2")
    return arr, single


def branch_masks(points: np.ndarray) -> np.ndarray:
    """Membership of each point in the three surface branches.

    The disc predicate is evaluated in radius form, hypot(x, y) <= 0.4,
    which is exact at the axis points where the squared form rounds the
    wrong way.  Masks are mutually exclusive and cover the square.
    """
    arr, _ = _as_points(points)
    x, y = arr[:, 0], arr[:, 1]
    disc = np.hypot(x, y) <= DISC_RADIUS
    left = ~disc & (x <= WALL_BASE_X + WALL_AMPLITUDE * np.sin(2.0 * np.pi * y))
    right = ~disc & ~left
    return np.column_stack([disc, left, right])


def eval_surface(points: np.ndarray) -> np.ndarray | float:
    """Surface value(s) at points of the unit square."""
    arr, single = _as_points(points)
    masks = branch_masks(arr)
    x, y = arr[:, 0], arr[:, 1]
    ramp = x - 0.4 - WALL_AMPLITUDE * np.sin(2.0 * np.pi * y)
    values = np.where(masks[:, 1], ramp, ramp - WALL_STEP)
    disc = masks[:, 0]
    if disc.any():
        xd, yd = x[disc], y[disc]
        values[disc] = (
            np.sqrt(4.0 - xd * xd - yd * yd) - 2.0 * np.sqrt(0.99) + 0.1
        )
    return float(values[0]) if single else values


def discretize_exact_fault(fault_id: int, count: int = 500) -> np.ndarray:
    """Points uniformly spaced in parameter along one exact fault curve.

    Fault 0 is the quarter circle of radius 0.4 in the first quadrant,
    fault 1 the sinusoid x = 0.7 + 0.1 sin(2 pi y) for y in [0, 1].
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    if fault_id == 0:
        theta = np.linspace(0.0, np.pi / 2.0, count)
        return DISC_RADIUS * np.column_stack([np.cos(theta), np.sin(theta)])
    if fault_id == 1:
        y = np.linspace(0.0, 1.0, count)
        x = WALL_BASE_X + WALL_AMPLITUDE * np.sin(2.0 * np.pi * y)
        return np.column_stack([x, y])
    raise ValueError(f"unknown fault id {fault_id}; have {len(FAULT_NAMES)} faults")


def exact_faults(count: int = 500) -> list[np.ndarray]:
    return [discretize_exact_fault(i, count) for i in range(len(FAULT_NAMES))]


@dataclass(frozen=True)
class SamplerSpec:
    """How to draw a point cloud from the test surface.

    ``variable`` density follows intercept + slope * x via rejection
    sampling, sparse on the left and dense on the right of the square.
    """

    kind: str
    count: int
    seed: int
    density_intercept: float = 0.25
    density_slope: float = 0.75

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "variable"):
            raise ValueError("kind must be 'uniform' or 'variable'")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.density_intercept <= 0.0:
            raise ValueError("density_intercept must be positive")
        if self.density_intercept + self.density_slope <= 0.0:
            raise ValueError("density must stay positive on [0, 1]")


def _rejection_sample(spec: SamplerSpec, rng: np.random.Generator) -> np.ndarray:
    ceiling = max(
        spec.density_intercept, spec.density_intercept + spec.density_slope
    )
    chunks: list[np.ndarray] = []
    have = 0
    while have < spec.count:
        cand = rng.random((_REJECTION_BATCH, 2))
        u = rng.random(_REJECTION_BATCH)
        density = spec.density_intercept + spec.density_slope * cand[:, 0]
        kept = cand[u * ceiling < density]
        chunks.append(kept)
        have += len(kept)
    return np.vstack(chunks)[: spec.count]


def sample(spec: SamplerSpec) -> PointCloud:
    """Draw a cloud for a sampler; same seed, same cloud, bit for bit."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "uniform":
        xy = rng.random((spec.count, 2))
    else:
        xy = _rejection_sample(spec, rng)
    return PointCloud.from_arrays(xy, eval_surface(xy))
