"""Point-cloud storage, nearest-neighbor queries, and stencil assembly.

Sites are rows of an (n, 2) float array with one function value per site.
Everything downstream builds on the two operations here: k-nearest-neighbor
queries and local stencil assembly around a center site.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "DEFAULT_STENCIL_SIZE",
    "DuplicateSiteError",
    "PointCloud",
    "SpatialIndex",
    "Stencil",
    "build_index",
    "build_stencil",
    "median_nn_spacing",
]

DEFAULT_STENCIL_SIZE = 6


class DuplicateSiteError(ValueError):
    """Identical sites in one cloud; carries the offending row pairs."""

    def __init__(self, pairs: list[tuple[int, int]]):
        self.pairs = pairs
        shown = ", ".join(f"{a} == {b}" for a, b in pairs[:20])
        extra = "" if len(pairs) <= 20 else f" (+{len(pairs) - 20} more)"
        super().__init__(f"duplicate sites at rows: {shown}{extra}")


def _duplicate_rows(xy: np.ndarray) -> list[tuple[int, int]]:
    order = np.lexsort((xy[:, 1], xy[:, 0]))
    same = np.all(xy[order[1:]] == xy[order[:-1]], axis=1)
    return [tuple(sorted((int(order[i]), int(order[i + 1])))) for i in np.flatnonzero(same)]


@dataclass
class PointCloud:
    """Scattered sites with one function value attached to each."""

    xy: np.ndarray       # (n, 2)
    values: np.ndarray   # (n,)

    @classmethod
    def from_arrays(cls, xy, values) -> PointCloud:
        """Validate and build a cloud; rejects NaN/Inf rows and duplicate sites."""
        xy = np.ascontiguousarray(np.asarray(xy, dtype=float))
        values = np.asarray(values, dtype=float).ravel()
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ValueError(f"sites must have shape (n, 2), got {xy.shape}")
        if len(xy) != len(values):
            raise ValueError(f"{len(xy)} sites but {len(values)} values")
        if len(xy) == 0:
            raise ValueError("cloud needs at least one site")
        bad = np.flatnonzero(~(np.isfinite(xy).all(axis=1) & np.isfinite(values)))
        if bad.size:
            raise ValueError(f"non-finite coordinates or values at rows {bad.tolist()}")
        dup = _duplicate_rows(xy)
        if dup:
            raise DuplicateSiteError(dup)
        return cls(xy, values)

    def __len__(self) -> int:
        return len(self.xy)

    def bounds(self) -> tuple[float, float, float, float]:
        """Axis-aligned bounding rectangle (xmin, xmax, ymin, ymax)."""
        return (
            float(self.xy[:, 0].min()),
            float(self.xy[:, 0].max()),
            float(self.xy[:, 1].min()),
            float(self.xy[:, 1].max()),
        )


class SpatialIndex:
    """k-NN structure over a cloud's sites.

    Immutable after construction and safe for concurrent read queries.
    """

    def __init__(self, cloud: PointCloud):
        self.xy = cloud.xy
        self.tree = cKDTree(cloud.xy)

    def query(self, point: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Distances and site indices of the k sites nearest to `point`,
        sorted by nondecreasing distance, ties by lower index.

        Distances are recomputed with np.hypot so one distance definition is
        used everywhere (the tree's internal metric differs in the last ulp).
        """
        point = np.asarray(point, dtype=float)
        _, idx = self.tree.query(point, k=k)
        idx = np.atleast_1d(idx)
        dist = np.hypot(self.xy[idx, 0] - point[0], self.xy[idx, 1] - point[1])
        order = np.lexsort((idx, dist))
        return dist[order], idx[order]


def build_index(cloud: PointCloud) -> SpatialIndex:
    return SpatialIndex(cloud)


@dataclass
class Stencil:
    """A center site plus its local sample: neighbor ids, center-relative
    offsets, distances, and the stencil radius (the largest distance)."""

    center_index: int
    neighbor_indices: np.ndarray  # (k,) int
    offsets: np.ndarray           # (k, 2), neighbor minus center
    distances: np.ndarray         # (k,) all > 0
    radius: float

    @classmethod
    def from_offsets(cls, offsets, center_index: int = -1) -> Stencil:
        """Synthetic stencil given only center-relative offsets (tests, demos)."""
        offsets = np.asarray(offsets, dtype=float)
        d = np.hypot(offsets[:, 0], offsets[:, 1])
        if np.any(d <= 0.0):
            raise ValueError("offsets must be nonzero")
        return cls(center_index, np.arange(len(offsets)), offsets, d, float(d.max()))


def build_stencil(
    cloud: PointCloud,
    index: SpatialIndex,
    center_index: int,
    n_neighbors: int = DEFAULT_STENCIL_SIZE,
) -> Stencil:
    """The n_neighbors sites nearest to the center, excluding the center itself.

    Distance ties are broken by lower site index.  The fast path queries the
    index with a small margin; if a tie straddles the cut it falls back to an
    exhaustive scan so the tie rule holds exactly.
    """
    n = len(cloud)
    if n_neighbors < 1:
        raise ValueError("n_neighbors must be positive")
    if n_neighbors >= n:
        raise ValueError(f"cloud too small: {n} sites, need > {n_neighbors}")
    center = cloud.xy[center_index]

    k = min(n, n_neighbors + 2)
    dist, idx = index.query(center, k)
    keep = idx != center_index
    dist, idx = dist[keep], idx[keep]
    order = np.lexsort((idx, dist))
    dist, idx = dist[order], idx[order]
    boundary_tie = len(idx) > n_neighbors and dist[n_neighbors] == dist[n_neighbors - 1]
    if len(idx) < n_neighbors or boundary_tie:
        d_all = np.hypot(cloud.xy[:, 0] - center[0], cloud.xy[:, 1] - center[1])
        d_all[center_index] = np.inf
        idx = np.lexsort((np.arange(n), d_all))[:n_neighbors]
        dist = d_all[idx]
    else:
        dist, idx = dist[:n_neighbors], idx[:n_neighbors]

    offsets = cloud.xy[idx] - center
    return Stencil(int(center_index), idx, offsets, dist, float(dist[-1]))


def median_nn_spacing(cloud: PointCloud, index: SpatialIndex | None = None) -> float:
    """Median distance from a site to its nearest other site."""
    if len(cloud) < 2:
        raise ValueError("spacing needs at least two sites")
    index = index if index is not None else build_index(cloud)
    _, idx = index.tree.query(cloud.xy, k=2)
    nearest = cloud.xy[idx[:, 1]]
    return float(np.median(np.hypot(*(nearest - cloud.xy).T)))
