"""Band thinning: pull detected sites onto the curve they surround.

Detection returns a band of sites roughly one stencil radius wide on
either side of a discontinuity.  Each narrowing pass fits a quadratic
through every point's neighborhood in a local frame aligned with the
band and moves the point onto the fitted curve; a few passes collapse
the band to a near one-dimensional point set.  The remaining helpers
split that set into per-curve clusters and order each cluster into a
walkable polyline.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

DEFAULT_KNN = 10
DEFAULT_ITERATIONS = 3
MIN_CLUSTER_SIZE = 5


@dataclass(frozen=True)
class NarrowConfig:
    knn: int = DEFAULT_KNN
    iterations: int = DEFAULT_ITERATIONS

    def __post_init__(self) -> None:
        if self.knn < 2:
            raise ValueError("knn must be at least 2")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")


@dataclass(frozen=True)
class NarrowedPoints:
    """Thinned positions with unit tangents and optional site provenance."""

    xy: np.ndarray
    tangents: np.ndarray
    source_indices: np.ndarray | None = None


def _principal_frame(local: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    moment = local.T @ local
    evals, evecs = np.linalg.eigh(moment)
    return evecs[:, 1], evecs[:, 0], float(evals[1])


def _narrow_once(pts: np.ndarray, knn: int) -> tuple[np.ndarray, np.ndarray, int]:
    n = len(pts)
    k = min(knn + 1, n)
    new_xy = pts.copy()
    tangents = np.tile(np.array([1.0, 0.0]), (n, 1))
    degenerate = 0
    if k < 2:
        return new_xy, tangents, n
    dist, idx = cKDTree(pts).query(pts, k=k)
    for i in range(n):
        nb = pts[idx[i]]
        tangent, normal, spread = _principal_frame(nb - nb.mean(axis=0))
        if k < 3 or spread <= 0.0:
            degenerate += 1
            if spread > 0.0:
                tangents[i] = tangent
            continue
        rel = nb - pts[i]
        tau = rel @ tangent
        s = rel @ normal
        design = np.column_stack([tau * tau, tau, np.ones_like(tau)])
        _, slope, offset = np.linalg.lstsq(design, s, rcond=None)[0]
        # the fitted foot may not leave the neighborhood
        move = float(np.clip(offset, -dist[i].max(), dist[i].max()))
        new_xy[i] = pts[i] + move * normal
        direction = tangent + slope * normal
        tangents[i] = direction / np.hypot(direction[0], direction[1])
    return new_xy, tangents, degenerate


def narrow(
    points: np.ndarray,
    config: NarrowConfig = NarrowConfig(),
    source_indices: np.ndarray | None = None,
) -> NarrowedPoints:
    """Run the narrowing iteration on a band of candidate points.

    All moves within one pass are computed from the same snapshot of
    positions, so the result does not depend on point order.  Points
    whose neighborhood cannot support a quadratic fit (fewer than three
    members, or zero spread) stay where they are; their count is
    reported through a warning rather than an exception because a few
    stragglers do not invalidate the rest of the band.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    tangents = np.tile(np.array([1.0, 0.0]), (len(pts), 1))
    degenerate = 0
    for _ in range(config.iterations):
        pts, tangents, degenerate = _narrow_once(pts, config.knn)
    if degenerate:
        logger.warning(
            "narrowing left %d of %d points unchanged (degenerate neighborhoods)",
            degenerate,
            len(pts),
        )
    src = None if source_indices is None else np.asarray(source_indices)
    return NarrowedPoints(xy=pts, tangents=tangents, source_indices=src)


def cluster(
    points: np.ndarray, link_radius: float, min_size: int = MIN_CLUSTER_SIZE
) -> list[np.ndarray]:
    """Split points into connected components of the link graph.

    Two points are linked when their distance is at most
    ``link_radius``.  Components smaller than ``min_size`` are dropped
    as noise.  Returned index arrays are sorted, and the list is
    ordered by each component's smallest member.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 0:
        return []
    pairs = cKDTree(pts).query_pairs(link_radius, output_type="ndarray")
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
    )
    count, labels = connected_components(graph, directed=False)
    groups = [np.flatnonzero(labels == c) for c in range(count)]
    groups = [g for g in groups if len(g) >= min_size]
    groups.sort(key=lambda g: int(g[0]))
    return groups


def _walk_direction(pts: np.ndarray, visited: list[int]) -> np.ndarray:
    recent = pts[visited[-min(5, len(visited)):]]
    tangent, _, spread = _principal_frame(recent - recent.mean(axis=0))
    if spread <= 0.0:
        tangent = np.array([1.0, 0.0])
    step = pts[visited[-1]] - pts[visited[-2]]
    if tangent @ step < 0.0:
        tangent = -tangent
    return tangent


def order_along_curve(points: np.ndarray) -> np.ndarray:
    """Order a cluster into a chain from one end to the other.

    The start is the point whose neighbors lie most one-sidedly along
    its local principal direction, which singles out curve endpoints.
    The walk then repeatedly moves to the nearest unvisited point with
    a positive projection onto the running tangent, doubling its search
    radius when the immediate neighborhood is exhausted, and stops once
    no forward point remains anywhere in the cluster.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n <= 1:
        return np.arange(n)
    tree = cKDTree(pts)
    k = min(10, n - 1)
    _, idx = tree.query(pts, k=k + 1)
    spacing = float(np.median(np.hypot(*(pts - pts[idx[:, 1]]).T)))

    best_score, start, start_dir = -1.0, 0, np.array([1.0, 0.0])
    for i in range(n):
        nb = pts[idx[i]]
        tangent, _, spread = _principal_frame(nb - nb.mean(axis=0))
        if spread <= 0.0:
            continue
        proj = (nb[1:] - pts[i]) @ tangent
        total = np.abs(proj).sum()
        if total <= 0.0:
            continue
        score = abs(proj.sum()) / total
        if score > best_score:
            sign = 1.0 if proj.sum() >= 0.0 else -1.0
            best_score, start, start_dir = score, i, sign * tangent

    base = 3.0 * spacing if spacing > 0.0 else 1.0
    span = pts.max(axis=0) - pts.min(axis=0)
    diameter = max(float(np.hypot(span[0], span[1])), base)

    def walk(direction: np.ndarray, unvisited: np.ndarray) -> list[int]:
        visited = [start]
        unvisited[start] = False
        while len(visited) < n:
            here = pts[visited[-1]]
            radius = base
            chosen = -1
            while radius <= 2.0 * diameter:
                near = np.array(tree.query_ball_point(here, radius), dtype=int)
                near = near[unvisited[near]]
                if len(near):
                    ahead = (pts[near] - here) @ direction > 0.0
                    near = near[ahead]
                if len(near):
                    d = np.hypot(*(pts[near] - here).T)
                    chosen = int(near[np.lexsort((near, d))[0]])
                    break
                radius *= 2.0
            if chosen < 0:
                break
            visited.append(chosen)
            unvisited[chosen] = False
            direction = _walk_direction(pts, visited)
        return visited

    # a start that is not a true endpoint strands one side of the curve,
    # so walk the remainder from the same anchor in the opposite direction
    unvisited = np.ones(n, dtype=bool)
    forward = walk(start_dir, unvisited)
    if len(forward) < n:
        unvisited[start] = True
        backward = walk(-start_dir, unvisited)
        forward = backward[:0:-1] + forward
    return np.array(forward)


def _segments_cross(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> bool:
    def area(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
        return float((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))

    def on_segment(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> bool:
        return (
            min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
        )

    d1, d2 = area(a, b, c), area(a, b, d)
    d3, d4 = area(c, d, a), area(c, d, b)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2 and d3 != d4:
        return True
    for p, q, r, s in ((a, b, c, d1), (a, b, d, d2), (c, d, a, d3), (c, d, b, d4)):
        if s == 0.0 and on_segment(p, q, r):
            return True
    return False


def polyline_self_intersects(points: np.ndarray) -> bool:
    """True when any two non-adjacent polyline segments touch or cross."""
    pts = np.asarray(points, dtype=float)
    m = len(pts) - 1
    for i in range(m):
        for j in range(i + 2, m):
            if _segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1]):
                return True
    return False
