"""Smooth curve reconstruction through ordered points.

An ordered chain of narrowed points is turned into a twice
continuously differentiable parametric curve: a natural cubic spline
in both coordinates over chord-length knots.  Chord length keeps the
parameterization close to arc length, so uniform parameter sampling
yields near-uniform spacing along the curve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline


class TooFewPointsError(ValueError):
    """Raised when fewer than two points are given to fit."""


@dataclass(frozen=True)
class FittedCurve:
    """Natural cubic spline through ordered points, chord-length knots."""

    spline: CubicSpline
    knots: np.ndarray

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(self.spline(t))

    def sample(self, count: int) -> np.ndarray:
        """Evaluate at ``count`` uniformly spaced parameters, ends included."""
        if count < 2:
            raise ValueError("count must be at least 2")
        return self.evaluate(np.linspace(self.knots[0], self.knots[-1], count))


def fit_curve(points: np.ndarray) -> FittedCurve:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    if len(pts) < 2:
        raise TooFewPointsError("need at least two points to fit a curve")
    chords = np.hypot(*np.diff(pts, axis=0).T)
    if np.any(chords == 0.0):
        raise ValueError("consecutive duplicate points: deduplicate before fitting")
    knots = np.concatenate([[0.0], np.cumsum(chords)])
    spline = CubicSpline(knots, pts, axis=0, bc_type="natural")
    return FittedCurve(spline=spline, knots=knots)
