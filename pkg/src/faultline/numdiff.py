"""Least-norm numerical differentiation weights on scattered stencils.

Given a stencil of neighbors around a center z and a linear differential
operator D of order k, find weights w minimizing the distance-weighted norm

    sum_j w_j^2 ||x_j - z||^(2 mu)

subject to polynomial exactness: the formula sum_j w_j p(x_j) + w_c p(z)
reproduces Dp(z) for every monomial p of total degree < q.  Monomials are
centered at z, so only the constant couples to the center; its constraint is
absorbed by the implicit center weight w_c = D[1](z) - sum_j w_j, keeping the
minimization strictly convex.

The solve uses the reduced normal equations of the least-norm problem: with
W = diag(d^(2 mu)) and constraint matrix P, solve (P W^-1 P^T) lam = rhs and
set w = W^-1 P^T lam.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .geometry import Stencil

__all__ = [
    "DX",
    "DY",
    "DiffOperator",
    "FormulaConfig",
    "GradientWeights",
    "SingularConstraintsError",
    "StencilWeights",
    "exactness_residuals",
    "gradient_weights",
    "growth_factor",
    "monomial_exponents",
    "scale_stencil",
    "solve_weights",
]

# rank deficiency: pivot smaller than this fraction of the largest pivot
PIVOT_RTOL = 1e-12


class SingularConstraintsError(ValueError):
    """Exactness constraints are rank-deficient on this stencil (not
    unisolvent); the caller may enlarge the stencil and retry."""


@dataclass(frozen=True)
class DiffOperator:
    """Linear differential operator D = sum over multi-indices a of
    terms[a] * d^a, of total order `order`."""

    order: int
    terms: dict[tuple[int, int], float]

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("operator order must be >= 1")
        if any(a + b > self.order for a, b in self.terms):
            raise ValueError("term exceeds the declared operator order")
        if not any(a + b == self.order and c != 0.0 for (a, b), c in self.terms.items()):
            raise ValueError("no nonzero term of the declared order")


DX = DiffOperator(order=1, terms={(1, 0): 1.0})
DY = DiffOperator(order=1, terms={(0, 1): 1.0})


@dataclass(frozen=True)
class FormulaConfig:
    """exactness: reproduce polynomials of total degree < exactness;
    weight_exponent: the exponent mu in the minimized norm."""

    exactness: int = 2
    weight_exponent: float = 1.0

    def __post_init__(self):
        if self.exactness < 2:
            raise ValueError("exactness must be >= 2")
        if not self.weight_exponent > 0.0:
            raise ValueError("weight_exponent must be > 0")


@dataclass
class StencilWeights:
    """One scalar formula: per-neighbor weights plus the implicit center
    weight and the achieved value of the minimized norm."""

    weights: np.ndarray
    center_weight: float
    seminorm: float
    operator_order: int


@dataclass
class GradientWeights:
    dx: StencilWeights
    dy: StencilWeights

    @property
    def matrix(self) -> np.ndarray:
        """Per-neighbor vector weights, shape (k, 2)."""
        return np.column_stack([self.dx.weights, self.dy.weights])

    @property
    def center(self) -> np.ndarray:
        return np.array([self.dx.center_weight, self.dy.center_weight])


def monomial_exponents(max_degree: int) -> list[tuple[int, int]]:
    """Exponent pairs of total degree 1..max_degree, degree-major order."""
    return [(a, d - a) for d in range(1, max_degree + 1) for a in range(d, -1, -1)]


def _constraint_system(stencil: Stencil, op: DiffOperator, cfg: FormulaConfig):
    exps = monomial_exponents(cfg.exactness - 1)
    ox, oy = stencil.offsets[:, 0], stencil.offsets[:, 1]
    P = np.array([ox**a * oy**b for a, b in exps])
    rhs = np.array(
        [op.terms.get(e, 0.0) * math.factorial(e[0]) * math.factorial(e[1]) for e in exps]
    )
    return exps, P, rhs


def solve_weights(
    stencil: Stencil, op: DiffOperator, cfg: FormulaConfig = FormulaConfig()
) -> StencilWeights:
    """Minimize sum w_j^2 d_j^(2 mu) under the exactness constraints.

    Raises SingularConstraintsError when the stencil is not unisolvent for
    the constraint space (rank-deficient P), detected by a relative pivot
    threshold in the dense factorization.
    """
    if cfg.exactness <= op.order:
        raise ValueError("exactness must exceed the operator order")
    _, P, rhs = _constraint_system(stencil, op, cfg)
    if len(stencil.offsets) < len(P):
        raise SingularConstraintsError(
            f"{len(stencil.offsets)} neighbors cannot span {len(P)} constraints"
        )
    wdiag = stencil.distances ** (2.0 * cfg.weight_exponent)
    Pw = P / wdiag  # P W^-1, columns scaled
    G = Pw @ P.T
    with warnings.catch_warnings():
        # an exactly singular G is caught by the pivot check below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(G, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.max() == 0.0 or pivots.min() < PIVOT_RTOL * pivots.max():
        raise SingularConstraintsError("rank-deficient exactness constraints")
    lam = lu_solve((lu, piv), rhs, check_finite=False)
    w = Pw.T @ lam
    center = op.terms.get((0, 0), 0.0) - float(w.sum())
    seminorm = float(np.sqrt(np.sum(w * w * wdiag)))
    return StencilWeights(w, center, seminorm, op.order)


def gradient_weights(stencil: Stencil, cfg: FormulaConfig = FormulaConfig()) -> GradientWeights:
    """Vector formula for the gradient: independent solves for d/dx and d/dy."""
    return GradientWeights(solve_weights(stencil, DX, cfg), solve_weights(stencil, DY, cfg))


def scale_stencil(stencil: Stencil, h: float, translation=(0.0, 0.0)) -> Stencil:
    """Stencil for the sample mapped by x_j -> z + v + h (x_j - z).

    Offsets are center-relative, so the translation v drops out and only the
    scale h enters; it is accepted to make the mapping explicit at call sites.
    """
    if not h > 0.0:
        raise ValueError("scale must be > 0")
    return Stencil(
        stencil.center_index,
        stencil.neighbor_indices.copy(),
        stencil.offsets * h,
        stencil.distances * h,
        stencil.radius * h,
    )


def growth_factor(stencil: Stencil, weights: StencilWeights, exponent: float) -> float:
    """Scale-invariant constant of the error bound:
    radius^(k - exponent) * sum_j |w_j| d_j^exponent, exponent in (k, q]."""
    if not exponent > weights.operator_order:
        raise ValueError("exponent must exceed the operator order")
    s = float(np.sum(np.abs(weights.weights) * stencil.distances**exponent))
    return stencil.radius ** (weights.operator_order - exponent) * s


def exactness_residuals(
    stencil: Stencil, op: DiffOperator, cfg: FormulaConfig, weights: StencilWeights
) -> np.ndarray:
    """Scaled constraint defects, one per monomial of total degree < exactness.

    Entry for monomial p is |sum_j w_j p(x_j) + w_c p(z) - Dp(z)| divided by
    max(1, sum_j |w_j p(x_j)| + |w_c p(z)| + |Dp(z)|), a backward-style
    relative residual.  The degree-0 entry exercises the center weight
    (centered monomials vanish at z for degree >= 1).
    """
    exps, P, rhs = _constraint_system(stencil, op, cfg)
    rows = np.vstack([np.ones(len(stencil.offsets)), P])
    targets = np.concatenate([[op.terms.get((0, 0), 0.0)], rhs])
    at_center = np.zeros(len(targets))
    at_center[0] = 1.0
    lhs = rows @ weights.weights + weights.center_weight * at_center
    scale = (
        np.abs(rows) @ np.abs(weights.weights)
        + abs(weights.center_weight) * at_center
        + np.abs(targets)
    )
    return np.abs(lhs - targets) / np.maximum(1.0, scale)
