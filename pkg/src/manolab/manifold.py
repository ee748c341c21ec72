"""Oblique-manifold primitives and friends.

The optimizers in this package live on products of spheres: each slice
of a weight tensor along one chosen axis is kept at (or steered toward)
unit Euclidean norm.  This module provides slice normalization, tangent
projection, the axis schedule that decides which axis is active at a
given step, geodesic distances on three matrix manifolds, and Sinkhorn
row/column balancing as a point of comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import (
    EPS_DIV,
    ShapeMismatchError,
    as_tensor,
    dim_inner,
    dim_norm,
    jacobi_svd,
)

# A slice claimed to be unit-norm may deviate by at most this much.
UNIT_TOL = 1e-9

SCHEDULE_MODES = ("rotating", "static")
GEODESIC_MANIFOLDS = ("oblique", "sphere", "stiefel")


class DegenerateSliceError(ValueError):
    """A slice that must be normalized has vanishing norm."""

    def __init__(self, axis: int, index, norm: float):
        self.axis = axis
        self.index = index
        self.norm = norm
        super().__init__(
            f"slice {index} along axis {axis} has norm {norm:.3e}, "
            f"below {EPS_DIV:g}"
        )


@dataclass(frozen=True)
class ManifoldSchedule:
    """Which axis is normalized at each optimizer step.

    ``rotating`` cycles through all ``order`` axes (step t uses axis
    t mod order); ``static`` pins ``fixed_axis`` forever.
    """

    mode: str = "rotating"
    order: int = 2
    fixed_axis: int = 0

    def __post_init__(self):
        if self.mode not in SCHEDULE_MODES:
            raise ValueError(f"mode must be one of {SCHEDULE_MODES}, got {self.mode!r}")
        if self.order < 1:
            raise ValueError("order must be at least 1")
        if self.mode == "static" and not 0 <= self.fixed_axis < self.order:
            raise ValueError(
                f"fixed_axis {self.fixed_axis} out of range for order {self.order}"
            )


def rotation_axis(schedule: ManifoldSchedule, step: int) -> int:
    """Axis normalized at ``step`` under ``schedule``."""
    if step < 0:
        raise ValueError("step must be non-negative")
    if schedule.mode == "static":
        return schedule.fixed_axis
    return step % schedule.order


def oblique_normalize(a, axis: int) -> np.ndarray:
    """Scale every slice along ``axis`` to unit Euclidean norm.

    Raises DegenerateSliceError if any slice norm falls below EPS_DIV;
    callers that want a softer policy must handle that themselves.
    """
    a = as_tensor(a)
    norms = dim_norm(a, axis)
    bad = norms.values < EPS_DIV
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))[0]
        index = tuple(int(i) for i in idx) if idx.size > 1 else int(idx[0])
        raise DegenerateSliceError(axis, index, float(np.atleast_1d(norms.values)[tuple(idx)]))
    return a / norms.expand()


def tangent_project(m, theta_hat, axis: int) -> np.ndarray:
    """Project ``m`` onto the tangent space at ``theta_hat``.

    ``theta_hat`` must already have unit-norm slices along ``axis``
    (within UNIT_TOL).  The result satisfies, slice by slice,
    <projected, theta_hat> = 0.

    The subtraction is applied twice.  A single pass leaves a radial
    residue of order eps * ||m||, which is catastrophic relative to the
    tangent part whenever ``m`` is nearly radial; the second pass cuts
    the residue down to order eps times the tangent part itself.
    """
    m = as_tensor(m)
    theta_hat = as_tensor(theta_hat)
    if m.shape != theta_hat.shape:
        raise ShapeMismatchError(
            f"operand shapes {m.shape} and {theta_hat.shape} differ"
        )
    norms = dim_norm(theta_hat, axis)
    if np.any(np.abs(norms.values - 1.0) > UNIT_TOL):
        worst = float(np.max(np.abs(norms.values - 1.0)))
        raise ValueError(
            f"theta_hat slices along axis {axis} deviate from unit norm "
            f"by up to {worst:.3e} (tolerance {UNIT_TOL:g})"
        )
    projected = m - theta_hat * dim_inner(m, theta_hat, axis).expand()
    return projected - theta_hat * dim_inner(projected, theta_hat, axis).expand()


def geodesic_oblique(x, y, axis: int) -> float:
    """Geodesic distance between the slice-normalized versions of x and y.

    Each pair of corresponding unit slices contributes the arc length
    arccos(<x_j, y_j>); the total is the Euclidean norm of those arcs.
    """
    xh = oblique_normalize(x, axis)
    yh = oblique_normalize(y, axis)
    if xh.shape != yh.shape:
        raise ShapeMismatchError(f"operand shapes {xh.shape} and {yh.shape} differ")
    cos = np.clip(dim_inner(xh, yh, axis).values, -1.0, 1.0)
    arcs = np.arccos(cos)
    return float(np.sqrt(np.sum(arcs * arcs)))


def geodesic_sphere(x, y) -> float:
    """Great-circle distance between x and y on the Frobenius-norm sphere
    (whole-tensor normalization)."""
    x = as_tensor(x)
    y = as_tensor(y)
    if x.shape != y.shape:
        raise ShapeMismatchError(f"operand shapes {x.shape} and {y.shape} differ")
    nx = float(np.sqrt(np.sum(x * x)))
    ny = float(np.sqrt(np.sum(y * y)))
    if nx < EPS_DIV or ny < EPS_DIV:
        raise ValueError("sphere distance undefined for a zero tensor")
    cos = float(np.clip(np.sum(x * y) / (nx * ny), -1.0, 1.0))
    return float(np.arccos(cos))


def _polar_factor(x: np.ndarray) -> np.ndarray:
    """Nearest matrix with orthonormal columns (polar retraction)."""
    u, s, vt = jacobi_svd(x)
    if s[-1] * s[-1] < 1e-12:
        raise ValueError(
            f"rank-deficient input: smallest Gram eigenvalue {s[-1]**2:.3e} < 1e-12"
        )
    return u @ vt


def geodesic_stiefel_approx(x, y) -> float:
    """Distance between the polar retractions of x and y, measured through
    principal angles: sqrt(sum of arccos(sigma_i)^2) for the singular
    values sigma_i of Qx^T Qy.  Exact when the retracted points share a
    geodesic of the embedded metric; an approximation otherwise.
    """
    x = as_tensor(x)
    y = as_tensor(y)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("stiefel distance expects matrices")
    if x.shape != y.shape:
        raise ShapeMismatchError(f"operand shapes {x.shape} and {y.shape} differ")
    if x.shape[0] < x.shape[1]:
        raise ValueError("stiefel distance expects at least as many rows as columns")
    qx = _polar_factor(x)
    qy = _polar_factor(y)
    s = jacobi_svd(qx.T @ qy)[1]
    angles = np.arccos(np.clip(s, -1.0, 1.0))
    return float(np.sqrt(np.sum(angles * angles)))


def sinkhorn_normalize(a, iterations: int) -> np.ndarray:
    """Alternate row- and column-sum normalization of a positive matrix.

    Each iteration divides every row by its sum, then every column by
    its sum.  With enough iterations the result approaches a doubly
    stochastic scaling (up to the rectangular analogue for non-square
    input).
    """
    a = as_tensor(a)
    if a.ndim != 2:
        raise ValueError("sinkhorn_normalize expects a matrix")
    if np.any(a <= 0.0):
        raise ValueError("sinkhorn_normalize requires strictly positive entries")
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    w = a.copy()
    for _ in range(iterations):
        w /= w.sum(axis=1, keepdims=True)
        w /= w.sum(axis=0, keepdims=True)
    return w
