"""Uniform radial grids with composite Simpson quadrature weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericDomainError

#: smallest grid on which the composite rule is defined
MIN_POINTS = 5


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radial axis ``[0, r_max]`` sampled uniformly, origin included.

    The same type serves position space (``r``) and momentum space (``k``).

    Attributes
    ----------
    points : ndarray
        Strictly increasing abscissae, ``points[0] == 0``.
    weights : ndarray
        Quadrature weights such that ``weights @ f`` approximates the
        integral of ``f`` over ``[0, r_max]``.
    spacing : float
        Uniform step ``h``.
    r_max : float
        Outer cutoff.
    """

    points: np.ndarray
    weights: np.ndarray
    spacing: float
    r_max: float

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.points)

    def integrate(self, values) -> float:
        return integrate(values, self)


def simpson_weights(n_points: int, h: float) -> np.ndarray:
    """Composite Simpson weights; for an even point count the last three
    intervals use the 3/8 rule so the rule stays exact for cubics."""
    w = np.zeros(n_points)
    n_int = n_points - 1
    if n_int % 2 == 0:
        m = n_points
        tail = 0
    else:
        m = n_points - 3
        tail = 3
    if m >= 3:
        w[:m:2] += 2.0 * h / 3.0
        w[1:m:2] += 4.0 * h / 3.0
        w[0] -= h / 3.0
        w[m - 1] -= h / 3.0
    if tail:
        s = m - 1
        w[s : s + 4] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
    return w


def build_grid(r_max: float, n_points: int) -> RadialGrid:
    """Uniform grid on ``[0, r_max]`` with ``n_points`` samples.

    >>> g = build_grid(10.0, 5)
    >>> g.points.tolist(), float(g.weights.sum())
    ([0.0, 2.5, 5.0, 7.5, 10.0], 10.0)
    """
    if not np.isfinite(r_max) or r_max <= 0:
        raise InvalidArgumentError(f"r_max must be positive, got {r_max}")
    if int(n_points) != n_points or n_points < MIN_POINTS:
        raise InvalidArgumentError(
            f"n_points must be an integer >= {MIN_POINTS}, got {n_points}"
        )
    n_points = int(n_points)
    points = np.linspace(0.0, float(r_max), n_points)
    h = float(r_max) / (n_points - 1)
    return RadialGrid(points, simpson_weights(n_points, h), h, float(r_max))


def integrate(values, grid: RadialGrid) -> float:
    """Weighted sum ``sum_i w_i * values_i``."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.shape[0] != len(grid.points):
        raise InvalidArgumentError(
            f"expected {len(grid.points)} samples, got shape {values.shape}"
        )
    if not np.all(np.isfinite(values)):
        raise NumericDomainError("non-finite sample in integrand")
    return float(grid.weights @ values)
