"""Uniform grids on [-l, l] with composite Simpson quadrature.

Functions are represented by their nodal values; inner products and norms
are the weighted discrete analogs of the L2[-l, l] ones, so that grid
functions behave like elements of a Hilbert space at every node count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EvenNodeCountError, GridMismatchError, NonFiniteValueError


@dataclass(frozen=True)
class Grid:
    """Uniform grid of `node_count` points spanning [-half_width, half_width].

    `node_count` must be odd and >= 3 so the grid splits into an even number
    of panels, as composite Simpson quadrature requires.
    """

    half_width: float
    node_count: int

    def __post_init__(self):
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.node_count < 3:
            raise ValueError(f"node_count must be >= 3, got {self.node_count}")
        if self.node_count % 2 == 0:
            raise EvenNodeCountError(
                f"node_count must be odd for Simpson quadrature, got {self.node_count}"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.node_count - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        pts = np.linspace(-self.half_width, self.half_width, self.node_count)
        # antisymmetrize so the midpoint is exactly zero and t_i = -t_{n-1-i}
        pts = 0.5 * (pts - pts[::-1])
        pts.flags.writeable = False
        return pts


@dataclass(frozen=True)
class GridFunction:
    """Real-valued function sampled at the nodes of a grid.

    Values are copied, checked for finiteness, and frozen; instances are
    immutable and safe to share.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.node_count,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid with "
                f"{self.grid.node_count} nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValueError("grid function contains NaN or infinite values")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> GridFunction:
        """New function on the same grid (values validated as usual)."""
        return GridFunction(self.grid, values)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> GridFunction:
        return cls(grid, np.asarray([fn(t) for t in grid.nodes], dtype=float))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> GridFunction:
        return cls(grid, np.full(grid.node_count, float(value)))


@dataclass(frozen=True)
class QuadratureWeights:
    """Composite Simpson weights h/3 * (1, 4, 2, 4, ..., 2, 4, 1) on a grid."""

    grid: Grid

    @cached_property
    def weights(self) -> np.ndarray:
        if self.grid.node_count % 2 == 0:
            raise EvenNodeCountError(
                f"Simpson weights need an odd node count, got {self.grid.node_count}"
            )
        w = np.full(self.grid.node_count, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        w *= self.grid.spacing / 3.0
        w.flags.writeable = False
        return w


def simpson_weights(grid: Grid) -> QuadratureWeights:
    """Composite Simpson quadrature weights; exact on cubics."""
    return QuadratureWeights(grid)


def _require_same_grid(*grids: Grid) -> None:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {g}")


def integrate(f: GridFunction, w: QuadratureWeights) -> float:
    """Quadrature approximation of the integral of f over [-l, l]."""
    _require_same_grid(f.grid, w.grid)
    return float(w.weights @ f.values)


def inner_product(f: GridFunction, g: GridFunction, w: QuadratureWeights) -> float:
    """Weighted discrete L2 inner product sum_i w_i f_i g_i."""
    _require_same_grid(f.grid, g.grid, w.grid)
    return float(w.weights @ (f.values * g.values))


def l2_norm(f: GridFunction, w: QuadratureWeights) -> float:
    """Weighted discrete L2 norm sqrt(<f, f>)."""
    return float(np.sqrt(inner_product(f, f, w)))


def sup_norm(f: GridFunction) -> float:
    """Maximum absolute nodal value."""
    return float(np.max(np.abs(f.values)))
