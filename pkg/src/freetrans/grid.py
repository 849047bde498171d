"""Uniform lattices on axis-aligned boxes.

A grid enumerates the points of a tensor-product lattice in row-major
order and classifies each point as interior or boundary.  Interior points
are those whose full compact stencil neighbourhood (the 2d axis
neighbours plus every diagonal neighbour used by cross-derivative
stencils) lies inside the lattice; everything else carries Dirichlet
data.  Grids are immutable after construction and safe to share between
threads; neighbour index tables are cached lazily.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, OutOfLatticeError, ShapeError

__all__ = ["DomainSpec", "Grid", "GridFunction", "build_grid", "neighbor"]


@dataclass(frozen=True)
class DomainSpec:
    """An axis-aligned box, with exterior-cone metadata.

    The cone parameters are recorded for completeness only: a box
    satisfies a uniform exterior cone condition for any positive radius
    and opening, so they never enter the discretisation.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    cone_radius_r: float = 1.0
    cone_opening_theta: float = math.pi / 2

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(a) for a in self.lower))
        object.__setattr__(self, "upper", tuple(float(b) for b in self.upper))
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ConfigurationError("lower and upper corners must have the same positive length")
        for a, b in zip(self.lower, self.upper):
            if not a < b:
                raise ConfigurationError(f"degenerate box: lower {a} must be < upper {b}")
        if self.cone_radius_r <= 0 or self.cone_opening_theta <= 0:
            raise ConfigurationError("cone metadata must be positive")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lower, self.upper))


class Grid:
    """Uniform lattice over a box with row-major point enumeration.

    Attributes:
        spec: the underlying box.
        n_per_axis: points per axis, endpoints included.
        spacing: lattice constant h, identical on every axis.
        points: (n_total, d) coordinates, row-major order.
        interior_mask: boolean per point; True iff every axis index lies
            strictly inside [1, n_per_axis - 2].
        dim: spatial dimension d.
    """

    def __init__(self, spec: DomainSpec, n_per_axis: int):
        if n_per_axis < 3:
            raise ConfigurationError(
                f"n_per_axis={n_per_axis} leaves no interior points (need >= 3)"
            )
        widths = spec.widths()
        if not all(math.isclose(w, widths[0], rel_tol=1e-12) for w in widths):
            raise ConfigurationError(
                "box widths must be equal across axes so a single spacing serves them all; "
                f"got {widths}"
            )
        self.spec = spec
        self.dim = spec.dim
        self.n_per_axis = int(n_per_axis)
        self.spacing = widths[0] / (n_per_axis - 1)
        self.n_total = n_per_axis**self.dim

        axes = [
            np.linspace(spec.lower[k], spec.upper[k], n_per_axis) for k in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.points = np.column_stack([m.ravel(order="C") for m in mesh])

        multi = np.array(
            np.unravel_index(np.arange(self.n_total), (n_per_axis,) * self.dim)
        ).T
        self._multi = multi
        self.interior_mask = np.all((multi >= 1) & (multi <= n_per_axis - 2), axis=1)

        # row-major strides for flat-index arithmetic
        self._strides = np.array(
            [n_per_axis ** (self.dim - 1 - k) for k in range(self.dim)], dtype=np.int64
        )
        self._offset_cache: dict[tuple[int, ...], np.ndarray] = {}

    # -- enumeration ----------------------------------------------------

    def multi_index(self, flat: int) -> tuple[int, ...]:
        """Axis indices of the point with the given flat index."""
        if not 0 <= flat < self.n_total:
            raise OutOfLatticeError(f"flat index {flat} outside [0, {self.n_total})")
        return tuple(int(i) for i in self._multi[flat])

    def flat_index(self, multi: tuple[int, ...]) -> int:
        """Flat enumeration index of the point with the given axis indices."""
        if len(multi) != self.dim:
            raise ShapeError(f"expected {self.dim} axis indices, got {len(multi)}")
        for i in multi:
            if not 0 <= i < self.n_per_axis:
                raise OutOfLatticeError(f"axis index {i} outside [0, {self.n_per_axis})")
        return int(np.dot(np.asarray(multi, dtype=np.int64), self._strides))

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(self.interior_mask)

    @property
    def boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.interior_mask)

    def offset_indices(self, offset: tuple[int, ...]) -> np.ndarray:
        """Flat indices of (interior point + h*offset), vectorised.

        Every offset in {-1,0,1}^d resolves for every interior point, so
        the result is always well defined.  Cached per offset.
        """
        key = tuple(int(o) for o in offset)
        if len(key) != self.dim:
            raise ShapeError(f"offset must have {self.dim} components")
        cached = self._offset_cache.get(key)
        if cached is None:
            shifted = self._multi[self.interior_mask] + np.asarray(key, dtype=np.int64)
            if np.any(shifted < 0) or np.any(shifted >= self.n_per_axis):
                raise OutOfLatticeError(f"offset {key} leaves the lattice from an interior point")
            cached = shifted @ self._strides
            self._offset_cache[key] = cached
        return cached

    def __repr__(self):
        return (
            f"Grid(dim={self.dim}, n_per_axis={self.n_per_axis}, "
            f"h={self.spacing:.6g}, points={self.n_total})"
        )


@dataclass
class GridFunction:
    """Real values attached to every enumerated grid point."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_total,):
            raise ShapeError(
                f"expected {self.grid.n_total} values, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("grid function values must be finite")

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n_total))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.points), dtype=float))

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def build_grid(spec: DomainSpec, n_per_axis: int) -> Grid:
    """Discretise the box with ``n_per_axis`` points per axis.

    The spacing is h = width / (n_per_axis - 1): endpoints belong to the
    lattice and carry the Dirichlet data.  Boundary points are exactly
    the points on the box faces.
    """
    return Grid(spec, n_per_axis)


def neighbor(grid: Grid, point_index: int, offset: tuple[int, ...]) -> int:
    """Flat index of the point at ``position + h * offset``.

    Raises OutOfLatticeError when the target falls outside the lattice;
    callers that sweep stencils must only ask for neighbours of interior
    points.
    """
    multi = grid.multi_index(point_index)
    target = tuple(i + int(o) for i, o in zip(multi, offset))
    for t in target:
        if not 0 <= t < grid.n_per_axis:
            raise OutOfLatticeError(
                f"offset {tuple(offset)} from point {point_index} leaves the lattice"
            )
    return grid.flat_index(target)


def interior_neighborhood_offsets(dim: int) -> list[tuple[int, ...]]:
    """All axis and two-axis diagonal offsets a compact stencil may touch."""
    offsets = []
    for k in range(dim):
        for s in (-1, 1):
            off = [0] * dim
            off[k] = s
            offsets.append(tuple(off))
    for i, j in itertools.combinations(range(dim), 2):
        for si, sj in itertools.product((-1, 1), repeat=2):
            off = [0] * dim
            off[i], off[j] = si, sj
            offsets.append(tuple(off))
    return offsets
