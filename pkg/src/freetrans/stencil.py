"""Discrete Hessians on interior lattice points.

Pure second derivatives use centred differences.  Mixed derivatives use
one of two compact stencils named by the sign pattern of their centre
term:

  plus  (main diagonal):   [ 2u(x) + u(x+h(ei+ej)) + u(x-h(ei+ej))
                             - u(x+h ei) - u(x-h ei) - u(x+h ej) - u(x-h ej) ] / (2h^2)
  minus (anti diagonal):   [-2u(x) - u(x+h(ei-ej)) - u(x-h(ei-ej))
                             + u(x+h ei) + u(x-h ei) + u(x+h ej) + u(x-h ej) ] / (2h^2)

Both are exact on quadratics.  Inside a trace Tr(A D^2_h u) the
orientation must follow the sign of the off-diagonal coefficient:
a_ij >= 0 takes ``minus`` and a_ij < 0 takes ``plus``, so that every
off-centre weight is non-positive and the remaining positive axis
contribution is absorbed by row diagonal dominance.  Any other pairing
produces a positive neighbour weight and breaks monotonicity.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ShapeError, StencilDomainError
from .grid import GridFunction, neighbor

__all__ = [
    "hessian_diag",
    "hessian_cross",
    "discrete_hessian",
    "orientation_for_coefficient",
    "trace_stencil_weights",
]

#: a HessianSample is a plain (d, d) symmetric ndarray
HessianSample = np.ndarray


def _require_interior(u: GridFunction, point_index: int):
    if not u.grid.interior_mask[point_index]:
        raise StencilDomainError(f"point {point_index} is not interior")


def _axis_offset(dim: int, axis: int, sign: int) -> tuple[int, ...]:
    off = [0] * dim
    off[axis] = sign
    return tuple(off)


def hessian_diag(u: GridFunction, axis: int, point_index: int) -> float:
    """Centred second difference along one axis at an interior point."""
    _require_interior(u, point_index)
    grid = u.grid
    h = grid.spacing
    up = u.values[neighbor(grid, point_index, _axis_offset(grid.dim, axis, +1))]
    um = u.values[neighbor(grid, point_index, _axis_offset(grid.dim, axis, -1))]
    return (up + um - 2.0 * u.values[point_index]) / (h * h)


def hessian_cross(
    u: GridFunction, i: int, j: int, orientation: str, point_index: int
) -> float:
    """Mixed second difference for axes i != j with the given orientation."""
    if i == j:
        raise ShapeError("cross derivative needs two distinct axes")
    _require_interior(u, point_index)
    grid = u.grid
    d, h = grid.dim, grid.spacing
    vals = u.values

    def at(off):
        return vals[neighbor(grid, point_index, off)]

    axis_sum = (
        at(_axis_offset(d, i, +1))
        + at(_axis_offset(d, i, -1))
        + at(_axis_offset(d, j, +1))
        + at(_axis_offset(d, j, -1))
    )
    centre = vals[point_index]
    if orientation == "minus":
        anti_p = [0] * d
        anti_p[i], anti_p[j] = +1, -1
        anti_m = [0] * d
        anti_m[i], anti_m[j] = -1, +1
        return (-2.0 * centre - at(tuple(anti_p)) - at(tuple(anti_m)) + axis_sum) / (
            2.0 * h * h
        )
    if orientation == "plus":
        main_p = [0] * d
        main_p[i], main_p[j] = +1, +1
        main_m = [0] * d
        main_m[i], main_m[j] = -1, -1
        return (2.0 * centre + at(tuple(main_p)) + at(tuple(main_m)) - axis_sum) / (
            2.0 * h * h
        )
    raise ShapeError(f"orientation must be 'plus' or 'minus', got {orientation!r}")


def discrete_hessian(
    u: GridFunction, point_index: int, orientation_policy=None
) -> HessianSample:
    """Assemble the full symmetric discrete Hessian at an interior point.

    ``orientation_policy`` maps an axis pair (i, j), i < j, to 'plus' or
    'minus'; the scheme layer supplies it matched to the off-diagonal
    coefficient signs.  Defaults to 'minus' everywhere.
    """
    _require_interior(u, point_index)
    d = u.grid.dim
    H = np.empty((d, d))
    for k in range(d):
        H[k, k] = hessian_diag(u, k, point_index)
    for i, j in itertools.combinations(range(d), 2):
        orient = "minus" if orientation_policy is None else orientation_policy[(i, j)]
        H[i, j] = H[j, i] = hessian_cross(u, i, j, orient, point_index)
    return H


def orientation_for_coefficient(a_ij: float) -> str:
    """Monotone orientation for an off-diagonal trace coefficient."""
    return "minus" if a_ij >= 0 else "plus"


def trace_stencil_weights(A, h: float, flip: bool = False) -> dict[tuple[int, ...], float]:
    """Neighbour weights of Tr(A D^2_h u) at an interior point.

    Returns a map offset -> weight with offsets in {-1,0,1}^d, so that
    Tr(A D^2_h u)(x) = sum_off weight * u(x + h*off).  With the monotone
    orientation every off-centre weight is <= 0 whenever A is diagonally
    dominant with non-positive diagonal; ``flip=True`` inverts the
    orientation choice (a deliberately broken variant used by the
    verification suite's mutation tests).
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    inv_h2 = 1.0 / (h * h)
    weights: dict[tuple[int, ...], float] = {}

    def add(off, w):
        if w != 0.0:
            weights[off] = weights.get(off, 0.0) + w

    centre = [0] * d
    for k in range(d):
        a = A[k, k]
        add(_axis_offset(d, k, +1), a * inv_h2)
        add(_axis_offset(d, k, -1), a * inv_h2)
        add(tuple(centre), -2.0 * a * inv_h2)

    for i, j in itertools.combinations(range(d), 2):
        a = A[i, j]
        if a == 0.0:
            continue
        orient = orientation_for_coefficient(a)
        if flip:
            orient = "plus" if orient == "minus" else "minus"
        # the (i,j) and (j,i) entries contribute one joint term 2*a*S
        coeff = 2.0 * a / (2.0 * h * h)
        for k, s in ((i, +1), (i, -1), (j, +1), (j, -1)):
            add(_axis_offset(d, k, s), coeff if orient == "minus" else -coeff)
        if orient == "minus":
            anti_p = [0] * d
            anti_p[i], anti_p[j] = +1, -1
            anti_m = [0] * d
            anti_m[i], anti_m[j] = -1, +1
            add(tuple(anti_p), -coeff)
            add(tuple(anti_m), -coeff)
            add(tuple(centre), -2.0 * coeff)
        else:
            main_p = [0] * d
            main_p[i], main_p[j] = +1, +1
            main_m = [0] * d
            main_m[i], main_m[j] = -1, -1
            add(tuple(main_p), coeff)
            add(tuple(main_m), coeff)
            add(tuple(centre), 2.0 * coeff)
    return weights
