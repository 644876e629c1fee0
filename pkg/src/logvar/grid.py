"""Tensor-product box grids, grid fields and the finite-difference operators.

The unbounded domain is replaced by the box ``[-L, L]^N`` with zero Dirichlet
data.  Nodes include the boundary; boundary values are stored explicitly and
are always zero.  Arrays are indexed ``ij`` (row-major when flattened).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    dim: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise GridError("dim must be 1, 2, or 3")
        if not self.half_width > 0:
            raise GridError("half_width must be positive")
        if self.points_per_axis < 8:
            raise GridError("points_per_axis must be at least 8")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points_per_axis - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points_per_axis)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def radius_sq(self) -> np.ndarray:
        return sum(c**2 for c in self.coords)

    @cached_property
    def weights(self) -> np.ndarray:
        w1 = np.full(self.points_per_axis, self.spacing)
        w1[0] = w1[-1] = 0.5 * self.spacing
        w = w1
        for _ in range(self.dim - 1):
            w = np.multiply.outer(w, w1)
        return w

    @cached_property
    def interior(self) -> tuple[slice, ...]:
        return (slice(1, -1),) * self.dim

    @cached_property
    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.interior] = True
        return mask

    @cached_property
    def outer_layers_mask(self) -> np.ndarray:
        """Nodes within two layers of the box boundary."""
        idx = np.arange(self.points_per_axis)
        near = (idx < 2) | (idx >= self.points_per_axis - 2)
        mask = near
        for _ in range(self.dim - 1):
            mask = np.logical_or.outer(mask, near)
        return mask

    def refined(self) -> "Grid":
        """Same box with the spacing halved (n -> 2n - 1)."""
        return Grid(self.dim, self.half_width, 2 * self.points_per_axis - 1)

    def zeros(self) -> "Field":
        return Field(self, np.zeros(self.shape))

    def field(self, values) -> "Field":
        return Field(self, values)

    def sample(self, fn) -> "Field":
        """Field with values ``fn(*coords)``; boundary forced to zero."""
        return Field(self, fn(*self.coords), zero_boundary=True)

    def integrate(self, samples: np.ndarray) -> float:
        samples = np.asarray(samples, dtype=float)
        if samples.shape != self.shape:
            raise GridError(f"integrand shape {samples.shape} does not match grid {self.shape}")
        if not np.all(np.isfinite(samples)):
            raise GridError("non-finite integrand")
        return float(np.sum(self.weights * samples))

    # Interior-only sparse matrices (boundary values are eliminated).
    @cached_property
    def neg_laplacian_matrix(self) -> sp.csc_matrix:
        m = self.points_per_axis - 2
        t = sp.diags([-np.ones(m - 1), 2.0 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1]) / self.spacing**2
        eye = sp.identity(m, format="csr")
        total = None
        for ax in range(self.dim):
            factors = [t if k == ax else eye for k in range(self.dim)]
            term = factors[0]
            for f in factors[1:]:
                term = sp.kron(term, f, format="csr")
            total = term if total is None else total + term
        return sp.csc_matrix(total)

    def to_interior(self, values: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(values[self.interior]).ravel()

    def from_interior(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.interior] = np.asarray(vec).reshape((self.points_per_axis - 2,) * self.dim)
        return out


class Field:
    """Real grid function; immutable, boundary entries zero."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values, zero_boundary: bool = False):
        arr = np.array(values, dtype=float)
        if arr.shape != grid.shape:
            if arr.size == grid.size:
                arr = arr.reshape(grid.shape)
            else:
                raise GridError(f"field of size {arr.size} does not match grid with {grid.size} nodes")
        if not np.all(np.isfinite(arr)):
            raise GridError("non-finite field values")
        if zero_boundary:
            arr = np.where(grid.interior_mask, arr, 0.0)
        arr.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def _check(self, other: "Field"):
        if other.grid != self.grid:
            raise GridError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, s: float) -> "Field":
        return Field(self.grid, s * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def __repr__(self):
        return f"Field(dim={self.grid.dim}, n={self.grid.points_per_axis}, L={self.grid.half_width})"

    def dot(self, other: "Field") -> float:
        """Quadrature L2 inner product."""
        self._check(other)
        return self.grid.integrate(self.values * other.values)

    def l2_sq(self) -> float:
        return self.grid.integrate(self.values**2)

    def l2(self) -> float:
        return float(np.sqrt(self.l2_sq()))

    def is_zero(self) -> bool:
        return not np.any(self.values)


def integrate(f: Field) -> float:
    return f.grid.integrate(f.values)


def forward_differences(values: np.ndarray) -> list[np.ndarray]:
    return [np.diff(values, axis=ax) for ax in range(values.ndim)]


def grad_norm_sq(u: Field) -> float:
    """Kinetic quadratic form ``sum over links h^(N-2) (u_j - u_i)^2``."""
    h = u.grid.spacing
    total = sum(float(np.sum(d**2)) for d in forward_differences(u.values))
    return h ** (u.grid.dim - 2) * total


def divergence_of_links(grid: Grid, fluxes: Sequence[np.ndarray]) -> np.ndarray:
    """``-(adjoint of forward differences)`` applied to link fluxes, per unit volume.

    Returns the nodal array ``sum_ax (F_{i-1/2} - F_{i+1/2}) / h^2`` on the
    interior and zero on the boundary, so that with ``F = du`` it is ``-Lap_h u``.
    """
    out = np.zeros(grid.shape)
    for ax, flux in enumerate(fluxes):
        div = -np.diff(flux, axis=ax)
        sl = [slice(1, -1)] * grid.dim
        sl[ax] = slice(None)
        out[grid.interior] += div[tuple(sl)]
    return out / grid.spacing**2


def neg_laplacian(u: Field) -> np.ndarray:
    return divergence_of_links(u.grid, forward_differences(u.values))


def apply_operator(u: Field, weight: np.ndarray) -> Field:
    """``A u = -Lap_h u + weight * u`` with Dirichlet boundary (boundary output 0)."""
    weight = np.asarray(weight, dtype=float)
    if weight.shape != u.grid.shape:
        raise GridError(f"weight shape {weight.shape} does not match grid {u.grid.shape}")
    out = neg_laplacian(u) + np.where(u.grid.interior_mask, weight * u.values, 0.0)
    return Field(u.grid, out)


def operator_matrix(grid: Grid, weight: np.ndarray, shift: float = 0.0) -> sp.csc_matrix:
    """Interior sparse matrix of ``-Lap_h + weight + shift``."""
    diag = grid.to_interior(np.asarray(weight, dtype=float)) + shift
    return sp.csc_matrix(grid.neg_laplacian_matrix + sp.diags(diag))


def boundary_mass(u: Field) -> float:
    """Fraction of the L2 mass carried by the outermost two node layers."""
    total = u.l2_sq()
    if total == 0.0:
        return 0.0
    return u.grid.integrate(np.where(u.grid.outer_layers_mask, u.values**2, 0.0)) / total


def default_half_width(dim: int) -> float:
    return 12.0 if dim == 1 else 8.0


def default_points(dim: int) -> int:
    return {1: 961, 2: 161, 3: 49}[dim]
