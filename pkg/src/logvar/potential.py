"""Potential models, their grid samples and the low spectrum of -Lap_h + V + 1."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .grid import Field, Grid, operator_matrix

KINDS = ("constant", "gaussian_well", "harmonic", "table")


class PotentialError(ValueError):
    pass


class SpectralPositivityError(PotentialError):
    """The quadratic form with the signed weight V + 1 is not positive definite."""


class EigenSolveError(RuntimeError):
    def __init__(self, message, best_residual):
        super().__init__(f"{message} (best relative residual {best_residual:.3e})")
        self.best_residual = best_residual


@dataclass(frozen=True)
class PotentialSpec:
    """Analytic description of V.

    ``gaussian_well`` is ``V(x) = v_infinity - depth * exp(-|x|^2 / sigma^2)``,
    ``harmonic`` is ``coefficient * |x|^2`` (coercive, ``v_infinity = inf``).
    """

    kind: str
    value: float = 0.0
    depth: float = 0.0
    sigma: float = 1.0
    coefficient: float = 1.0
    v_infinity: float = 0.0
    table: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PotentialError(f"unknown potential kind {self.kind!r}")
        if self.kind == "harmonic":
            if not self.coefficient > 0:
                raise PotentialError("harmonic coefficient must be positive")
            object.__setattr__(self, "v_infinity", math.inf)
        elif self.kind == "constant":
            object.__setattr__(self, "v_infinity", float(self.value))
        elif self.kind == "gaussian_well":
            if self.depth < 0 or not self.sigma > 0:
                raise PotentialError("gaussian_well needs depth >= 0 and sigma > 0")
        elif self.kind == "table" and self.table is None:
            raise PotentialError("table potential needs samples")

    @classmethod
    def constant(cls, value: float = 0.0) -> "PotentialSpec":
        return cls("constant", value=value)

    @classmethod
    def gaussian_well(cls, depth: float, sigma: float = 1.0, v_infinity: float = 0.0) -> "PotentialSpec":
        return cls("gaussian_well", depth=depth, sigma=sigma, v_infinity=v_infinity)

    @classmethod
    def harmonic(cls, coefficient: float = 1.0) -> "PotentialSpec":
        return cls("harmonic", coefficient=coefficient)

    @classmethod
    def from_table(cls, samples, v_infinity: float = math.nan) -> "PotentialSpec":
        return cls("table", table=np.asarray(samples, dtype=float), v_infinity=v_infinity)

    @property
    def coercive(self) -> bool:
        return self.kind == "harmonic"

    @property
    def is_flat(self) -> bool:
        """True when V is identically V_inf (the limiting problem itself)."""
        return self.kind == "constant" or (self.kind == "gaussian_well" and self.depth == 0.0)

    def evaluate(self, grid: Grid) -> np.ndarray:
        r2 = grid.radius_sq
        if self.kind == "constant":
            return np.full(grid.shape, float(self.value))
        if self.kind == "gaussian_well":
            return self.v_infinity - self.depth * np.exp(-r2 / self.sigma**2)
        if self.kind == "harmonic":
            return self.coefficient * r2
        values = np.asarray(self.table, dtype=float)
        if values.size != grid.size:
            raise PotentialError(f"table has {values.size} samples, grid has {grid.size} nodes")
        return values.reshape(grid.shape)


class BoundPotential:
    """A potential sampled on a grid with cached weights and factorizations."""

    def __init__(self, spec: PotentialSpec, grid: Grid):
        self.spec = spec
        self.grid = grid
        samples = spec.evaluate(grid)
        if not np.all(np.isfinite(samples)):
            raise PotentialError("potential samples must be finite")
        samples.flags.writeable = False
        self.samples = samples
        self.plus = np.maximum(samples + 1.0, 0.0)
        self.minus = np.maximum(-(samples + 1.0), 0.0)
        self._solvers = {}
        self._margin = None

    def __repr__(self):
        return f"BoundPotential({self.spec.kind}, {self.grid!r})"

    @property
    def signed_weight(self) -> np.ndarray:
        return self.samples + 1.0

    @cached_property
    def max_minus(self) -> float:
        return float(self.minus.max())

    def solver(self, shift: float = 0.0):
        """Cached LU solve for ``(-Lap_h + (V+1)^+ + shift) p = g`` acting on nodal arrays."""
        if shift not in self._solvers:
            lu = spla.splu(operator_matrix(self.grid, self.plus, shift))
            grid = self.grid

            def solve(rhs: np.ndarray) -> np.ndarray:
                return grid.from_interior(lu.solve(grid.to_interior(rhs)))

            self._solvers[shift] = solve
        return self._solvers[shift]

    def spectral_margin(self) -> float:
        """Lowest eigenvalue of ``-Lap_h + V + 1`` (cached)."""
        if self._margin is None:
            self._margin = lowest_eigenpairs(self, 1).eigenvalues[0]
        return self._margin

    def require_positive(self):
        """Refuse signed-form computations when the discrete spectrum is not positive."""
        if self.spec.coercive or float(self.signed_weight.min()) > 0.0:
            return
        margin = self.spectral_margin()
        if margin <= 0.0:
            raise SpectralPositivityError(f"lowest eigenvalue of -Lap+V+1 is {margin:.6g} <= 0")


def bind(spec: PotentialSpec, grid: Grid) -> BoundPotential:
    return BoundPotential(spec, grid)


@dataclass(frozen=True)
class SpectrumInfo:
    eigenvalues: np.ndarray
    eigenfields: tuple
    residuals: np.ndarray
    iterations: int

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def to_json(self) -> dict:
        ok, margin = positivity_check(self)
        return {
            "k": self.k,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "iterations": self.iterations,
            "positive": ok,
            "margin": margin,
        }


def lowest_eigenpairs(
    potential: BoundPotential,
    k: int,
    positive_part: bool = False,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    seed: int = 0,
) -> SpectrumInfo:
    """k smallest eigenpairs of ``-Lap_h + (V+1)`` by shifted block inverse iteration.

    The shift sits below the Gershgorin bound ``min(V+1)`` so the shifted matrix is
    positive definite; each sweep is one sparse solve, re-orthonormalization and
    a Rayleigh-Ritz rotation. A few guard vectors beyond k speed up convergence.
    With ``positive_part`` the weight is ``(V+1)^+`` instead.
    """
    grid = potential.grid
    m = (grid.points_per_axis - 2) ** grid.dim
    if not 1 <= k < m // 2:
        raise ValueError(f"k must be in [1, {m // 2})")
    weight = potential.plus if positive_part else potential.signed_weight
    a = operator_matrix(grid, weight)
    shift = float(weight.min()) - 1.0
    lu = spla.splu(operator_matrix(grid, weight, -shift))
    block = min(m, k + max(4, k // 2 + 2))

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((m, block))
    best = math.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        q, _ = np.linalg.qr(y)
        aq = a @ q
        theta, s = sla.eigh(q.T @ aq)
        x = q @ s
        ax = aq @ s
        res = np.linalg.norm(ax[:, :k] - x[:, :k] * theta[:k], axis=0) / np.maximum(np.abs(theta[:k]), 1e-300)
        best = min(best, float(res.max()))
        if res.max() <= tol:
            break
    else:
        raise EigenSolveError("eigensolve did not converge", best)

    scale = grid.cell_volume ** -0.5
    fields = []
    for j in range(k):
        vec = x[:, j]
        if vec[np.argmax(np.abs(vec))] < 0:
            vec = -vec
        fields.append(Field(grid, grid.from_interior(vec * scale)))
    return SpectrumInfo(np.array(theta[:k]), tuple(fields), res.copy(), it)


def positivity_check(spectrum: SpectrumInfo) -> tuple[bool, float]:
    margin = float(spectrum.eigenvalues[0])
    return margin > 0.0, margin
