"""Gausson ground truth for the constant-potential problem and level comparisons.

Substituting ``u = c exp(-|x|^2/2)`` into ``-Lap u + V_inf u = u log u^2`` gives
``(N + V_inf - |x|^2) u = (2 log c - |x|^2) u``, so ``c^2 = e^(N + V_inf)``.
On the Nehari manifold ``J = 1/2 |u|_2^2``, hence the level
``c_inf = 1/2 pi^(N/2) e^(N + V_inf)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import Field, Grid


class OracleError(ValueError):
    pass


def _check_vinf(v_infinity: float):
    if not (math.isfinite(v_infinity) and v_infinity > -1.0):
        raise OracleError("v_infinity must be finite and > -1")


def gausson(grid: Grid, v_infinity: float = 0.0) -> Field:
    _check_vinf(v_infinity)
    amp = math.exp(0.5 * (grid.dim + v_infinity))
    return Field(grid, amp * np.exp(-0.5 * grid.radius_sq), zero_boundary=True)


def gausson_energy(dim: int, v_infinity: float = 0.0) -> float:
    _check_vinf(v_infinity)
    return 0.5 * math.pi ** (dim / 2.0) * math.exp(dim + v_infinity)


@dataclass(frozen=True)
class LevelsReport:
    c_infinity: float
    c_nehari: float
    mountain_pass_gap: float
    quadrature_floor: float
    v_infinity: float

    def to_json(self) -> dict:
        return asdict(self)


def compare_levels(c_nehari: float, v_infinity: float, dim: int, quadrature_floor: float) -> LevelsReport:
    """Compare a computed Nehari level against the Gausson level of the limiting problem.

    ``quadrature_floor`` is the two-resolution spread ``|J_n - J_(2n-1)|`` of the
    computed ground-state energy; see :func:`logvar.nehari.levels_for` for the
    driver that produces it.
    """
    c_inf = gausson_energy(dim, v_infinity)
    return LevelsReport(c_inf, c_nehari, c_inf - c_nehari, abs(quadrature_floor), v_infinity)
