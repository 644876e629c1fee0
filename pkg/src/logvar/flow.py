"""Preconditioned descent flow for J and Palais-Smale style diagnostics.

The descent direction is the gradient in the metric of
``P = -Lap_h + (V+1)^+ + 1``, i.e. ``-P^{-1} J'(u)``.  Because
``<J'(u), P^{-1} J'(u)> = |J'(u)|_{P*}^2`` it is a pseudo-gradient for the
discrete J, and it is odd in u.  Steps are explicit Euler with Armijo
backtracking, so J never increases along accepted steps.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .energy import coercivity_constant, energy_change, residual, total_energy, x_norm_sq
from .grid import Field, boundary_mass
from .potential import BoundPotential

ARMIJO = 1e-4
BACKTRACK = 0.5
INITIAL_STEP = 1.0
MAX_HALVINGS = 60
PRECONDITIONER_SHIFT = 1.0
ESCAPE_NORM = 1e6


class SolverError(RuntimeError):
    def __init__(self, message: str, report: "SolverReport"):
        super().__init__(message)
        self.report = report


class LineSearchError(SolverError):
    pass


class NonConvergenceError(SolverError):
    pass


@dataclass
class SolverReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    energy_history: list = field(default_factory=list)
    norm_history: list = field(default_factory=list)
    dual_residual_history: list = field(default_factory=list)
    converged: bool = False
    ps_epsilon: float = math.nan
    boundary_mass: float = math.nan
    final_J: float = math.nan
    final_L2: float = math.nan
    wall_time_seconds: float = 0.0
    escaped: bool = False

    def record(self, u: Field, potential: BoundPotential, energy: float, g: Field, gp: float):
        self.residual_history.append(g.l2())
        self.energy_history.append(energy)
        self.norm_history.append(math.sqrt(x_norm_sq(u, potential) + u.l2_sq()))
        self.dual_residual_history.append(math.sqrt(max(gp, 0.0)))

    def finish(self, u: Field, started: float):
        self.ps_epsilon = self.residual_history[-1] if self.residual_history else math.nan
        self.boundary_mass = boundary_mass(u)
        self.final_J = self.energy_history[-1] if self.energy_history else math.nan
        self.final_L2 = u.l2()
        self.wall_time_seconds = time.perf_counter() - started

    def to_json(self, max_points: int = 1000) -> dict:
        hist = self.residual_history
        if len(hist) > max_points:
            idx = np.unique(np.linspace(0, len(hist) - 1, max_points).round().astype(int))
            hist = [hist[i] for i in idx]
        return {
            "iterations": self.iterations,
            "residual_history": [float(r) for r in hist],
            "final_J": float(self.final_J),
            "final_L2": float(self.final_L2),
            "converged": bool(self.converged),
            "wall_time_seconds": float(self.wall_time_seconds),
            "boundary_mass": float(self.boundary_mass),
        }


def write_history_csv(path, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "value"])
        for i, v in enumerate(values):
            w.writerow([i, repr(float(v))])


def read_history_csv(path) -> list[float]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["step", "value"]:
        raise ValueError(f"{path}: not a step,value history")
    return [float(v) for _, v in rows[1:]]


def precondition(potential: BoundPotential, g: Field) -> Field:
    return Field(g.grid, potential.solver(PRECONDITIONER_SHIFT)(g.values))


def descend(
    u0: Field,
    potential: BoundPotential,
    max_steps: int = 10_000,
    tol: float = 1e-8,
    escape_norm: float = ESCAPE_NORM,
) -> tuple[Field, SolverReport]:
    """Armijo descent ``u <- u - tau P^{-1} J'(u)`` until ``|J'(u)|_2 <= tol``.

    J is unbounded below along rays, so a run whose L2 norm passes
    ``escape_norm`` stops early with ``report.escaped`` set.  Hitting
    ``max_steps`` returns an unconverged report; a failed line search raises
    :class:`LineSearchError` carrying the report.
    """
    started = time.perf_counter()
    report = SolverReport()
    u = Field(u0.grid, u0.values, zero_boundary=True)
    energy = total_energy(u, potential)
    for step in range(max_steps + 1):
        g = residual(u, potential)
        p = precondition(potential, g)
        gp = g.dot(p)
        report.record(u, potential, energy, g, gp)
        if report.residual_history[-1] <= tol:
            report.converged = True
            break
        if step == max_steps:
            break
        if u.l2() > escape_norm:
            report.escaped = True
            break
        tau = INITIAL_STEP
        for _ in range(MAX_HALVINGS + 1):
            d = -tau * p
            change = energy_change(u, d, potential)
            if change <= -ARMIJO * tau * gp:
                break
            tau *= BACKTRACK
        else:
            report.iterations = step
            report.finish(u, started)
            raise LineSearchError(f"line search failed after {MAX_HALVINGS} halvings", report)
        u = u + d
        energy = total_energy(u, potential)
        report.iterations = step + 1
    report.finish(u, started)
    return u, report


@dataclass(frozen=True)
class PSSummary:
    norm_cap: float
    observed_max_norm: float
    sup_energy: float
    max_dual_residual: float
    bounded: bool


def ps_norm_cap(sup_energy: float, max_dual: float, k_const: float) -> float:
    """Largest R compatible with ``2d >= 1/2 R^2 - G(2d + e R)``.

    Every iterate u with ``J(u) <= d`` and ``|J'(u)|_{P*} <= e`` obeys
    ``|u|_2^2 = 2J(u) - <J'(u), u> <= 2d + e R`` with ``R = |u|_P``; the
    coercivity bound then gives the inequality above, where
    ``G(T) = max(0, T (log T + K + 1/2))``.
    """
    d2 = 2.0 * sup_energy

    def excess(r):
        t = d2 + max_dual * r
        grow = t * (math.log(t) + k_const + 0.5) if t > 0 else 0.0
        return 0.5 * r * r - max(grow, 0.0) - d2

    radii = np.geomspace(1e-8, 1e12, 2001)
    vals = np.array([excess(r) for r in radii])
    bad = np.nonzero(vals <= 0.0)[0]
    if bad.size == 0:
        return 0.0
    i = bad[-1]
    if i == radii.size - 1:
        return math.inf
    return brentq(excess, radii[i], radii[i + 1], xtol=1e-14, rtol=1e-14)


def ps_diagnostic(report: SolverReport, potential: BoundPotential) -> PSSummary:
    if not report.norm_history:
        raise ValueError("empty solver report")
    d = max(report.energy_history)
    e = max(report.dual_residual_history)
    cap = ps_norm_cap(d, e, coercivity_constant(potential))
    observed = max(report.norm_history)
    return PSSummary(cap, observed, d, e, observed <= cap)
