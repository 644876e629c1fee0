"""Nehari-manifold projection and ground states by descent on the manifold.

Along a ray, ``phi_u(s) = J(s u)`` has the single critical point

    log s^2 = (Q(u) - int u^2 (log u^2 + 1)) / |u|_2^2,
    Q(u) = |grad u|^2 + int (V+1) u^2,

so projecting onto the Nehari manifold is a closed-form rescaling.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .energy import energy_change, residual, total_energy
from .flow import (
    ARMIJO,
    BACKTRACK,
    INITIAL_STEP,
    MAX_HALVINGS,
    LineSearchError,
    NonConvergenceError,
    SolverReport,
    precondition,
)
from .grid import Field, grad_norm_sq
from .oracle import compare_levels
from .potential import BoundPotential, PotentialSpec, bind


class NehariError(ValueError):
    pass


@dataclass(frozen=True)
class NehariProjection:
    scale: float
    projected: Field
    phi_prime_at_scale: float
    q_form: float
    term_scale: float


def quadratic_form(u: Field, potential: BoundPotential) -> float:
    return grad_norm_sq(u) + u.grid.integrate(potential.signed_weight * u.values**2)


def ray_derivative(u: Field, potential: BoundPotential, s: float) -> float:
    """``phi_u'(s) = s (Q(u) - int u^2 (log s^2 + log u^2 + 1))``."""
    v2 = u.values**2
    q = quadratic_form(u, potential)
    return s * (q - u.grid.integrate(v2 * (math.log(s * s) + 1.0) + xlogy(v2, v2)))


def nehari_log_scale_sq(u: Field, potential: BoundPotential) -> tuple[float, float, float]:
    v2 = u.values**2
    mass = u.grid.integrate(v2)
    if mass == 0.0:
        raise NehariError("zero field has no Nehari ray")
    q = quadratic_form(u, potential)
    lg = u.grid.integrate(xlogy(v2, v2))
    return (q - lg - mass) / mass, q, abs(q) + abs(lg) + mass


def project(u: Field, potential: BoundPotential, check_positive: bool = True) -> NehariProjection:
    if check_positive:
        potential.require_positive()
    log_s2, q, term_scale = nehari_log_scale_sq(u, potential)
    s = math.exp(0.5 * log_s2)
    v = s * u
    # <J'(v), v> = Q(v) - int v^2 (log v^2 + 1)
    v2 = v.values**2
    pp = quadratic_form(v, potential) - v.grid.integrate(xlogy(v2, v2) + v2)
    return NehariProjection(s, v, pp, q, term_scale * s * s)


def default_init(grid) -> Field:
    return grid.sample(lambda *xs: np.exp(-0.5 * sum(x * x for x in xs)))


def random_init(grid, seed: int) -> Field:
    """Positive random bump mixture; deterministic for a seed."""
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.shape)
    for _ in range(3):
        c = rng.uniform(-1.0, 1.0, grid.dim)
        w = rng.uniform(0.7, 1.5)
        r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
        vals += rng.uniform(0.5, 1.5) * np.exp(-0.5 * r2 / w**2)
    return Field(grid, vals, zero_boundary=True)


def sign_normalized(u: Field) -> Field:
    """Representative of the pair +-u that is nonnegative where |u| peaks."""
    flat = u.values.ravel()
    return -u if flat[np.argmax(np.abs(flat))] < 0 else u


def ground_state(
    potential: BoundPotential,
    init: Field | None = None,
    tol: float = 1e-8,
    max_iters: int = 50_000,
) -> tuple[Field, SolverReport]:
    """Minimize J on the Nehari manifold: ``u <- project(u - tau P^{-1} J'(u))``."""
    potential.require_positive()
    started = time.perf_counter()
    grid = potential.grid
    u = project(init if init is not None else default_init(grid), potential, check_positive=False).projected
    energy = total_energy(u, potential)
    report = SolverReport()
    for it in range(max_iters + 1):
        g = residual(u, potential)
        p = precondition(potential, g)
        gp = g.dot(p)
        report.record(u, potential, energy, g, gp)
        if report.residual_history[-1] <= tol:
            report.converged = True
            break
        if it == max_iters:
            report.iterations = it
            report.finish(u, started)
            raise NonConvergenceError(f"ground state not converged after {max_iters} iterations", report)
        tau = INITIAL_STEP
        for _ in range(MAX_HALVINGS + 1):
            trial = project(u - tau * p, potential, check_positive=False).projected
            change = energy_change(u, trial - u, potential)
            if change <= -ARMIJO * tau * gp:
                break
            tau *= BACKTRACK
        else:
            report.iterations = it
            report.finish(u, started)
            raise LineSearchError(f"line search failed after {MAX_HALVINGS} halvings", report)
        u = trial
        energy = total_energy(u, potential)
        report.iterations = it + 1
    u = sign_normalized(u)
    report.finish(u, started)
    return u, report


def nodal_count_1d(u: Field, rel_threshold: float = 1e-8) -> int:
    """Sign changes along a 1D field, ignoring nodes with negligible |u|."""
    vals = u.values.ravel()
    keep = np.abs(vals) > rel_threshold * np.abs(vals).max()
    signs = np.sign(vals[keep])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def single_signed(u: Field, rel_threshold: float = 1e-12) -> bool:
    vals = u.values[u.grid.interior]
    big = np.abs(vals) > rel_threshold * np.abs(vals).max()
    return bool(np.all(vals[big] > 0) or np.all(vals[big] < 0))


def resample(u: Field, grid) -> Field:
    """Linear interpolation of a field onto another grid over the same box (1D/2D/3D)."""
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator([u.grid.axis] * u.grid.dim, u.values)
    pts = np.stack([c.ravel() for c in grid.coords], axis=-1)
    return Field(grid, interp(pts).reshape(grid.shape), zero_boundary=True)


def levels_for(spec: PotentialSpec, grid, tol: float = 1e-8, ground: Field | None = None):
    """Ground state at n and 2n-1 and the resulting level comparison."""
    if not math.isfinite(spec.v_infinity):
        raise NehariError("level comparison needs a finite V_inf")
    pot = bind(spec, grid)
    if ground is None:
        ground, _ = ground_state(pot, tol=tol)
    c_n = total_energy(ground, pot)
    fine = grid.refined()
    fine_u, _ = ground_state(bind(spec, fine), init=resample(ground, fine), tol=tol)
    floor = abs(c_n - total_energy(fine_u, bind(spec, fine)))
    return compare_levels(c_n, spec.v_infinity, grid.dim, floor)
