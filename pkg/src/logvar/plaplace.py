"""p-Laplacian version of the energy, residual and Nehari scaling.

    J_p(u) = 1/p sum_links h^(N-p) |du|^p + 1/p int (V+1)|u|^p - 1/p int |u|^p log |u|^p

The kinetic term is link based (sum over axes of |d_i u / h|^p), which reduces
exactly to the p = 2 energy.  Link fluxes use ``(du^2 + eps^2)^((p-2)/2) du``
so that flat links are harmless for p < 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from . import energy, nehari
from .grid import Field, divergence_of_links, forward_differences
from .potential import BoundPotential

FLUX_EPS = 1e-12


class PExponentError(ValueError):
    pass


@dataclass(frozen=True)
class PExponent:
    p: float
    q_growth: float | None = None

    def __post_init__(self):
        if not self.p > 1.0:
            raise PExponentError("p must exceed 1")
        if self.q_growth is not None and not self.q_growth > self.p:
            raise PExponentError("q_growth must exceed p")

    def check_dim(self, dim: int):
        if dim >= 2 and not self.p < dim:
            raise PExponentError(f"p must be < N = {dim}")


def _as_exponent(p) -> PExponent:
    return p if isinstance(p, PExponent) else PExponent(float(p))


def _abs_pow(vals: np.ndarray, p: float) -> np.ndarray:
    return np.abs(vals) ** p


def grad_p_sum(u: Field, p: float) -> float:
    """``sum over links h^(N-p) |du|^p``, the discrete ``int |grad u|^p``."""
    h = u.grid.spacing
    return h ** (u.grid.dim - p) * sum(float(np.sum(_abs_pow(d, p))) for d in forward_differences(u.values))


def log_p_integral(u: Field, p: float) -> float:
    """``int |u|^p log |u|^p``."""
    a = _abs_pow(u.values, p)
    return u.grid.integrate(xlogy(a, a))


def q_form(u: Field, potential: BoundPotential, p: float) -> float:
    return grad_p_sum(u, p) + u.grid.integrate(potential.signed_weight * _abs_pow(u.values, p))


def p_energy(u: Field, potential: BoundPotential, p, check_dim: bool = False) -> float:
    pe = _as_exponent(p)
    if check_dim:
        pe.check_dim(u.grid.dim)
    return (q_form(u, potential, pe.p) - log_p_integral(u, pe.p)) / pe.p


def _signed_pow(vals: np.ndarray, e: float) -> np.ndarray:
    return np.sign(vals) * np.abs(vals) ** e


def p_residual(u: Field, potential: BoundPotential, p) -> Field:
    """``-div_h(|du|^(p-2) du) + V |u|^(p-2) u - |u|^(p-2) u log |u|^p``."""
    pe = _as_exponent(p)
    if pe.p == 2.0:
        return energy.residual(u, potential)
    return general_p_residual(u, potential, pe.p)


def general_p_residual(u: Field, potential: BoundPotential, p: float) -> Field:
    """The quasilinear residual formula without the p = 2 shortcut."""
    pe = _as_exponent(p)
    grid = u.grid
    h = grid.spacing
    fluxes = [(d * d + FLUX_EPS**2) ** ((pe.p - 2.0) / 2.0) * d / h ** (pe.p - 2.0) for d in forward_differences(u.values)]
    kin = divergence_of_links(grid, fluxes)
    vals = u.values
    lower = _signed_pow(vals, pe.p - 1.0)
    logp = pe.p * xlogy(lower, np.abs(vals))
    return Field(grid, kin + potential.samples * lower - logp, zero_boundary=True)


def p_ray_derivative(u: Field, potential: BoundPotential, p, s: float) -> float:
    """``d/ds J_p(s u) = s^(p-1) (Q_p(u) - int |u|^p (log |u|^p + 1) - log s^p |u|_p^p)``."""
    pe = _as_exponent(p)
    mass = u.grid.integrate(_abs_pow(u.values, pe.p))
    inner = q_form(u, potential, pe.p) - log_p_integral(u, pe.p) - mass - pe.p * math.log(s) * mass
    return s ** (pe.p - 1.0) * inner


def p_nehari_scale(u: Field, potential: BoundPotential, p) -> float:
    """Scale s with s u on the p-Nehari manifold:
    ``log s^p = (Q_p(u) - int |u|^p (log |u|^p + 1)) / |u|_p^p``."""
    pe = _as_exponent(p)
    mass = u.grid.integrate(_abs_pow(u.values, pe.p))
    if mass == 0.0:
        raise nehari.NehariError("zero field has no Nehari ray")
    log_sp = (q_form(u, potential, pe.p) - log_p_integral(u, pe.p) - mass) / mass
    return math.exp(log_sp / pe.p)


def lp_norm(u: Field, p: float) -> float:
    return u.grid.integrate(_abs_pow(u.values, p)) ** (1.0 / p)


def assumption_margin(potential: BoundPotential, p, k: int = 4) -> float:
    """Smallest ``Q_p(phi) / |phi|_p^p`` over the lowest eigendirections of -Lap_h + V + 1.

    A positive value is the discrete surrogate of the p-version of the
    spectral positivity hypothesis.
    """
    from .potential import lowest_eigenpairs

    pe = _as_exponent(p)
    spec = lowest_eigenpairs(potential, k)
    return min(q_form(phi, potential, pe.p) / lp_norm(phi, pe.p) ** pe.p for phi in spec.eigenfields)


def p_project(u: Field, potential: BoundPotential, p) -> Field:
    return u * p_nehari_scale(u, potential, p)


def p_ground_state(
    potential: BoundPotential,
    p,
    init: Field | None = None,
    tol: float = 1e-6,
    max_iters: int = 50_000,
):
    """Minimize J_p on the p-Nehari manifold with the p = 2 preconditioner.

    Energy decreases are compared against a round-off floor relative to |J_p|,
    since no cancellation-free difference formula is available for general p.
    """
    import time

    from .flow import (ARMIJO, BACKTRACK, INITIAL_STEP, MAX_HALVINGS, LineSearchError,
                       NonConvergenceError, SolverReport, precondition)

    pe = _as_exponent(p)
    pe.check_dim(potential.grid.dim)
    if pe.p == 2.0:
        return nehari.ground_state(potential, init=init, tol=tol, max_iters=max_iters)
    potential.require_positive()
    started = time.perf_counter()
    u = p_project(init if init is not None else nehari.default_init(potential.grid), potential, pe)
    energy_u = p_energy(u, potential, pe)
    report = SolverReport()
    for it in range(max_iters + 1):
        g = p_residual(u, potential, pe)
        d = precondition(potential, g)
        gd = g.dot(d)
        report.record(u, potential, energy_u, g, gd)
        if report.residual_history[-1] <= tol:
            report.converged = True
            break
        if it == max_iters:
            report.iterations = it
            report.finish(u, started)
            raise NonConvergenceError(f"p ground state not converged after {max_iters} iterations", report)
        tau = INITIAL_STEP
        floor = 1e-14 * max(1.0, abs(energy_u))
        for _ in range(MAX_HALVINGS + 1):
            trial = p_project(u - d * tau, potential, pe)
            e_trial = p_energy(trial, potential, pe)
            if e_trial - energy_u <= -ARMIJO * tau * gd + floor:
                break
            tau *= BACKTRACK
        else:
            report.iterations = it
            report.finish(u, started)
            raise LineSearchError(f"line search failed after {MAX_HALVINGS} halvings", report)
        u, energy_u = trial, e_trial
        report.iterations = it + 1
    u = nehari.sign_normalized(u)
    report.finish(u, started)
    return u, report
