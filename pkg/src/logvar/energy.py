"""The log-NLS energy, its convex/smooth splitting, the residual and log-Sobolev checks.

On a grid the energy is

    J(u) = 1/2 |grad u|^2 + 1/2 int (V+1) u^2 - 1/2 int u^2 log u^2

with the kinetic part taken over links and all integrals by trapezoid weights,
so that ``<residual(u), v>`` is exactly the derivative of J in direction v.
The splitting J = Phi + Psi uses the piecewise F1, F2 below; J itself is
always evaluated in the direct logarithmic form.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import xlogy

from .grid import Field, forward_differences, grad_norm_sq, neg_laplacian
from .potential import BoundPotential

CONVEXITY_THRESHOLD = math.exp(-1.5)


class EnergyError(ValueError):
    pass


@dataclass(frozen=True)
class EnergySplitParams:
    delta: float = math.exp(-2.0)
    p_growth: float = 3.0

    def __post_init__(self):
        if not 0.0 < self.delta <= CONVEXITY_THRESHOLD:
            raise EnergyError(f"delta must lie in (0, e^-1.5], got {self.delta}")
        if not self.p_growth > 2.0:
            raise EnergyError("p_growth must exceed 2")


DEFAULT_SPLIT = EnergySplitParams()


def f1(s, params: EnergySplitParams = DEFAULT_SPLIT):
    s = np.asarray(s, dtype=float)
    d = params.delta
    a = np.abs(s)
    inner = -0.5 * xlogy(s * s, s * s)
    outer = -0.5 * s * s * (math.log(d * d) + 3.0) + 2.0 * d * a - 0.5 * d * d
    return np.where(a < d, inner, outer)


def f1_prime(s, params: EnergySplitParams = DEFAULT_SPLIT):
    s = np.asarray(s, dtype=float)
    d = params.delta
    inner = -2.0 * xlogy(s, np.abs(s)) - s
    outer = -s * (math.log(d * d) + 3.0) + 2.0 * d * np.sign(s)
    return np.where(np.abs(s) < d, inner, outer)


def f2(s, params: EnergySplitParams = DEFAULT_SPLIT):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < params.delta, 0.0, 0.5 * xlogy(s * s, s * s) + f1(s, params))


def f2_prime(s, params: EnergySplitParams = DEFAULT_SPLIT):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < params.delta, 0.0, 2.0 * xlogy(s, np.abs(s)) + s + f1_prime(s, params))


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential_plus: float
    potential_minus: float
    log_term: float
    phi: float
    psi: float
    total_J: float

    def to_json(self) -> dict:
        return asdict(self)


def _finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise EnergyError(f"non-finite {name} term")
    return value


def kinetic(u: Field) -> float:
    return 0.5 * grad_norm_sq(u)


def log_term(u: Field) -> float:
    """``1/2 int u^2 log u^2`` with 0 log 0 = 0."""
    v2 = u.values**2
    return 0.5 * u.grid.integrate(xlogy(v2, v2))


def total_energy(u: Field, potential: BoundPotential) -> float:
    return (
        kinetic(u)
        + 0.5 * u.grid.integrate(potential.signed_weight * u.values**2)
        - log_term(u)
    )


def evaluate(u: Field, potential: BoundPotential, params: EnergySplitParams = DEFAULT_SPLIT) -> EnergyBreakdown:
    grid = u.grid
    if potential.grid != grid:
        raise EnergyError("field and potential live on different grids")
    v2 = u.values**2
    kin = _finite("kinetic", kinetic(u))
    pot_plus = _finite("potential_plus", 0.5 * grid.integrate(potential.plus * v2))
    pot_minus = _finite("potential_minus", 0.5 * grid.integrate(potential.minus * v2))
    log_part = _finite("log_term", 0.5 * grid.integrate(xlogy(v2, v2)))
    phi = _finite("phi", kin + 0.5 * grid.integrate(potential.signed_weight * v2) - grid.integrate(f2(u.values, params)))
    psi = _finite("psi", grid.integrate(f1(u.values, params)))
    total = kin + pot_plus - pot_minus - log_part
    return EnergyBreakdown(kin, pot_plus, pot_minus, log_part, phi, psi, total)


def residual(u: Field, potential: BoundPotential) -> Field:
    """Discrete ``J'(u) = -Lap_h u + V u - u log u^2`` (the L2 Riesz representative)."""
    vals = u.values
    g = neg_laplacian(u) + potential.samples * vals - 2.0 * xlogy(vals, np.abs(vals))
    return Field(u.grid, g, zero_boundary=True)


def energy_change(u: Field, d: Field, potential: BoundPotential) -> float:
    """``J(u + d) - J(u)`` evaluated without the cancellation of two large totals."""
    grid = u.grid
    h = grid.spacing
    du = forward_differences(u.values)
    dd = forward_differences(d.values)
    kin = h ** (grid.dim - 2) * sum(float(np.sum(a * b + 0.5 * b * b)) for a, b in zip(du, dd))
    x, y = u.values, d.values
    quad = grid.integrate(potential.signed_weight * (x * y + 0.5 * y * y))
    v = x + y
    safe = (x != 0.0) & (np.abs(y) < 0.5 * np.abs(x))
    xs = np.where(safe, x, 1.0)
    ratio = np.where(safe, y / xs, 0.0)
    fine = 2.0 * y * (2.0 * x + y) * np.log(np.abs(xs)) + 2.0 * v * v * np.log1p(ratio)
    coarse = xlogy(v * v, v * v) - xlogy(x * x, x * x)
    log_diff = 0.5 * grid.integrate(np.where(safe, fine, coarse))
    return kin + quad - log_diff


@dataclass(frozen=True)
class LogSobolevQuery:
    a: float
    lhs: float
    rhs: float
    slack: float
    scale: float


def log_sobolev(u: Field, a: float) -> LogSobolevQuery:
    """Both sides of ``int u^2 log u^2 <= a^2/pi |grad u|^2 + (log|u|^2 - N(1 + log a)) |u|^2``."""
    if not a > 0:
        raise EnergyError("a must be positive")
    mass = u.l2_sq()
    if mass == 0.0:
        raise EnergyError("log-Sobolev inequality needs a nonzero field")
    v2 = u.values**2
    lhs = u.grid.integrate(xlogy(v2, v2))
    grad_part = a * a / math.pi * grad_norm_sq(u)
    mass_coef = math.log(mass) - u.grid.dim * (1.0 + math.log(a))
    rhs = grad_part + mass_coef * mass
    scale = abs(lhs) + grad_part + abs(mass_coef) * mass
    return LogSobolevQuery(a, lhs, rhs, rhs - lhs, scale)


def optimal_a(u: Field) -> float:
    """Minimizer of the right-hand side over a: ``sqrt(N pi |u|^2 / (2 |grad u|^2))``."""
    g = grad_norm_sq(u)
    if g == 0.0:
        raise EnergyError("optimal a needs a field with nonzero gradient")
    return math.sqrt(u.grid.dim * math.pi * u.l2_sq() / (2.0 * g))


# a with a^2/pi = 1/2: the log-Sobolev gradient coefficient is half the kinetic weight.
COERCIVITY_A = math.sqrt(math.pi / 2.0)


def x_norm_sq(u: Field, potential: BoundPotential) -> float:
    """``|u|^2 = |grad u|^2 + int (V+1)^+ u^2``."""
    return grad_norm_sq(u) + u.grid.integrate(potential.plus * u.values**2)


def coercivity_constant(potential: BoundPotential) -> float:
    """K in ``2 J(u) >= 1/2 |u|^2 - (log |u|_2^2 + K) |u|_2^2``."""
    return potential.max_minus - potential.grid.dim * (1.0 + math.log(COERCIVITY_A))


def coercivity_bound(u: Field, potential: BoundPotential) -> float:
    """Lower bound for 2 J(u) from the log-Sobolev inequality at ``a = sqrt(pi/2)``."""
    mass = u.l2_sq()
    if mass == 0.0:
        raise EnergyError("coercivity bound needs a nonzero field")
    return 0.5 * x_norm_sq(u, potential) - (math.log(mass) + coercivity_constant(potential)) * mass
