"""Multiple solution pairs for coercive potentials.

The fountain scaffold is built from the discrete eigenbasis of
``A = -Lap_h + (V+1)^+``: ``X_k`` spans the first k eigenfields and on the
A-orthogonal complement ``Z_(k-1)`` one has ``|u|^2 >= lambda_k |u|_2^2``, so
``beta_k = lambda_k^(-1/2)`` exactly.  The lower-bound chain

    J(u) >= 1/4 |u|^2 - C2 |u|_2^p - C3 >= 1/4 |u|^2 - C2 beta_k^p |u|^p - C3

evaluated at ``|u| = r_k = 1/beta_k`` gives ``b_k >= lambda_k / 4 - C2 - C3``
with C2, C3 fitted on sampled fields.

Critical points themselves are found with damped Newton on the residual,
either restricted to a parity sector (1D) or deflated away from known pairs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla
from scipy.optimize import linprog

from .energy import residual, total_energy, x_norm_sq
from .grid import Field, operator_matrix
from .nehari import nodal_count_1d, project, sign_normalized
from .potential import BoundPotential, lowest_eigenpairs

log = logging.getLogger(__name__)

DEFLATION_SIGMA = 1.0
SEPARATION = 1e-3
RHO_FACTOR = 10.0


class ScaffoldError(ValueError):
    pass


@dataclass(frozen=True)
class FountainScaffold:
    k_max: int
    eigenvalues: np.ndarray
    eigenfields: tuple
    beta: np.ndarray
    r: np.ndarray
    rho: np.ndarray
    b_estimates: np.ndarray
    c2: float
    c3: float
    p: float
    a_sampled: np.ndarray
    label: str = "fitted"

    @property
    def a_nonpositive(self) -> np.ndarray:
        return self.a_sampled <= 0.0

    def complement(self, u: Field, k: int) -> Field:
        """Component of u in ``Z_(k-1)`` (removes the first k-1 eigen-directions)."""
        out = u.values.copy()
        for phi in self.eigenfields[: k - 1]:
            out -= u.dot(phi) * phi.values
        return Field(u.grid, out)

    def to_json(self) -> dict:
        return {
            "k_max": self.k_max,
            "eigenvalues": self.eigenvalues.tolist(),
            "beta": self.beta.tolist(),
            "r": self.r.tolist(),
            "rho": self.rho.tolist(),
            "b_estimates": self.b_estimates.tolist(),
            "c2": self.c2,
            "c3": self.c3,
            "p": self.p,
            "a_sampled": self.a_sampled.tolist(),
            "label": self.label,
        }


def _sample_fields(potential: BoundPotential, basis, rng, count: int):
    grid = potential.grid
    out = []
    for i in range(count):
        if i % 2 == 0:
            coef = rng.standard_normal(len(basis)) / (1.0 + np.arange(len(basis)))
            vals = sum(c * phi.values for c, phi in zip(coef, basis))
        else:
            vals = np.zeros(grid.shape)
            for _ in range(rng.integers(1, 4)):
                c = rng.uniform(-3.0, 3.0, grid.dim)
                w = rng.uniform(0.4, 2.0)
                r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
                vals = vals + rng.choice([-1.0, 1.0]) * np.exp(-0.5 * r2 / w**2)
        u = Field(grid, vals, zero_boundary=True)
        out.append(u * (10.0 ** rng.uniform(-1.5, 1.5) / u.l2()))
    return out


def fit_chain_constants(potential: BoundPotential, fields, p: float) -> tuple[float, float]:
    """Smallest ``C2 + C3 >= 0`` with ``J(u) >= |u|^2/4 - C2 |u|_2^p - C3`` on the samples."""
    a = np.array([u.l2() ** p for u in fields])
    b = np.array([0.25 * x_norm_sq(u, potential) - total_energy(u, potential) for u in fields])
    res = linprog(c=[1.0, 1.0], A_ub=-np.column_stack([a, np.ones_like(a)]), b_ub=-b, bounds=[(0, None), (0, None)])
    if not res.success:
        raise ScaffoldError(f"constant fit failed: {res.message}")
    return float(res.x[0]), float(res.x[1])


def build_scaffold(
    potential: BoundPotential,
    k_max: int,
    p: float = 3.0,
    samples: int = 200,
    seed: int = 0,
) -> FountainScaffold:
    if not potential.spec.coercive:
        raise ScaffoldError("fountain scaffold needs a coercive potential")
    spec = lowest_eigenpairs(potential, k_max, positive_part=True)
    lam = spec.eigenvalues
    beta = lam**-0.5
    r = 1.0 / beta
    rho = RHO_FACTOR * r
    rng = np.random.default_rng(seed)
    c2, c3 = fit_chain_constants(potential, _sample_fields(potential, spec.eigenfields, rng, samples), p)
    b_est = 0.25 / beta**2 - c2 - c3

    a_sampled = np.empty(k_max)
    for k in range(1, k_max + 1):
        best = -math.inf
        for _ in range(16):
            coef = rng.standard_normal(k)
            u = Field(potential.grid, sum(c * phi.values for c, phi in zip(coef, spec.eigenfields[:k])))
            u = u * (rho[k - 1] / math.sqrt(x_norm_sq(u, potential)))
            best = max(best, total_energy(u, potential))
        a_sampled[k - 1] = best
    return FountainScaffold(k_max, lam, spec.eigenfields, beta, r, rho, b_est, c2, c3, p, a_sampled)


@dataclass(frozen=True)
class SolutionEntry:
    field: Field
    total_J: float
    nodal_count: int
    residual_norm: float
    lower_bound: float
    slack: float


@dataclass
class SolutionSet:
    entries: list = field(default_factory=list)
    warning: str | None = None

    @property
    def complete(self) -> bool:
        return self.warning is None

    def sort(self):
        self.entries.sort(key=lambda e: e.total_J)

    def to_json(self, field_files=None) -> list:
        out = []
        for i, e in enumerate(self.entries):
            item = {
                "index": i,
                "total_J": e.total_J,
                "nodal_count": e.nodal_count,
                "residual_norm": e.residual_norm,
                "b_estimate": e.lower_bound,
                "slack": e.slack,
            }
            if field_files is not None:
                item["field_file"] = field_files[i]
            out.append(item)
        return out


def jacobian_weight(u: Field, potential: BoundPotential) -> np.ndarray:
    """Diagonal part of J''(u): ``V - log u^2 - 2`` (zero nodes clipped)."""
    return potential.samples - np.log(np.maximum(u.values**2, 1e-300)) - 2.0


def _separated(u: Field, found) -> bool:
    for v in found:
        scale = SEPARATION * max(u.l2(), v.l2())
        if (u - v).l2() < scale or (u + v).l2() < scale:
            return False
    return True


def _log_deflation(u: Field, found) -> tuple[float, np.ndarray]:
    """log of the deflation factor and its quadrature gradient."""
    # the trivial critical point u = 0 is always deflated
    n0 = u.l2_sq()
    logm = math.log1p(DEFLATION_SIGMA / n0)
    grad = -2.0 * DEFLATION_SIGMA / (n0 * (n0 + DEFLATION_SIGMA)) * u.values
    for v in found:
        for w in (u - v, u + v):
            n2 = w.l2_sq()
            logm += math.log1p(DEFLATION_SIGMA / n2)
            grad += -2.0 * DEFLATION_SIGMA / (n2 * (n2 + DEFLATION_SIGMA)) * w.values
    return logm, grad


def newton_solve(
    u0: Field,
    potential: BoundPotential,
    tol: float = 1e-8,
    max_iter: int = 200,
    parity: int | None = None,
    found=(),
) -> tuple[Field, float, bool]:
    """Damped Newton on the residual, optionally parity-restricted and deflated.

    Without a parity restriction the merit is ``m(u) |J'(u)|_2`` where ``m`` is the
    deflation factor built from ``found`` and the origin; the Newton step for the
    deflated system is ``delta / (1 - <grad log m, delta>)``.
    """
    grid = potential.grid

    def sym(vals):
        if parity is None:
            return vals
        flipped = vals[(slice(None, None, -1),) * grid.dim]
        return 0.5 * (vals + parity * flipped)

    deflate = parity is None

    def merit(u, r):
        return r.l2() * (math.exp(_log_deflation(u, found)[0]) if deflate else 1.0)

    u = Field(grid, sym(u0.values), zero_boundary=True)
    r = residual(u, potential)
    for _ in range(max_iter):
        rn = r.l2()
        if rn <= tol:
            return u, rn, True
        mat = operator_matrix(grid, jacobian_weight(u, potential))
        delta = grid.from_interior(spla.spsolve(mat, -grid.to_interior(r.values)))
        if deflate:
            _, glog = _log_deflation(u, found)
            c = grid.integrate(glog * delta)
            if abs(1.0 - c) > 1e-12:
                delta = delta / (1.0 - c)
        m0 = merit(u, r)
        t = 1.0
        while t > 1e-8:
            trial = Field(grid, sym(u.values + t * delta), zero_boundary=True)
            rt = residual(trial, potential)
            if merit(trial, rt) < (1.0 - 1e-4 * t) * m0:
                break
            t *= 0.5
        else:
            return u, rn, False
        u, r = trial, rt
    return u, r.l2(), r.l2() <= tol


def find_solutions(
    potential: BoundPotential,
    scaffold: FountainScaffold,
    count: int,
    strategy: str = "symmetry",
    tol: float = 1e-8,
    retries: tuple = (1.0, 0.5, 2.0, 0.25, 4.0),
) -> SolutionSet:
    """``count`` distinct pairs +-u in ascending energy.

    ``symmetry`` (1D): the j-th solution is sought in parity ``(-1)^j`` from the
    j-th eigenfield scaled onto the Nehari manifold, and must have j nodes.
    ``deflation``: Newton on the deflated residual from successive eigenfields.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if strategy not in ("symmetry", "deflation"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "symmetry" and potential.grid.dim != 1:
        raise ValueError("symmetry strategy is 1D only")
    found: list[Field] = []
    warning = None
    n_candidates = scaffold.k_max
    for j in range(count):
        hit = None
        seeds = [j] if strategy == "symmetry" else list(range(n_candidates))
        for idx in seeds:
            if idx >= n_candidates:
                break
            for factor in retries:
                start = project(scaffold.eigenfields[idx], potential).projected * factor
                if strategy == "symmetry":
                    u, rn, ok = newton_solve(start, potential, tol, parity=(-1) ** j)
                    ok = ok and nodal_count_1d(u) == j
                else:
                    u, rn, ok = newton_solve(start, potential, tol, found=found)
                if ok and u.l2() > 1e-6 * start.l2() and _separated(u, found):
                    hit = u
                    break
            if hit is not None:
                break
        if hit is None:
            warning = f"found {len(found)} of {count} requested solutions"
            log.warning(warning)
            break
        found.append(sign_normalized(hit))

    result = SolutionSet(warning=warning)
    for u in found:
        energy = total_energy(u, potential)
        nodes = nodal_count_1d(u) if u.grid.dim == 1 else -1
        result.entries.append(SolutionEntry(u, energy, nodes, residual(u, potential).l2(), math.nan, math.nan))
    result.sort()
    for k, e in enumerate(result.entries):
        bound = float(scaffold.b_estimates[k]) if k < scaffold.k_max else math.nan
        result.entries[k] = SolutionEntry(e.field, e.total_J, e.nodal_count, e.residual_norm, bound, max(0.0, bound - e.total_J))
    return result
