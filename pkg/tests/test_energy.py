import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logvar.energy import (
    COERCIVITY_A,
    EnergyError,
    EnergySplitParams,
    coercivity_bound,
    energy_change,
    evaluate,
    f1,
    f1_prime,
    f2,
    log_sobolev,
    optimal_a,
    residual,
    total_energy,
)
from logvar.fields import bump_mixture, smooth_direction
from logvar.grid import Field, Grid
from logvar.potential import PotentialSpec, bind

GRID = Grid(1, 12.0, 481)
WELL = bind(PotentialSpec.gaussian_well(0.5), GRID)
seeds = st.integers(0, 2**32 - 1)


def test_split_constants():
    d = math.exp(-2.0)
    assert float(f1(d)) == pytest.approx(2.0 * math.exp(-4.0), rel=1e-14)
    assert float(f1_prime(d)) == pytest.approx(3.0 * math.exp(-2.0), rel=1e-14)
    assert float(f1(0.0)) == 0.0


def test_split_params_validated():
    with pytest.raises(EnergyError):
        EnergySplitParams(delta=0.5)
    with pytest.raises(EnergyError):
        EnergySplitParams(p_growth=2.0)
    EnergySplitParams(delta=math.exp(-1.5))


def test_f2_vanishes_inside_delta():
    s = np.linspace(-0.13, 0.13, 501)
    assert not np.any(f2(s))


def test_f1_outer_branch_is_quadratic_growth():
    s = np.array([1.0, 2.0, 4.0])
    # f1'' = 1 on the outer branch: second differences equal the step squared
    vals = f1(s - 0.5) - 2 * f1(s) + f1(s + 0.5)
    np.testing.assert_allclose(vals, 0.25, rtol=1e-12)


def test_zero_field():
    z = GRID.zeros()
    assert total_energy(z, WELL) == 0.0
    assert residual(z, WELL).is_zero()


def test_breakdown_reconciles(grid1, well1, rng):
    u = bump_mixture(grid1, rng)
    b = evaluate(u, well1)
    assert b.kinetic + b.potential_plus - b.potential_minus - b.log_term == pytest.approx(b.total_J, rel=1e-14)
    assert b.phi + b.psi == pytest.approx(b.total_J, rel=1e-12)
    assert set(b.to_json()) == {"kinetic", "potential_plus", "potential_minus", "log_term", "phi", "psi", "total_J"}


def test_breakdown_grid_mismatch(well1):
    with pytest.raises(EnergyError):
        evaluate(GRID.zeros(), well1)


def test_tiny_tails_do_not_overflow(grid1, well1):
    u = grid1.sample(lambda x: np.exp(-0.5 * (x / 0.4) ** 2))
    assert np.all(np.isfinite(residual(u, well1).values))
    assert math.isfinite(energy_change(u, u * 0.1, well1))


@given(seed=seeds)
def test_residual_is_gradient(seed):
    rng = np.random.default_rng(seed)
    u = bump_mixture(GRID, rng)
    v = Field(GRID, u.values * smooth_direction(GRID, rng).values)
    eps = 1e-5
    fd = (total_energy(u + v * eps, WELL) - total_energy(u - v * eps, WELL)) / (2 * eps)
    assert fd == pytest.approx(residual(u, WELL).dot(v), rel=1e-6, abs=1e-9)


@given(seed=seeds, t=st.floats(-0.4, 0.4))
def test_energy_change_matches_difference(seed, t):
    rng = np.random.default_rng(seed)
    u = bump_mixture(GRID, rng)
    d = smooth_direction(GRID, rng) * t
    direct = total_energy(u + d, WELL) - total_energy(u, WELL)
    assert energy_change(u, d, WELL) == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_energy_change_resolves_tiny_steps(grid1, flat1):
    u = grid1.sample(lambda x: np.exp(-x * x / 2))
    d = u * 1e-9
    # J(s u) = s^2/2 (Q - int u^2 log u^2 - log s^2 |u|^2), differentiate at s = 1
    slope = residual(u, flat1).dot(u)
    assert energy_change(u, d, flat1) == pytest.approx(1e-9 * slope, rel=1e-6)


def test_log_sobolev_gaussian_equality():
    g = Grid(1, 8.0, 8001)
    u = g.sample(lambda x: np.exp(-x * x / 2))
    assert optimal_a(u) == pytest.approx(math.sqrt(math.pi), abs=1e-6)
    q = log_sobolev(u, optimal_a(u))
    assert abs(q.slack) <= 1e-6 * q.scale


def test_log_sobolev_errors(grid1):
    with pytest.raises(EnergyError):
        log_sobolev(grid1.zeros(), 1.0)
    with pytest.raises(EnergyError):
        log_sobolev(grid1.sample(lambda x: np.exp(-x * x)), 0.0)
    with pytest.raises(EnergyError):
        optimal_a(grid1.zeros())


@given(seed=seeds, a=st.floats(0.1, 10.0))
def test_log_sobolev_holds_on_mixtures(seed, a):
    u = bump_mixture(Grid(1, 12.0, 961), np.random.default_rng(seed), n_bumps=(2, 4))
    q = log_sobolev(u, a)
    assert q.slack >= -1e-10 * q.scale


@given(seed=seeds, k=st.floats(2.0, 6.0))
def test_optimal_a_minimizes_rhs(seed, k):
    u = bump_mixture(GRID, np.random.default_rng(seed))
    a0 = optimal_a(u)
    assert log_sobolev(u, a0).rhs <= min(log_sobolev(u, a0 * 1.1).rhs, log_sobolev(u, a0 / 1.1).rhs)


@given(seed=seeds, scale=st.floats(0.05, 20.0))
def test_coercivity_bound_is_a_lower_bound(seed, scale):
    u = bump_mixture(GRID, np.random.default_rng(seed)) * scale
    assert 2.0 * total_energy(u, WELL) >= coercivity_bound(u, WELL) - 1e-10 * abs(coercivity_bound(u, WELL))


def test_coercivity_a():
    assert COERCIVITY_A**2 / math.pi == pytest.approx(0.5)
