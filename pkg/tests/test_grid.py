import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logvar.fields import bump_mixture
from logvar.grid import (
    Field,
    Grid,
    GridError,
    apply_operator,
    boundary_mass,
    default_half_width,
    default_points,
    divergence_of_links,
    forward_differences,
    grad_norm_sq,
    neg_laplacian,
    operator_matrix,
)


def test_defaults_by_dimension():
    assert (default_half_width(1), default_points(1)) == (12.0, 961)
    assert (default_half_width(2), default_points(2)) == (8.0, 161)
    assert (default_half_width(3), default_points(3)) == (8.0, 49)


@pytest.mark.parametrize("dim", [0, 4])
def test_bad_dimension(dim):
    with pytest.raises(GridError, match="dim must be 1, 2, or 3"):
        Grid(dim, 1.0, 11)


def test_bad_sizes():
    with pytest.raises(GridError):
        Grid(1, -1.0, 11)
    with pytest.raises(GridError):
        Grid(1, 1.0, 2)


def test_geometry(grid1):
    assert grid1.spacing == pytest.approx(24.0 / 960)
    assert grid1.shape == (961,)
    assert grid1.axis[0] == -12.0 and grid1.axis[-1] == 12.0
    assert grid1.weights.sum() == pytest.approx(24.0, rel=1e-14)
    assert grid1.refined().points_per_axis == 1921


@pytest.mark.parametrize("dim,n", [(1, 401), (2, 81), (3, 49)])
def test_gaussian_integral(dim, n):
    g = Grid(dim, 8.0, n)
    assert g.integrate(np.exp(-g.radius_sq)) == pytest.approx(math.pi ** (dim / 2), rel=1e-10)


def test_integrate_rejects_bad_input(grid1):
    with pytest.raises(GridError, match="non-finite integrand"):
        grid1.integrate(np.full(grid1.shape, np.inf))
    with pytest.raises(GridError):
        grid1.integrate(np.zeros(5))


def test_field_is_immutable_and_zeroes_boundary(grid1):
    u = Field(grid1, np.ones(grid1.shape), zero_boundary=True)
    assert u.values[0] == 0.0 and u.values[-1] == 0.0
    with pytest.raises((ValueError, AttributeError)):
        u.values[3] = 2.0
    with pytest.raises(AttributeError):
        u.values = np.zeros(grid1.shape)


def test_field_rejects_nan(grid1):
    with pytest.raises(GridError):
        Field(grid1, np.full(grid1.shape, np.nan))


def test_field_grid_mismatch(grid1):
    with pytest.raises(GridError):
        grid1.zeros() + Grid(1, 12.0, 101).zeros()


def test_field_algebra(grid1, rng):
    u, v = bump_mixture(grid1, rng), bump_mixture(grid1, rng)
    np.testing.assert_allclose((u + v - v).values, u.values, atol=1e-14)
    assert (u * 2.0).l2_sq() == pytest.approx(4.0 * u.l2_sq())
    assert (-u).dot(v) == pytest.approx(-u.dot(v))
    assert grid1.zeros().is_zero()


@pytest.mark.parametrize("dim,n", [(1, 61), (2, 21), (3, 11)])
def test_operator_matrix_matches_stencil(dim, n, rng):
    g = Grid(dim, 3.0, n)
    u = Field(g, rng.standard_normal(g.shape), zero_boundary=True)
    w = rng.uniform(0.5, 2.0, g.shape)
    direct = apply_operator(u, w).values
    via_matrix = g.from_interior(operator_matrix(g, w) @ g.to_interior(u.values))
    np.testing.assert_allclose(direct, via_matrix, atol=1e-10)


@pytest.mark.parametrize("dim,n", [(1, 61), (2, 21), (3, 11)])
def test_links_divergence_is_laplacian(dim, n, rng):
    g = Grid(dim, 3.0, n)
    u = Field(g, rng.standard_normal(g.shape), zero_boundary=True)
    m = g.neg_laplacian_matrix @ g.to_interior(u.values)
    np.testing.assert_allclose(g.to_interior(divergence_of_links(g, forward_differences(u.values))), m, rtol=1e-12, atol=1e-9)


@given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([1, 2]))
def test_summation_by_parts(seed, dim):
    """<-Lap_h u, v> equals the link form whose quadratic part is |grad u|^2."""
    g = Grid(dim, 4.0, 41 if dim == 1 else 21)
    rng = np.random.default_rng(seed)
    u = Field(g, rng.standard_normal(g.shape), zero_boundary=True)
    v = Field(g, rng.standard_normal(g.shape), zero_boundary=True)
    lhs = g.integrate(neg_laplacian(u) * v.values)
    rhs = g.spacing ** (dim - 2) * sum(float(np.sum(a * b)) for a, b in zip(forward_differences(u.values), forward_differences(v.values)))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
    assert grad_norm_sq(u) == pytest.approx(g.integrate(neg_laplacian(u) * u.values), rel=1e-10)


def test_boundary_mass_detects_wide_fields(grid1):
    narrow = grid1.sample(lambda x: np.exp(-x * x))
    wide = grid1.sample(lambda x: np.exp(-x * x / 400.0))
    assert boundary_mass(narrow) < 1e-30
    assert boundary_mass(wide) > 1e-3
