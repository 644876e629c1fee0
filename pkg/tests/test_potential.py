import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logvar.grid import Grid, apply_operator
from logvar.potential import (
    PotentialError,
    PotentialSpec,
    SpectralPositivityError,
    bind,
    lowest_eigenpairs,
    positivity_check,
)


def test_kinds_and_flags():
    assert PotentialSpec.constant(0.3).v_infinity == 0.3
    assert PotentialSpec.harmonic().v_infinity == math.inf
    assert PotentialSpec.harmonic().coercive
    assert PotentialSpec.gaussian_well(0.0).is_flat
    assert not PotentialSpec.gaussian_well(0.5).is_flat
    with pytest.raises(PotentialError):
        PotentialSpec("quartic")
    with pytest.raises(PotentialError):
        PotentialSpec.gaussian_well(-1.0)
    with pytest.raises(PotentialError):
        PotentialSpec.harmonic(0.0)


def test_well_samples(grid1):
    v = PotentialSpec.gaussian_well(0.5, 1.0, 0.2).evaluate(grid1)
    assert v[480] == pytest.approx(0.2 - 0.5)
    assert v[0] == pytest.approx(0.2, abs=1e-60)


def test_table_size_checked(grid1):
    spec = PotentialSpec.from_table(np.zeros(10), 0.0)
    with pytest.raises(PotentialError):
        spec.evaluate(grid1)
    ok = PotentialSpec.from_table(np.linspace(0, 1, grid1.size), 0.0)
    assert bind(ok, grid1).samples.shape == grid1.shape


def test_bound_parts(well1):
    np.testing.assert_allclose(well1.plus - well1.minus, well1.signed_weight)
    assert well1.max_minus == 0.0
    assert well1.solver(1.0) is well1.solver(1.0)


def test_flat_lowest_eigenvalue(flat1):
    # Dirichlet box [-12, 12]: 1 + (pi / 24)^2 up to O(h^2)
    lam = lowest_eigenpairs(flat1, 1).eigenvalues[0]
    assert lam == pytest.approx(1.0 + (math.pi / 24.0) ** 2, rel=1e-5)


def test_oscillator_spectrum():
    pot = bind(PotentialSpec.harmonic(), Grid(1, 8.0, 1601))
    info = lowest_eigenpairs(pot, 8)
    np.testing.assert_allclose(info.eigenvalues, 2.0 * np.arange(1, 9), atol=1e-3)
    for phi in info.eigenfields:
        assert phi.l2() == pytest.approx(1.0, rel=1e-12)
    gram = np.array([[a.dot(b) for b in info.eigenfields] for a in info.eigenfields])
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-8)


def test_eigenpairs_satisfy_equation(harmonic1):
    info = lowest_eigenpairs(harmonic1, 4)
    for lam, phi in zip(info.eigenvalues, info.eigenfields):
        r = apply_operator(phi, harmonic1.signed_weight) - phi * lam
        assert r.l2() <= 1e-6 * lam


def test_positivity_and_sign_failure(grid1, well1):
    ok, margin = positivity_check(lowest_eigenpairs(well1, 1))
    assert ok and margin == pytest.approx(0.8806, abs=1e-3)
    deep = bind(PotentialSpec.gaussian_well(50.0), grid1)
    ok, margin = positivity_check(lowest_eigenpairs(deep, 1))
    assert not ok and margin < -40
    with pytest.raises(SpectralPositivityError):
        deep.require_positive()


def test_spectrum_json(harmonic1):
    data = lowest_eigenpairs(harmonic1, 3).to_json()
    assert data["k"] == 3 and data["positive"]
    assert len(data["eigenvalues"]) == 3


def test_k_range(flat1):
    with pytest.raises(ValueError):
        lowest_eigenpairs(flat1, 0)


@given(depth=st.floats(0.0, 1.5), sigma=st.floats(0.5, 2.0))
def test_eigenvalues_sorted_and_bounded_by_rayleigh(depth, sigma):
    g = Grid(1, 8.0, 161)
    pot = bind(PotentialSpec.gaussian_well(depth, sigma), g)
    info = lowest_eigenpairs(pot, 3)
    assert np.all(np.diff(info.eigenvalues) > 0)
    # the lowest eigenvalue is below every Rayleigh quotient, e.g. of a Gaussian
    trial = g.sample(lambda x: np.exp(-x * x / 2))
    rq = trial.dot(apply_operator(trial, pot.signed_weight)) / trial.l2_sq()
    assert info.eigenvalues[0] <= rq + 1e-12
    # deepening the well lowers the spectrum: compare with the flat case
    flat = lowest_eigenpairs(bind(PotentialSpec.constant(0.0), g), 1).eigenvalues[0]
    assert info.eigenvalues[0] <= flat + 1e-10
