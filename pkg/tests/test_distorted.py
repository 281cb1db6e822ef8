import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from nlsv import distorted, jost, oracles
from nlsv import potential as pot


@given(hnp.arrays(float, 20, elements=st.floats(-10, 10)))
def test_cutoffs_partition_unity(x):
    cp, cm = distorted.chi_plus(x), distorted.chi_minus(x)
    np.testing.assert_allclose(cp + cm, 1.0, atol=1e-15)
    assert np.all((cp >= 0) & (cp <= 1))


def test_cutoff_shape():
    x = np.linspace(-5, 5, 1001)
    c = distorted.chi_plus(x)
    assert np.all(np.diff(c) >= -1e-15)
    assert np.all(c[x <= -2] == 0) and np.all(c[x >= 2] == 1)
    np.testing.assert_allclose(c + c[::-1], 1.0, atol=1e-15)


@pytest.fixture(scope="module")
def barrier_basis():
    spec = pot.gaussian_barrier(x_min=-64.0, x_max=64.0, n_x=513)
    return spec, distorted.basis_for(spec, jost.staggered_k_grid(0.02, 400))


def test_flat_basis_matches_fourier():
    spec = pot.gaussian_barrier(amplitude=0.0, x_min=-40, x_max=40, n_x=801)
    b = distorted.basis_for(spec, jost.staggered_k_grid(0.05, 60))
    f = oracles.flat_gaussian(0.0, b.x, sigma=2.0, x0=3.0, p0=0.4)
    got = b.forward(f).values
    ref = oracles.flat_fourier_gaussian(b.k, sigma=2.0, x0=3.0, p0=0.4)
    assert np.max(np.abs(got - ref)) < 1e-12


def test_parseval_and_roundtrip(barrier_basis):
    spec, b = barrier_basis
    x = b.x
    for c, p in ((-10.0, 0.3), (0.0, 0.0), (12.0, -0.4)):
        f = np.exp(-((x - c) ** 2) / 18 + 1j * p * x)
        ft = b.forward(f)
        assert b.l2_k(ft) / b.l2_x(f) == pytest.approx(1, abs=1e-8)
        assert b.l2_x(b.inverse(ft) - f) / b.l2_x(f) < 1e-6


def test_decomposition(barrier_basis):
    _, b = barrier_basis
    assert distorted.decomposition_defect(b) < 1e-10


def test_part_constants_finite(barrier_basis):
    _, b = barrier_basis
    c = distorted.psi_part_constants(b)
    assert all(math.isfinite(v) and v > 0 for v in c.values())


def test_apply_L_fourth_order():
    errs = []
    for n in (201, 401):
        x = np.linspace(-10, 10, n)
        f = np.exp(-x**2)
        exact = -(4 * x**2 - 2) * f
        errs.append(np.max(np.abs(distorted.apply_L(f, 0 * x, x[1] - x[0]) - exact)))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4, abs=0.3)


def test_diagonalization(barrier_basis):
    spec, b = barrier_basis
    x = b.x
    f = x * np.exp(-(x**2) / 4)
    assert distorted.diagonalization_residual(f, b, pot.sample_potential(spec)) < 1e-3
    assert distorted.diagonalization_residual(0 * x, b, pot.sample_potential(spec)) == 0


def test_profile_undoes_propagation(barrier_basis):
    _, b = barrier_basis
    f = np.exp(-b.x**2 / 8)
    ft = b.forward(f)
    back = distorted.profile(distorted.linear_propagate(ft, 7.0), 7.0)
    np.testing.assert_allclose(back.values, ft.values, atol=1e-15)


def test_shape_errors(barrier_basis):
    _, b = barrier_basis
    with pytest.raises(ValueError):
        b.forward(np.zeros(b.n_x + 1))
    with pytest.raises(ValueError):
        b.inverse(np.zeros(b.n_k + 1))
    with pytest.raises(ValueError):
        distorted.build_basis(b.scattering, None, np.array([-0.5, 0.0, 0.5]), b.x)


def test_k_resolution_warning(barrier_basis):
    _, b = barrier_basis
    with pytest.warns(RuntimeWarning):
        import warnings
        warnings.simplefilter("always")
        b.check_k_resolution(1000.0)
