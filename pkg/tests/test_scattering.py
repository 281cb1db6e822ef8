import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlsv import jost, oracles, scattering
from nlsv import potential as pot


def sech2_T2(a, w, k):
    """|T|^2 for V = a sech^2(x/w) (hypergeometric closed form)."""
    q = 4 * a * w * w - 1
    c2 = math.cosh(math.pi / 2 * math.sqrt(q)) ** 2 if q > 0 else math.cos(math.pi / 2 * math.sqrt(-q)) ** 2
    s2 = np.sinh(math.pi * k * w) ** 2
    return s2 / (s2 + c2)


def test_flat():
    sd = scattering.scattering_data(pot.gaussian_barrier(amplitude=0.0), np.array([0.1, 1.0, 4.0]))
    np.testing.assert_allclose(sd.T, 1.0, atol=1e-14)
    np.testing.assert_allclose(sd.R_plus, 0.0, atol=1e-14)
    f = scattering.flat_scattering(np.array([0.5]))
    assert f.T[0] == 1 and f.unitarity_defect[0] == 0


@pytest.mark.parametrize("a,w", [(1.0, 1.0), (0.1, 1.0), (2.0, 0.7)])
def test_sech2_closed_form(a, w):
    k = np.array([0.3, 1.0, 2.5])
    sd = scattering.scattering_data(pot.sech2_barrier(amplitude=a, width=w), k)
    np.testing.assert_allclose(np.abs(sd.T) ** 2, sech2_T2(a, w, k), atol=1e-10)


@given(a=st.floats(0.2, 3.0), L=st.floats(0.3, 2.0), k=st.floats(0.2, 5.0))
def test_square_barrier_property(a, L, k):
    spec = pot.PotentialSpec("square_barrier", {"amplitude": a, "half_width": L}, 7.0,
                             pot.Grid(-2 * L, 2 * L, 401))
    sd = scattering.scattering_data(spec, np.array([k]))
    T, R, _ = oracles.square_barrier_TR(a, L, k)
    assert abs(abs(sd.T[0]) ** 2 - abs(T[0]) ** 2) < 1e-6
    assert abs(sd.R_minus[0] - R[0]) < 1e-5


def test_unitarity_and_orthogonality():
    sd = scattering.scattering_data(pot.sech2_barrier(), np.linspace(0.05, 6, 60))
    assert sd.unitarity_defect.max() < 1e-9
    assert sd.orthogonality_defect.max() < 1e-9
    S, Sinv = scattering.scattering_matrix(sd, sd.k_grid)
    np.testing.assert_allclose(S @ Sinv, np.broadcast_to(np.eye(2), S.shape), atol=1e-9)


def test_asymmetric_potential_has_distinct_reflections():
    x = np.linspace(-12, 12, 2049)
    v = np.exp(-(x - 1) ** 2) + 0.5 * np.exp(-4 * (x + 1) ** 2)
    sd = scattering.scattering_data(pot.custom_samples(x, v), np.array([0.4, 1.0]))
    assert np.all(np.abs(sd.R_plus - sd.R_minus) > 1e-3)
    np.testing.assert_allclose(np.abs(sd.R_plus), np.abs(sd.R_minus), rtol=1e-8)
    assert sd.orthogonality_defect.max() < 1e-8


def test_coefficients_interpolation_and_conjugation():
    spec = pot.gaussian_barrier()
    sd = scattering.scattering_data(spec, np.linspace(0.02, 4, 200))
    kq = np.array([0.333, 1.777])
    T, Rp, _ = sd.coefficients(kq)
    ref = scattering.scattering_data(spec, kq)
    np.testing.assert_allclose(T, ref.T, atol=1e-6)
    np.testing.assert_allclose(Rp, ref.R_plus, atol=1e-6)
    Tn, _, _ = sd.coefficients(-kq)
    np.testing.assert_allclose(Tn, T.conj())
    with pytest.raises(ValueError):
        sd.coefficients(np.array([5.0]))


def test_T_derivative():
    spec = pot.gaussian_barrier()
    k, h = 0.9, 1e-5
    sd = scattering.scattering_data(spec, np.array([k - h, k, k + h]), derivative_order=1)
    fd = (sd.T[2] - sd.T[0]) / (2 * h)
    assert abs(sd.dk_T[1] - fd) < 1e-7
    fdr = (sd.R_minus[2] - sd.R_minus[0]) / (2 * h)
    assert abs(sd.dk_R_minus[1] - fdr) < 1e-7
    assert scattering.derivative_bound(sd) > 0


def test_genericity():
    g = scattering.genericity_report(pot.gaussian_barrier())
    assert g.is_generic and not g.inconclusive
    assert abs(g.T_at_kmin) <= 2 * abs(g.T_slope_at_zero) * g.k_min
    assert abs(g.R_plus_at_kmin + 1) < 0.05
    assert g.wronskian_integral == pytest.approx(g.integral_direct, rel=1e-3)
    flat = scattering.genericity_report(pot.gaussian_barrier(amplitude=0.0))
    assert not flat.is_generic


def test_jost_connection_formula():
    spec = pot.gaussian_barrier()
    jf = jost.solve_m(spec, jost.staggered_k_grid(0.2, 10))
    sd = scattering.compute_TR(jf)
    assert scattering.fpm_consistency(jf, sd) < 1e-9
    assert sd.cross_check.max() < 1e-10
