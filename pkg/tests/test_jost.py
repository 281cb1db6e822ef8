import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlsv import jost, oracles
from nlsv import potential as pot


def test_staggered_grid():
    k = jost.staggered_k_grid(0.1, 5)
    assert len(k) == 10 and not np.any(k == 0)
    np.testing.assert_allclose(k, -k[::-1])


@given(k=st.floats(1e-6, 20.0), d=st.floats(0.0, 30.0))
def test_kernel_bounded_by_distance(k, d):
    # |D_k(d)| = |sin(kd)/k| <= d
    assert abs(complex(jost.dk_kernel(k, d))) <= d * (1 + 1e-12) + 1e-15


@given(k=st.floats(1e-7, 5.0), d=st.floats(0.0, 40.0), order=st.integers(0, 2))
def test_kernel_against_extended_precision(k, d, order):
    mp.mp.dps = 40

    def f(q):
        return mp.mpf(d) if q == 0 else (mp.exp(2j * q * d) - 1) / (2j * q)
    ref = complex(mp.diff(f, mp.mpf(k), order))
    got = complex(jost.dk_kernel(k, d, order))
    assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref), d ** (order + 1))


def test_kernel_derivatives():
    d = np.linspace(0, 3, 7)
    h = 1e-5
    for k in (0.3, 2.0):
        d0 = lambda q: jost.dk_kernel(np.full(7, q), d, 0)  # noqa: E731
        d1 = jost.dk_kernel(np.full(7, k), d, 1)
        np.testing.assert_allclose(d1, (d0(k + h) - d0(k - h)) / (2 * h), atol=1e-8)


def test_zero_potential_gives_one():
    s = pot.gaussian_barrier(amplitude=0.0)
    jf = jost.solve_m(s, jost.staggered_k_grid(0.5, 4))
    np.testing.assert_allclose(jf.m_plus, 1.0, atol=1e-15)
    np.testing.assert_allclose(jf.m_minus, 1.0, atol=1e-15)


@pytest.mark.parametrize("spec", [pot.gaussian_barrier(), pot.sech2_barrier(amplitude=0.5, width=1.5)])
def test_against_ode(spec):
    k = np.array([0.7])
    jf = jost.solve_m(spec, k)
    x = spec.grid.x
    for side in ("+", "-"):
        ref = oracles.jost_ode(spec, 0.7, x, side)
        assert np.max(np.abs(jf.evaluate(side)[0] - ref)) < 1e-8


def test_negative_k_is_conjugate():
    s = pot.gaussian_barrier()
    jf = jost.solve_m(s, np.array([-0.9, 0.9]), derivative_order=1)
    np.testing.assert_allclose(jf.m_plus[0], jf.m_plus[1].conj())
    np.testing.assert_allclose(jf.dk_m_plus[0], -jf.dk_m_plus[1].conj())


def test_reflection_symmetry_of_even_potential():
    s = pot.gaussian_barrier()
    jf = jost.solve_m(s, np.array([1.3]))
    np.testing.assert_allclose(jf.m_minus[0], jf.m_plus[0][::-1], atol=1e-12)


@pytest.mark.parametrize("order", [1, 2])
def test_k_derivatives_against_differences(order):
    s = pot.gaussian_barrier(n_x=1025)
    k, h = 0.8, 1e-4
    jf = jost.solve_m(s, np.array([k - h, k, k + h]), derivative_order=2)
    near = np.abs(s.grid.x) <= 4
    m = jf.m_plus[:, near]
    fd = (m[2] - m[0]) / (2 * h) if order == 1 else (m[2] - 2 * m[1] + m[0]) / h**2
    d = jf.evaluate("+", order, k=np.array([k]))[0][near]
    assert np.max(np.abs(d - fd)) < 1e-6 * np.max(np.abs(d))


def test_volterra_residual_small():
    jf = jost.solve_m(pot.gaussian_barrier(n_x=4097), np.array([0.5, 2.0]))
    assert jost.volterra_residual(jf, "+") < 1e-7
    assert jost.volterra_residual(jf, "-") < 1e-7


def test_picard_matches_triangular_solve():
    s = pot.gaussian_barrier(n_x=241)
    m1, r1 = jost.solve_m_direct(s, 1.1, picard=True)
    m2, r2 = jost.solve_m_direct(s, 1.1, picard=False)
    assert r1 < 1e-12 and r2 < 1e-12
    np.testing.assert_allclose(m1, m2, atol=1e-11)
    jf = jost.solve_m(s, np.array([1.1]), refine=False)
    np.testing.assert_allclose(jf.m_plus[0], m2, atol=1e-10)


def test_zero_energy_limit():
    s = pot.gaussian_barrier()
    m0, I0 = jost.solve_m_zero(s)
    assert I0 > 0
    jf = jost.solve_m(s, np.array([1e-3]))
    assert np.max(np.abs(jf.m_plus[0] - m0)) < 0.05 * np.max(np.abs(m0))
    assert I0 == pytest.approx(jf.totals("+")["B"][0].real, rel=1e-3)


def test_m_bounds_finite_and_stable():
    s = pot.gaussian_barrier(n_x=513)
    jf = jost.solve_m(s, jost.staggered_k_grid(0.25, 8), derivative_order=1)
    rep = jost.check_m_bounds(jf)
    assert rep.finite and rep.stable


def test_argument_errors():
    s = pot.gaussian_barrier()
    with pytest.raises(ValueError):
        jost.solve_m(s, np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        jost.solve_m(s, np.array([1.0]), derivative_order=3)
    with pytest.raises(ValueError):
        jost.solve_m(s, np.array([1.0]), side="left")
    jf = jost.solve_m(s, np.array([1.0]), side="+")
    with pytest.raises(ValueError):
        jf.evaluate("-")
    with pytest.raises(ValueError):
        jf.evaluate("+", k=np.array([2.0]))
