import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nlsv import asymptotics as asy
from nlsv import distorted, dynamics, jost, oracles, scattering
from nlsv import potential as pot

Q = 1 / (4 * math.sqrt(2 * math.pi))      # b(t, 0)


def history(times, k, f):
    return asy.ProfileHistory(np.asarray(times, float), k, np.asarray(f, complex))


# --- corrections ------------------------------------------------------------

@given(st.lists(st.floats(0.01, 5.0), min_size=2, max_size=6))
def test_interval_weights_exact_for_linear(gaps):
    t = np.concatenate([[0.0], np.cumsum(gaps)])
    wa, wb = asy._interval_weights(t)
    # integrate g(s) = 2 + 3s exactly
    g = 2 + 3 * t
    got = np.sum(wa * g[:-1] + wb * g[1:])
    exact = 3 * t[-1] - math.log1p(t[-1])
    assert got == pytest.approx(exact, rel=1e-10)
    assert np.all(wa > 0) and np.all(wb > 0)


def test_correct_plus_constant_modulus():
    k = jost.staggered_k_grid(0.1, 20)
    t = np.linspace(0, 30, 61)
    f = np.outer(np.exp(-0.2j * t), 0.3 * np.exp(-k**2))
    mp = asy.correct_plus(history(t, k, f))
    np.testing.assert_allclose(np.abs(mp.W), np.abs(f), atol=1e-16)
    expected = asy.LOG_PHASE_COEF * np.abs(f[-1]) ** 2 * math.log1p(30)
    np.testing.assert_allclose(mp.accumulated_phase[-1], expected, rtol=1e-12)
    zero = asy.correct_plus(history(t, k, 0 * f))
    assert np.all(zero.W == 0)
    with pytest.raises(ValueError):
        asy.correct_plus(history(-t, k, f))


def test_hermitian_exp():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        M = A + A.conj().T
        np.testing.assert_allclose(asy._hermitian_exp(M), expm(1j * M), atol=1e-13)
    np.testing.assert_allclose(asy._hermitian_exp(np.zeros((2, 2))), np.eye(2))


def test_correct_minus_flat_is_scalar():
    k = jost.staggered_k_grid(0.1, 20)
    t = -np.linspace(0, 40, 81)
    f = np.broadcast_to(0.4 * np.exp(-k**2) * (1 + 0.5j * k), (len(t), len(k)))
    h = history(t, k, f)
    sd = scattering.flat_scattering(h.kpos)
    mm = asy.correct_minus(h, sd)
    mp = asy.correct_plus(history(-t, k, f))
    # with S = I both components get exp(-i coef |f|^2 log(1+|t|))
    np.testing.assert_allclose(asy.pair_to_full(mm.W[-1]), mp.W[-1].conj() * f[-1] / np.conj(f[-1]),
                               atol=1e-14)
    assert mm.unitary_defect < 1e-14


def test_correct_minus_modulus_with_barrier():
    spec = pot.gaussian_barrier()
    kpos = jost.staggered_k_grid(0.1, 30)[30:]
    sd = scattering.scattering_data(spec, kpos)
    k = np.concatenate([-kpos[::-1], kpos])
    rng = np.random.default_rng(0)
    t = -np.geomspace(1, 1000, 40)
    f = 0.3 * (rng.normal(size=(40, 60)) + 1j * rng.normal(size=(40, 60)))
    mm = asy.correct_minus(history(t, k, f), sd)
    Z = history(t, k, f).Z
    np.testing.assert_allclose(np.linalg.norm(mm.W, axis=-1), np.linalg.norm(Z, axis=-1), rtol=1e-12)
    assert mm.unitary_defect < 1e-10
    bad = scattering.flat_scattering(kpos)
    bad.R_plus[:] = 0.5
    bad._splines.clear()
    with pytest.raises(ValueError, match="self-adjoint"):
        asy.correct_minus(history(t, k, f), bad)


# --- oscillatory coefficients ----------------------------------------------

def test_lp_cutoff():
    x = np.linspace(-3, 3, 601)
    p = asy.lp_cutoff(x)
    assert np.all(p[np.abs(x) <= 1.25] == 1) and np.all(p[np.abs(x) >= 1.6] == 0)
    np.testing.assert_allclose(p, p[::-1], atol=1e-12)
    assert np.all(np.diff(p[x >= 0]) <= 1e-15)


def test_oscillatory_limits():
    y = np.array([0.0, 5.0, 50.0])
    oc = asy.oscillatory_coeffs(100.0, np.concatenate([-y[1:], y]))
    b = dict(zip(oc.y, oc.b_values))
    assert b[0.0] == pytest.approx(Q, abs=1e-12)
    assert abs(b[5.0] + b[-5.0] - 2 * Q) < 1e-12
    # large y: b -> 1/(2 sqrt(2 pi)), and b(-y) -> 0
    assert abs(b[50.0] - 2 * Q) < 0.01 * 2 * Q
    assert abs(b[-50.0]) < 0.01 * 2 * Q
    neg = asy.oscillatory_coeffs(-100.0, np.array([50.0]))
    assert abs(neg.b[0] - Q * (1 - np.exp(-2j * 50.0**2))) < 0.01 * 2 * Q
    np.testing.assert_allclose(neg.h, oc.h[-1:].conj())


def test_oscillatory_errors():
    with pytest.raises(ValueError):
        asy.oscillatory_coeffs(0.0, [1.0])
    with pytest.raises(ValueError):
        asy.oscillatory_coeffs(10.0, [1.0], alpha=0.2, rho=0.05)


def test_btable_matches_direct():
    tab = asy.BTable(1.0, 50.0, n_t=17)
    y = np.linspace(-20, 20, 41)
    for t in (3.0, -17.0, 42.0):
        direct = asy.oscillatory_coeffs(t, y).b
        # tabulated nodes are log-spaced, so compare at a node and in between
        assert np.max(np.abs(tab.b(t, y) - direct)) < 2e-3
    node = math.exp(tab.logt[5])
    assert np.max(np.abs(tab.b(node, y) - asy.oscillatory_coeffs(node, y).b)) < 1e-4
    with pytest.raises(ValueError):
        tab.b(5.0, np.array([tab.y_max + 1]))


# --- reduced ODE --------------------------------------------------------------

@pytest.fixture(scope="module")
def btab():
    return asy.BTable(1.0, 40.0, n_t=17)


def test_ode_flat_log_phase(btab):
    kp = np.array([0.3, 0.8])
    sd = scattering.flat_scattering(kp)
    Z0 = np.array([[0.5, 0.2j], [0.1, 0.3]])
    t, Z = asy.reduced_ode_evolve(Z0, sd, kp, 2.0, 30.0, dt=0.02, btab=btab)
    # V = 0: b(y) + b(-y) = 1/(2 sqrt(2 pi)) gives dZ/dt = -i coef |Z|^2 Z / t
    w = asy.LOG_PHASE_COEF * np.abs(Z0) ** 2 * math.log(15.0)
    np.testing.assert_allclose(Z[-1], Z0 * np.exp(-1j * w), atol=1e-6)
    t0, Zz = asy.reduced_ode_evolve(0 * Z0, sd, kp, 2.0, 3.0, btab=btab)
    assert np.all(Zz == 0)


def test_ode_guards(btab):
    kp = np.array([0.5])
    sd = scattering.flat_scattering(kp)
    with pytest.raises(ValueError):
        asy.reduced_ode_evolve(np.ones((1, 2)), sd, kp, 0.5, 2.0, btab=btab)
    with pytest.raises(FloatingPointError):
        asy.reduced_ode_evolve(np.ones((1, 2)), sd, kp, 1.0, 20.0, dt=0.5, btab=btab, coef=50.0)


# --- physical space ------------------------------------------------------------

def test_physical_asymptotics_flat_gaussian():
    k = np.linspace(-4, 4, 801)
    f = oracles.flat_fourier_gaussian(k, sigma=1.0)
    sd = scattering.flat_scattering(np.linspace(0.005, 4, 800))
    res = []
    for t in (10.0, 40.0, 160.0):
        x = np.linspace(-4 * t, 4 * t, 401)
        u = oracles.flat_gaussian(t, x, sigma=1.0)
        pred = asy.physical_asymptotics(f, k, t, x)
        res.append(np.max(np.abs(u - pred)) * math.sqrt(t))
        # real data: u(-t) = conj u(t)
        neg = asy.physical_asymptotics(f, k, -t, x, sd=sd)
        assert np.max(np.abs(neg - u.conj())) * math.sqrt(t) < 2 * res[-1] + 1e-12
    assert res[0] > res[1] > res[2]
    assert res[2] < 0.01
    assert np.all(asy.physical_asymptotics(0 * f, k, 5.0, np.linspace(-1, 1, 5)) == 0)
    with pytest.raises(ValueError):
        asy.physical_asymptotics(f, k, 1.0, np.array([100.0]))
    with pytest.raises(ValueError):
        asy.physical_asymptotics(f, k, -1.0, np.array([1.0]))


def test_extract_profiles_constant_for_free_flow():
    spec = pot.gaussian_barrier(amplitude=0.0, x_min=-100, x_max=100, n_x=1601)
    b = distorted.basis_for(spec, jost.staggered_k_grid(0.05, 80))
    x = b.x
    cfg = dynamics.RunConfig(dt=0.05, t_max=5.0, nonlinear=False, snapshot_times=(0.0, 2.0, 5.0))
    traj = dynamics.evolve(dynamics.gaussian_data(x, 0.1, sigma=2.0), cfg, x)
    hist = asy.extract_profiles(traj, b)
    assert np.max(np.abs(hist.f_tilde - hist.f_tilde[0])) < 1e-10 * np.max(np.abs(hist.f_tilde))
    with pytest.raises(KeyError):
        hist.index(1.0)
