import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlsv import distorted, dynamics, jost, oracles
from nlsv import potential as pot
from nlsv.dynamics import RunConfig


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(dt=0.0, t_max=1.0)
    with pytest.raises(ValueError):
        RunConfig(dt=0.1, t_max=1.0, scheme="crank")
    with pytest.raises(ValueError):
        RunConfig(dt=0.1, t_max=1.0, snapshot_times=(1.0, 0.5))
    with pytest.raises(ValueError):
        RunConfig(dt=0.1, t_max=1.0, snapshot_times=(0.0, 2.0))
    a = RunConfig(dt=0.1, t_max=1.0, snapshot_times=[0, 1])
    b = RunConfig(dt=0.1, t_max=1.0, snapshot_times=(0.0, 1.0))
    assert a.hash() == b.hash()
    assert a.hash() != RunConfig(dt=0.05, t_max=1.0).hash()


def test_gaussian_data_norm():
    x = np.linspace(-40, 40, 1024, endpoint=False)
    u = dynamics.gaussian_data(x, 0.07, sigma=2.0, p0=0.3)
    assert dynamics.data_norm(u, x) == pytest.approx(0.07, rel=1e-12)


def test_conserved_of_zero():
    x = np.linspace(-5, 5, 64)
    cq = dynamics.conserved_quantities(np.zeros(64), np.ones(64), x)
    assert cq == {"mass": 0.0, "hamiltonian": 0.0}
    with pytest.raises(ValueError):
        dynamics.conserved_quantities(np.zeros(4), np.zeros(4))


def test_flat_linear_matches_oracle():
    x = np.linspace(-80, 80, 2048, endpoint=False)
    cfg = RunConfig(dt=0.5, t_max=4.0, nonlinear=False, snapshot_times=(0.0, 4.0))
    u0 = oracles.flat_gaussian(0.0, x, sigma=1.5, x0=-3.0, p0=0.5)
    traj = dynamics.evolve(u0, cfg, x)
    ref = oracles.flat_gaussian(4.0, x, sigma=1.5, x0=-3.0, p0=0.5)
    assert np.max(np.abs(traj.at(4.0).u - ref)) < 1e-12


@given(a=st.floats(0.0, 3.0), s=st.floats(-2.0, 2.0))
def test_nonlinear_phase_preserves_modulus(a, s):
    x = np.linspace(-20, 20, 256, endpoint=False)
    u0 = a * np.exp(-x**2 + 0.3j * x)
    cfg = RunConfig(dt=abs(s) + 0.1, t_max=0.1, snapshot_times=(0.1,), blowup_factor=1e9)
    traj = dynamics.evolve(u0, cfg, x, propagator=lambda u, h: u)
    np.testing.assert_allclose(np.abs(traj.states[-1].u), np.abs(u0), atol=1e-14)


def test_flat_reversibility():
    x = np.linspace(-60, 60, 1024, endpoint=False)
    u0 = dynamics.gaussian_data(x, 0.3)
    prop = dynamics.FlatPropagator(x)
    np.testing.assert_allclose(prop(prop(u0, 1.7), -1.7), u0, atol=1e-14)


def test_distorted_propagator_unitary_and_reversible():
    spec = pot.gaussian_barrier(x_min=-40, x_max=40, n_x=401)
    b = distorted.basis_for(spec, jost.staggered_k_grid(0.05, 80))
    prop = dynamics.DistortedPropagator(b)
    u0 = prop.project(np.exp(-b.x**2 / 8).astype(complex))
    u1 = prop(u0, 3.0)
    assert np.linalg.norm(prop.coefficients(u1)) == pytest.approx(np.linalg.norm(prop.coefficients(u0)),
                                                                 rel=1e-12)
    np.testing.assert_allclose(prop(u1, -3.0), u0, atol=1e-12)


def test_free_decay_rate():
    x = np.linspace(-400, 400, 4096, endpoint=False)
    t = np.geomspace(5, 60, 12)
    cfg = RunConfig(dt=0.05, t_max=60, nonlinear=False, snapshot_times=tuple(t))
    traj = dynamics.evolve(dynamics.gaussian_data(x, 0.1, sigma=2.0), cfg, x)
    fit = dynamics.decay_fit(traj, window=(5, 60))
    # |u|_inf of a free Gaussian is proportional to (sigma^4 + 4 t^2)^(-1/4)
    exact = np.polyfit(np.log(t), -0.25 * np.log(16 + 4 * t**2), 1)[0]
    assert fit.slope == pytest.approx(exact, abs=1e-3)
    assert fit.slope == pytest.approx(-0.5, abs=0.02)
    with pytest.raises(ValueError):
        dynamics.decay_fit(traj, window=(5, 20))


def test_blowup_guard():
    x = np.linspace(-20, 20, 256, endpoint=False)
    cfg = RunConfig(dt=0.1, t_max=1.0, snapshot_times=(1.0,), blowup_factor=0.5, nonlinear=False)
    with pytest.raises(FloatingPointError):
        dynamics.evolve(np.exp(-x**2 / 4).astype(complex), cfg, x)


def test_reach_guard():
    x = np.linspace(-20, 20, 256, endpoint=False)
    cfg = RunConfig(dt=0.1, t_max=100.0, snapshot_times=(1.0,))
    with pytest.raises(ValueError, match="half-width"):
        dynamics.evolve(np.exp(-x**2), cfg, x)
    lax = RunConfig(dt=0.1, t_max=100.0, snapshot_times=(1.0,), enforce_reach=False)
    with pytest.warns(RuntimeWarning):
        traj = dynamics.evolve(np.exp(-x**2), lax, x)
    assert traj.warnings


def test_distorted_scheme_needs_basis():
    x = np.linspace(-20, 20, 64)
    cfg = RunConfig(dt=0.1, t_max=0.1, scheme="distorted_exact_linear", snapshot_times=(0.1,))
    with pytest.raises(ValueError):
        dynamics.evolve(np.exp(-x**2), cfg, x)


def test_time_reversal():
    x = np.linspace(-60, 60, 1024, endpoint=False)
    v = 0.5 * np.exp(-x**2)
    u0 = dynamics.gaussian_data(x, 0.2)
    cfg = RunConfig(dt=0.01, t_max=2.0, snapshot_times=(0.0, 2.0))
    fwd = dynamics.evolve(u0, cfg, x, v)
    mir = dynamics.mirrored(fwd)
    rev = dynamics.time_reversed(u0, cfg, x, v)
    np.testing.assert_allclose(mir.at(-2.0).u, rev.at(-2.0).u, atol=1e-14)
    # evolving u(-2) forward by 2 returns to u0
    back = dynamics.evolve(rev.at(-2.0).u, RunConfig(dt=0.01, t_max=2.0, snapshot_times=(2.0,)), x, v)
    assert np.max(np.abs(back.states[-1].u - u0)) < 1e-5
    with pytest.raises(ValueError):
        dynamics.mirrored(dynamics.evolve(u0 * np.exp(0.1j * x), cfg, x, v))
    with pytest.raises(KeyError):
        fwd.at(1.0)
