"""
Independent reference solutions used to validate the main solvers.

Nothing here shares code with the Volterra sweep or the distorted
transform; each oracle is derived from a different formulation.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .potential import PotentialSpec


def jost_ode(spec: PotentialSpec, k: float, x_eval, side: str = "+",
             rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """m_side(x,k) by integrating m'' + 2ik m' = V m (DOP853).

    For m_+ the integration starts at the right end of the grid with m = 1,
    m' = 0 and runs leftwards; m_- uses the mirror equation
    m'' - 2ik m' = V m from the left end.  Breakpoints of piecewise
    potentials split the integration so the solver never steps over a jump.
    """
    x_eval = np.asarray(x_eval, dtype=float)
    s = 1.0 if side == "+" else -1.0
    x_start = spec.grid.x_max if side == "+" else spec.grid.x_min

    def rhs(x, y):
        m = y[0] + 1j * y[1]
        dm = y[2] + 1j * y[3]
        d2 = spec(x) * m - 2j * s * k * dm
        return [dm.real, dm.imag, d2.real, d2.imag]

    cuts = sorted(spec.breakpoints, reverse=(side == "+"))
    x_end = spec.grid.x_min if side == "+" else spec.grid.x_max
    stops = [c for c in cuts if min(x_start, x_end) < c < max(x_start, x_end)] + [x_end]
    out = np.full(len(x_eval), np.nan, dtype=complex)
    y0 = [1.0, 0.0, 0.0, 0.0]
    a = x_start
    for b in stops:
        sol = solve_ivp(rhs, (a, b), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        if not sol.success:
            raise RuntimeError(sol.message)
        sel = (x_eval >= min(a, b)) & (x_eval <= max(a, b))
        if sel.any():
            y = sol.sol(x_eval[sel])
            out[sel] = y[0] + 1j * y[1]
        y0 = sol.y[:, -1]
        a = b
    # beyond the starting point the field is exactly 1
    out[np.isnan(out)] = 1.0
    return out


def square_barrier_TR(amplitude: float, half_width: float, k) -> tuple:
    """T(k), R_+(k), R_-(k) for V = a 1{|x| < L} by plane-wave matching.

    T f_+ equals e^{ikx} + R_- e^{-ikx} left of the barrier, so R_- is the
    amplitude reflected back to the left for a wave sent in from the left.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float)).astype(complex)
    a, L = float(amplitude), float(half_width)
    q = np.sqrt(k**2 - a + 0j)
    T = np.empty_like(k)
    R = np.empty_like(k)
    for i, (kk, qq) in enumerate(zip(k, q)):
        M = np.linalg.solve(_plane(kk, L), _inner(qq, L) @ np.linalg.solve(_inner(qq, -L), _plane(kk, -L)))
        # left: e^{ikx} + r e^{-ikx}; right: t e^{ikx}; (t, 0) = M (1, r)
        r = -M[1, 0] / M[1, 1]
        T[i] = M[0, 0] + M[0, 1] * r
        R[i] = r
    # symmetric barrier: R_+ = R_-
    return T, R, R.copy()


def _plane(k, x):
    e, f = np.exp(1j * k * x), np.exp(-1j * k * x)
    return np.array([[e, f], [1j * k * e, -1j * k * f]])


def _inner(q, x):
    if abs(q) < 1e-12:
        return np.array([[1, x], [0, 1]], dtype=complex)
    return _plane(q, x)


def flat_gaussian(t, x, sigma=1.0, x0=0.0, amplitude=1.0, p0=0.0):
    """Exact solution of i u_t = u_xx (V = 0, no nonlinearity).

    Initial data amplitude * exp(-(x-x0)^2/(2 sigma^2) + i p0 x).
    """
    x = np.asarray(x, dtype=float)
    # Fourier: u_hat(t, xi) = exp(i t xi^2) u_hat(0, xi)  since  i u_t = -xi^2 u_hat
    s2 = sigma**2 - 2j * t
    y = x - x0
    # plane-wave factor with the group drift of exp(i t xi^2): x -> x + 2 p0 t
    phase = np.exp(1j * p0 * y + 1j * t * p0**2)
    env = sigma / np.sqrt(s2) * np.exp(-((y + 2 * p0 * t) ** 2) / (2 * s2))
    return amplitude * np.exp(1j * p0 * x0) * env * phase


def flat_fourier_gaussian(k, sigma=1.0, x0=0.0, amplitude=1.0, p0=0.0):
    """(2 pi)^{-1/2} int e^{-ikx} f(x) dx for the Gaussian of :func:`flat_gaussian`."""
    k = np.asarray(k, dtype=float)
    return (amplitude * sigma * np.exp(-((k - p0) ** 2) * sigma**2 / 2)
            * np.exp(-1j * (k - p0) * x0))
