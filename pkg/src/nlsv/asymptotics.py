"""
Profiles, modified-scattering corrections, the reduced ODE and the
physical-space asymptotic formulas.

Coefficient of the logarithmic phase
------------------------------------
With the unitary transform used here and the nonlinearity |u|^2 u, the
profile obeys i d_t f~ ~ (1/2t) |f~|^2 f~ for large t (checked against the
flat cubic NLS), so the phase correction uses LOG_PHASE_COEF = 1/2.  The
constant 1/(2 sqrt(2 pi)) is available as ALT_LOG_PHASE_COEF; b(t, y) keeps its
original normalization and the reduced ODE rescales it by
coef * 2 sqrt(2 pi), so both conventions agree in the large-y limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .distorted import DistortedBasis
from .scattering import ScatteringData, scattering_matrix

LOG_PHASE_COEF = 0.5
ALT_LOG_PHASE_COEF = 1.0 / (2.0 * math.sqrt(2.0 * math.pi))
ALPHA = 0.2
RHO = 0.019
# proof-internal constants, stored for the record only
P0 = 1.0 / 100


def epsilon1(epsilon0: float) -> float:
    return epsilon0 ** (2.0 / 3.0)


# ----------------------------------------------------------------------------
# profiles

@dataclass
class ProfileHistory:
    times: np.ndarray
    k_grid: np.ndarray          # symmetric staggered
    f_tilde: np.ndarray         # (n_t, n_k)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(np.abs(self.times)) < 0):
            raise ValueError("times must be sorted by |t|")
        if not np.all(np.isfinite(self.f_tilde)):
            raise ValueError("profile contains non-finite values")

    @property
    def n_pos(self) -> int:
        return len(self.k_grid) // 2

    @property
    def kpos(self) -> np.ndarray:
        return self.k_grid[self.n_pos:]

    @property
    def Z(self) -> np.ndarray:
        """(n_t, n_kpos, 2): (f~(t,k), f~(t,-k)) for k > 0."""
        n = self.n_pos
        return np.stack([self.f_tilde[:, n:], self.f_tilde[:, :n][:, ::-1]], axis=-1)

    def index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no profile at t={t}")
        return i


def pair_to_full(Zs: np.ndarray) -> np.ndarray:
    """Inverse of ProfileHistory.Z: (..., n_kpos, 2) -> (..., 2 n_kpos)."""
    return np.concatenate([Zs[..., ::-1, 1], Zs[..., 0]], axis=-1)


def extract_profiles(traj, basis: DistortedBasis, times=None) -> ProfileHistory:
    """f~(t) = exp(-i t k^2) forward(u(t)) for the trajectory snapshots."""
    states = traj.states if times is None else [traj.at(t) for t in times]
    if len(states[0].u) != basis.n_x:
        raise ValueError("trajectory and basis use different x grids")
    U = np.stack([s.u for s in states], axis=1)
    ut = basis.forward(U, check=False).values             # (n_k, n_t)
    ts = np.array([s.t for s in states])
    ft = (np.exp(-1j * np.outer(ts, basis.k**2)) * ut.T)
    return ProfileHistory(ts, basis.k.copy(), ft)


# ----------------------------------------------------------------------------
# corrections

def _interval_weights(t):
    """Weights (wa, wb) so that int_{|t_a|}^{|t_b|} g ds/(1+s) of the linear
    interpolant equals wa g_a + wb g_b, on each interval of |t|."""
    s = np.abs(np.asarray(t, dtype=float))
    a, b = s[:-1], s[1:]
    d = b - a
    L = np.log1p(b) - np.log1p(a)
    wa = np.empty_like(d)
    wb = np.empty_like(d)
    big = d > 1e-12
    # g = alpha + beta s on [a, b]: int = (alpha - beta) L + beta d
    beta_b = 1.0 / np.where(big, d, 1.0)
    # contributions of g_b: beta = 1/d, alpha = -a/d ; of g_a: beta = -1/d, alpha = b/d
    wb[big] = ((-a[big] - 1.0) * L[big]) * beta_b[big] + 1.0
    wa[big] = ((b[big] + 1.0) * L[big]) * beta_b[big] - 1.0
    wa[~big] = wb[~big] = 0.5 * L[~big]
    return wa, wb


@dataclass
class ModifiedProfile:
    times: np.ndarray
    k_grid: np.ndarray
    W: np.ndarray                   # plus: (n_t, n_k); minus: (n_t, n_kpos, 2)
    correction_kind: str
    accumulated_phase: np.ndarray   # plus: (n_t, n_k); minus: (n_t, n_kpos, 2, 2) Hermitian
    unitary_defect: float = 0.0
    threshold_rule: str = ""
    coef: float = LOG_PHASE_COEF

    def index(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no profile at t={t}")
        return i

    def cauchy_difference(self, t: float, k_max: float | None = None) -> float:
        """sup_k |W(2t) - W(t)|, optionally over |k| <= k_max only."""
        a = self.W[self.index(2 * t)]
        b = self.W[self.index(t)]
        d = np.abs(a - b)
        if d.ndim > 1:
            d = np.sqrt(np.sum(d**2, axis=-1))
            k = self.k_grid[len(self.k_grid) // 2:]
        else:
            k = self.k_grid
        if k_max is not None:
            d = d[np.abs(k) <= k_max]
        return float(d.max())


def correct_plus(hist: ProfileHistory, coef: float = LOG_PHASE_COEF) -> ModifiedProfile:
    """W = f~ exp(i coef int_0^t |f~|^2 ds/(s+1)), per k."""
    t = hist.times
    if np.any(t < 0):
        raise ValueError("correct_plus needs t >= 0")
    g = np.abs(hist.f_tilde) ** 2
    phase = np.zeros_like(g)
    if len(t) > 1:
        wa, wb = _interval_weights(t)
        inc = wa[:, None] * g[:-1] + wb[:, None] * g[1:]
        phase[1:] = np.cumsum(inc, axis=0)
    # if the history does not start at 0, the missing piece is a constant phase
    if t[0] > 0:
        phase += g[0] * math.log1p(t[0])
    phase *= coef
    W = hist.f_tilde * np.exp(1j * phase)
    return ModifiedProfile(t, hist.k_grid, W, "plus_scalar", phase, 0.0, "", coef)


def _hermitian_exp(M):
    """exp(iM) for Hermitian 2x2 M (..., 2, 2) via the Pauli decomposition."""
    a0 = 0.5 * (M[..., 0, 0] + M[..., 1, 1]).real
    az = 0.5 * (M[..., 0, 0] - M[..., 1, 1]).real
    ax = M[..., 0, 1].real
    ay = -M[..., 0, 1].imag          # M01 = ax - i ay
    r = np.sqrt(ax**2 + ay**2 + az**2)
    c = np.cos(r)
    s = np.where(r > 1e-300, np.sin(r) / np.where(r > 1e-300, r, 1.0), 1.0)
    U = np.empty(M.shape, dtype=complex)
    U[..., 0, 0] = c + 1j * s * az
    U[..., 1, 1] = c - 1j * s * az
    U[..., 0, 1] = 1j * s * (ax - 1j * ay)
    U[..., 1, 0] = 1j * s * (ax + 1j * ay)
    return np.exp(1j * a0)[..., None, None] * U


def s_matrices(Z, S, Sinv, coef=LOG_PHASE_COEF):
    """S_0 = coef diag(|Z|^2) and S_1 = coef S^-1 diag(|SZ|^2) S, shapes (..., 2, 2)."""
    S0 = np.zeros(Z.shape + (2,), dtype=complex)
    S0[..., 0, 0] = np.abs(Z[..., 0]) ** 2
    S0[..., 1, 1] = np.abs(Z[..., 1]) ** 2
    SZ = np.einsum("...ij,...j->...i", S, Z)
    D = np.abs(SZ) ** 2
    S1 = np.einsum("...ij,...j,...jl->...il", Sinv, D, S)
    return coef * S0, coef * S1


def correct_minus(hist: ProfileHistory, sd: ScatteringData, rho: float = RHO,
                  coef: float = LOG_PHASE_COEF, unitary_tol: float = 1e-8) -> ModifiedProfile:
    """W = T exp(i int_0^t S(s,k) ds/(1+|s|)) Z for t <= 0.

    S = S_0 for k <= |s|^-rho and (S_0 + S_1)/2 above, with the threshold
    evaluated at each snapshot time.  The ordered exponential is composed
    interval by interval from exact 2x2 exponentials of the integrated
    (linearly interpolated) generator, so every factor is unitary.
    """
    t = hist.times
    if np.any(t > 0):
        raise ValueError("correct_minus needs t <= 0")
    Z = hist.Z
    kp = hist.kpos
    S, Sinv = scattering_matrix(sd, kp)
    # Sinv is S^* by construction, so S_1 is self-adjoint exactly when S is unitary
    udef = np.max(np.abs(np.einsum("kij,kjl->kil", Sinv, S) - np.eye(2)), initial=0.0)
    if udef > unitary_tol:
        raise ValueError(f"S_1 not self-adjoint: scattering matrix off unitarity by {udef:.2e}")
    S0, S1 = s_matrices(Z, S[None], Sinv[None], coef)
    S1 = 0.5 * (S1 + np.conj(np.swapaxes(S1, -1, -2)))
    with np.errstate(divide="ignore"):
        thresh = np.where(t == 0, np.inf, np.abs(t) ** (-rho))
    below = kp[None, :] <= thresh[:, None]
    gen = np.where(below[..., None, None], S0, 0.5 * (S0 + S1))
    n_t = len(t)
    U = np.broadcast_to(np.eye(2, dtype=complex), (len(kp), 2, 2)).copy()
    acc = np.zeros((n_t, len(kp), 2, 2), dtype=complex)
    W = np.empty_like(Z)
    W[0] = Z[0]
    defect = 0.0
    if abs(t[0]) > 0:
        # constant generator on [0, |t_0|]
        M0 = -gen[0] * math.log1p(abs(t[0]))
        U = _hermitian_exp(M0)
        acc[0] = M0
        W[0] = np.einsum("kij,kj->ki", U, Z[0])
    if n_t > 1:
        wa, wb = _interval_weights(t)
        for n in range(1, n_t):
            # oriented integral from 0 to t < 0 is minus the integral over |s|
            M = -(wa[n - 1] * gen[n - 1] + wb[n - 1] * gen[n])
            step = _hermitian_exp(M)
            U = np.einsum("kij,kjl->kil", step, U)
            acc[n] = acc[n - 1] + M
            W[n] = np.einsum("kij,kj->ki", U, Z[n])
            d = np.einsum("kji,kjl->kil", step.conj(), step) - np.eye(2)
            defect = max(defect, float(np.max(np.abs(d))))
    return ModifiedProfile(t, hist.k_grid, W, "minus_matrix", acc, defect,
                           "threshold k <= |t|^-rho evaluated at each snapshot", coef)


def resolved_k(x_half_width: float, t: float) -> float:
    """Largest |k| whose waves stay inside |x| <= x_half_width/2 up to time t.

    Beyond it, content has reached the edge of a periodic computational
    domain and the measured profile no longer describes the free line.
    """
    return x_half_width / (4 * abs(t))


def phase_drift(hist: ProfileHistory, mp: ModifiedProfile, k_index: int, t0: float, t1: float):
    """Unwrapped phase change of f~ and W at one k between t0 and t1."""
    i0, i1 = hist.index(t0), hist.index(t1)
    sl = slice(i0, i1 + 1)
    pf = np.unwrap(np.angle(hist.f_tilde[sl, k_index]))
    pw = np.unwrap(np.angle(mp.W[sl, k_index]))
    return float(abs(pf[-1] - pf[0])), float(abs(pw[-1] - pw[0]))


# ----------------------------------------------------------------------------
# oscillatory coefficients

def lp_cutoff(x) -> np.ndarray:
    """Even C^infinity cutoff: 1 on [-5/4, 5/4], 0 outside [-8/5, 8/5]."""
    a = np.abs(np.asarray(x, dtype=float))
    u = np.clip((1.6 - a) / (1.6 - 1.25), 0.0, 1.0)

    def f(z):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)
    return f(u) / (f(u) + f(1 - u))


def _cutoff_scale(t, alpha, rho):
    if not 0 < rho < alpha / 10 < 1 / 40:
        raise ValueError("need 0 < rho < alpha/10 < 1/40")
    return abs(t) ** (-2 * alpha + 2 * rho)


def _c_positive(t, y, alpha, rho, h=None):
    """c(t,y) for t > 0 by the even-extension trapezoid rule on [0, 8/(5s)]."""
    s = _cutoff_scale(t, alpha, rho)
    X = 1.6 / s
    y = np.asarray(y, dtype=float)
    fmax = 2 * X + 2 * float(np.max(np.abs(y), initial=0.0))
    if h is None:
        h = min(0.004, math.pi / (4 * fmax))
    n = int(math.ceil(X / h))
    x = h * np.arange(1, n + 1)
    E = np.exp(1j * x**2) * lp_cutoff(x * s) / x
    out = np.empty(y.shape, dtype=complex)
    flat = y.ravel()
    res = out.reshape(-1)
    for i in range(0, len(flat), 256):
        yy = flat[i:i + 256]
        res[i:i + 256] = h * yy + h * (np.sin(2 * np.outer(yy, x)) @ E)
    return out * (2 / math.sqrt(2 * math.pi))


@dataclass
class OscillatoryCoeffs:
    t: float
    y: np.ndarray
    c: np.ndarray          # -i e^{-iy^2} h
    h: np.ndarray
    b: np.ndarray
    alpha: float
    rho: float

    @property
    def h_values(self):
        return self.h

    @property
    def b_values(self):
        return self.b


def oscillatory_coeffs(t: float, y_grid, alpha: float = ALPHA, rho: float = RHO) -> OscillatoryCoeffs:
    """b(t,y) = (1/4pi)[sqrt(pi/2) - i e^{-iy^2} h(t,y)] on ``y_grid``.

    For t > 0, -i e^{-iy^2} h = (2/sqrt(2pi)) int_0^inf e^{ix^2} sin(2xy) phi(x s)/x dx
    with s = t^(-2 alpha + 2 rho) (the symmetrized principal value); for
    t < 0, h(t,y) = conj(h(-t,y)).
    """
    if t == 0:
        raise ValueError("t must be non-zero")
    y = np.asarray(y_grid, dtype=float)
    c_pos = _c_positive(abs(t), y, alpha, rho)
    h = 1j * np.exp(1j * y**2) * c_pos
    if t < 0:
        h = h.conj()
    c = -1j * np.exp(-1j * y**2) * h
    b = (math.sqrt(math.pi / 2) + c) / (4 * math.pi)
    return OscillatoryCoeffs(float(t), y, c, h, b, alpha, rho)


class BTable:
    """b(t, y) tabulated on log-spaced |t| nodes and a uniform y grid.

    For each |t| node all y values come from one FFT: with x_j = j h and
    y_m = m dy, 2 h dy = 2 pi/N turns sum_j E_j sin(2 x_j y_m) into a DFT.
    Linear interpolation in y and in log|t|.
    """

    def __init__(self, t_min, t_max, alpha=ALPHA, rho=RHO, n_t=33, h=0.004, n_fft=2**18):
        self.alpha, self.rho = alpha, rho
        self.logt = np.linspace(math.log(t_min), math.log(t_max), n_t)
        self.dy = math.pi / (n_fft * h)
        m = np.arange(n_fft)
        m = np.where(m < n_fft // 2, m, m - n_fft)
        order = np.argsort(m)
        self.y = m[order] * self.dy
        rows = []
        for lt in self.logt:
            s = _cutoff_scale(math.exp(lt), alpha, rho)
            X = 1.6 / s
            n = int(math.ceil(X / h))
            if n >= n_fft:
                raise ValueError("FFT too short for the cutoff support")
            x = h * np.arange(1, n + 1)
            E = np.zeros(n_fft, dtype=complex)
            E[1:n + 1] = np.exp(1j * x**2) * lp_cutoff(x * s) / x
            plus = n_fft * np.fft.ifft(E)         # sum_j E_j e^{+2i x_j y_m}
            minus = np.fft.fft(E)                 # sum_j E_j e^{-2i x_j y_m}
            c = h * (m * self.dy) + h * (plus - minus) / 2j
            rows.append((c * (2 / math.sqrt(2 * math.pi)))[order])
        self.c_pos = np.array(rows)             # (n_t, n_fft), y ascending

    @property
    def y_max(self) -> float:
        return float(self.y[-1])

    def b(self, t: float, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if np.any(np.abs(y) > self.y_max):
            raise ValueError("y beyond the tabulated range")
        lt = math.log(abs(t))
        lt = min(max(lt, self.logt[0]), self.logt[-1])
        j = min(int(np.searchsorted(self.logt, lt)), len(self.logt) - 1)
        j = max(j, 1)
        w = (lt - self.logt[j - 1]) / (self.logt[j] - self.logt[j - 1])
        pos = (y - self.y[0]) / self.dy
        i = np.clip(np.floor(pos).astype(int), 0, len(self.y) - 2)
        f = pos - i
        lo, hi = self.c_pos[j - 1], self.c_pos[j]
        c = ((1 - w) * ((1 - f) * lo[i] + f * lo[i + 1])
             + w * ((1 - f) * hi[i] + f * hi[i + 1]))
        if t < 0:
            # h(t) = conj h(|t|)  =>  c(t) = -e^{-2iy^2} conj c(|t|)
            c = -np.exp(-2j * y**2) * c.conj()
        return (math.sqrt(math.pi / 2) + c) / (4 * math.pi)


# ----------------------------------------------------------------------------
# reduced ODE

def ode_matrix(t, Z, S, Sinv, kp, btab: BTable, coef=LOG_PHASE_COEF):
    y = math.sqrt(abs(t)) * kp
    scale = coef * 2 * math.sqrt(2 * math.pi)
    bp = btab.b(t, y)[:, None, None]
    bm = btab.b(t, -y)[:, None, None]
    S0, S1 = s_matrices(Z, S, Sinv, 1.0)
    return scale * (bp * S0 + bm * S1)


def reduced_ode_evolve(Z0, sd: ScatteringData, kp, t_start, t_end, dt=0.05, btab=None,
                       coef=LOG_PHASE_COEF, times_out=None, growth_tol=0.01):
    """Explicit midpoint integration of i dZ/dt = (1/|t|) A(t,k) Z.

    Returns (times, Z history (n_out, n_k, 2)).
    """
    if abs(t_start) < 1:
        raise ValueError("t_start must satisfy |t_start| >= 1")
    Z = np.asarray(Z0, dtype=complex).copy()
    S, Sinv = scattering_matrix(sd, kp)
    if btab is None:
        lo, hi = sorted((abs(t_start), abs(t_end)))
        btab = BTable(max(lo * 0.9, 1.0), hi * 1.1)
    norm0 = np.sqrt(np.sum(np.abs(Z) ** 2, axis=-1))
    n = max(1, int(math.ceil(abs(t_end - t_start) / dt - 1e-9)))
    h = (t_end - t_start) / n
    outs = [] if times_out is None else sorted(times_out, key=lambda s: abs(s - t_start))
    out_t, out_Z = [t_start], [Z.copy()]

    def rhs(t, Z):
        A = ode_matrix(t, Z, S, Sinv, kp, btab, coef)
        return -1j / abs(t) * np.einsum("kij,kj->ki", A, Z)

    t = t_start
    for i in range(n):
        Zh = Z + 0.5 * h * rhs(t, Z)
        Z = Z + h * rhs(t + 0.5 * h, Zh)
        t = t_start + (i + 1) * h
        nrm = np.sqrt(np.sum(np.abs(Z) ** 2, axis=-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            grow = np.where(norm0 > 0, nrm / norm0 - 1, 0.0)
        if np.max(grow) > growth_tol:
            raise FloatingPointError(f"reduced ODE: |Z| grew by {np.max(grow):.2%} at t={t:g}")
        while outs and abs(outs[0] - t) <= 0.5 * abs(h):
            out_t.append(outs.pop(0))
            out_Z.append(Z.copy())
    if not out_t or out_t[-1] != t:
        out_t.append(t)
        out_Z.append(Z.copy())
    return np.array(out_t), np.array(out_Z)


# ----------------------------------------------------------------------------
# physical space

def _interp_profile(k_grid, values, k):
    re = CubicSpline(k_grid, values.real)
    im = CubicSpline(k_grid, values.imag)
    return re(k) + 1j * im(k)


def physical_asymptotics(f_tilde, k_grid, t: float, x, sd: ScatteringData | None = None,
                         mode: str = "profile", W_inf=None, coef=LOG_PHASE_COEF) -> np.ndarray:
    """Leading-order u(t,x) from the profile.

    t > 0:  exp(-i x^2/4t)/sqrt(-2it) f~(t, -x/2t)
    t < 0:  exp(-i x^2/4t)/sqrt(-2it) (S Z(k0))_1 for x > 0, (S Z(k0))_2 for x < 0,
            k0 = |x|/2|t|
    mode "asreal" (t > 0): f~ replaced by W_inf exp(-i coef |W_inf|^2 log t).
    """
    x = np.asarray(x, dtype=float)
    if t == 0 or abs(t) < 1e-12:
        raise ValueError("t must be non-zero")
    kg = np.asarray(k_grid, dtype=float)
    pref = np.exp(-1j * x**2 / (4 * t)) / np.sqrt(-2j * t + 0j)
    if t > 0:
        k0 = -x / (2 * t)
        if np.any(np.abs(k0) > kg.max()):
            raise ValueError("-x/2t outside the k grid")
        if mode == "asreal":
            if W_inf is None:
                raise ValueError("asreal mode needs W_inf")
            w = _interp_profile(kg, np.asarray(W_inf), k0)
            val = w * np.exp(-1j * coef * np.abs(w) ** 2 * math.log(t))
        else:
            val = _interp_profile(kg, np.asarray(f_tilde), k0)
        return pref * val
    if sd is None:
        raise ValueError("t < 0 needs scattering data")
    kap = np.abs(x) / (2 * abs(t))
    if np.any(kap > kg.max()):
        raise ValueError("|x|/2|t| outside the k grid")
    fp = _interp_profile(kg, np.asarray(f_tilde), kap)
    fm = _interp_profile(kg, np.asarray(f_tilde), -kap)
    T, Rp, Rm = sd.coefficients(np.maximum(kap, sd.k_grid[0]))
    right = T * fp + Rp * fm
    left = Rm * fp + T * fm
    return pref * np.where(x >= 0, right, left)
