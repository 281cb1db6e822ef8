"""
Generalized eigenfunctions psi(x,k) and the distorted Fourier transform.

    psi(x,k) = T(k) f_+(x,k)/sqrt(2 pi)        k > 0
    psi(x,k) = T(-k) f_-(x,-k)/sqrt(2 pi)      k < 0

forward:  f~(k) = sum_x w_x conj(psi(x,k)) f(x)      (trapezoid in x)
inverse:  f(x)  = sum_k w_k psi(x,k) f~(k)           (midpoint in k on the staggered grid)

psi is evaluated in k-chunks straight from the Jost data, so large x grids
never need the full (k, x) array; a dense copy is cached when it is small.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import jost
from .potential import PotentialSpec
from .scattering import ScatteringData, compute_TR, flat_scattering

SQRT2PI = math.sqrt(2 * math.pi)
DENSE_LIMIT = 4_000_000
_CHUNK = 64


def chi_plus(x) -> np.ndarray:
    """Smooth step: integral of rho(y) = (35/64)(1 - y^2/4)^3 on [-2, 2]."""
    s = np.clip(np.asarray(x, dtype=float) / 2, -1.0, 1.0)
    return 0.5 + (35 / 32) * (s - s**3 + 0.6 * s**5 - s**7 / 7)


def chi_minus(x) -> np.ndarray:
    return 1.0 - chi_plus(x)


@dataclass
class DistortedSpectrum:
    k_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[0] != len(self.k_grid):
            raise ValueError("spectrum does not match the k grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectrum has non-finite values")

    def norm(self, dk: float) -> float:
        return float(np.sqrt(dk * np.sum(np.abs(self.values) ** 2)))


@dataclass
class DistortedBasis:
    x: np.ndarray
    k: np.ndarray
    wx: np.ndarray
    wk: np.ndarray
    chi_plus: np.ndarray
    chi_minus: np.ndarray
    scattering: ScatteringData
    jost_field: jost.JostField | None
    _pos: np.ndarray = field(repr=False)       # index into scattering.k_grid for |k|
    _dense: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_x(self) -> int:
        return len(self.x)

    @property
    def n_k(self) -> int:
        return len(self.k)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dk(self) -> float:
        return float(self.k[1] - self.k[0])

    @property
    def quad_weights(self) -> tuple[np.ndarray, np.ndarray]:
        return self.wx, self.wk

    def _coeffs(self, kidx):
        p = self._pos[kidx]
        sd = self.scattering
        return sd.T[p], sd.R_plus[p], sd.R_minus[p]

    def _m(self, side, kvals):
        if self.jost_field is None:
            return np.ones((len(kvals), self.n_x), dtype=complex)
        return self.jost_field.evaluate(side, 0, None, kvals)

    def psi_block(self, kidx) -> np.ndarray:
        """psi(x, k) for the k indices ``kidx``; shape (len(kidx), n_x)."""
        kidx = np.atleast_1d(np.asarray(kidx))
        kk = self.k[kidx]
        T, _, _ = self._coeffs(kidx)
        out = np.empty((len(kidx), self.n_x), dtype=complex)
        wave = np.exp(1j * np.outer(kk, self.x))
        pos = kk > 0
        if pos.any():
            out[pos] = T[pos, None] * self._m("+", kk[pos]) * wave[pos]
        if (~pos).any():
            out[~pos] = T[~pos, None] * self._m("-", -kk[~pos]) * wave[~pos]
        return out / SQRT2PI

    def parts_block(self, kidx) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(psi_S, psi_L, psi_R) for the k indices ``kidx`` (without 1/sqrt(2 pi))."""
        kidx = np.atleast_1d(np.asarray(kidx))
        kk = self.k[kidx]
        T, Rp, Rm = self._coeffs(kidx)
        cp, cm = self.chi_plus[None, :], self.chi_minus[None, :]
        ep = np.exp(1j * np.outer(kk, self.x))
        em = ep.conj()
        S = np.empty((len(kidx), self.n_x), dtype=complex)
        L = np.empty_like(S)
        R = np.empty_like(S)
        pos = kk > 0
        if pos.any():
            a = np.abs(kk[pos])
            t, rm = T[pos, None], Rm[pos, None]
            mp = self._m("+", a)
            mm = self._m("-", a)
            mm_neg = mm.conj()       # m_-(x, -k)
            S[pos] = cm * (ep[pos] - em[pos])
            L[pos] = cp * t * ep[pos] + cm * (rm + 1) * em[pos]
            R[pos] = cp * t * (mp - 1) * ep[pos] + cm * ((mm_neg - 1) * ep[pos]
                                                         + rm * (mm - 1) * em[pos])
        neg = ~pos
        if neg.any():
            a = np.abs(kk[neg])
            t, rp = T[neg, None], Rp[neg, None]
            mm = self._m("-", a)     # m_-(x, -k) with -k = |k|
            mp_k = self._m("+", a).conj()   # m_+(x, k), k < 0
            mp_mk = mp_k.conj()              # m_+(x, -k)
            S[neg] = cp * (ep[neg] - em[neg])
            L[neg] = cm * t * ep[neg] + cp * (rp + 1) * em[neg]
            R[neg] = cm * t * (mm - 1) * ep[neg] + cp * ((mp_k - 1) * ep[neg]
                                                         + rp * (mp_mk - 1) * em[neg])
        return S, L, R

    def _chunks(self):
        for start in range(0, self.n_k, _CHUNK):
            yield np.arange(start, min(start + _CHUNK, self.n_k))

    @property
    def psi(self) -> np.ndarray:
        """Dense psi(k, x) (row-major over (k, x)); cached if small."""
        if self._dense is not None:
            return self._dense
        full = np.concatenate([self.psi_block(c) for c in self._chunks()])
        if full.size <= DENSE_LIMIT:
            self._dense = full
        return full

    def _parts_dense(self, which):
        return np.concatenate([self.parts_block(c)[which] for c in self._chunks()])

    @property
    def psi_S(self):
        return self._parts_dense(0)

    @property
    def psi_L(self):
        return self._parts_dense(1)

    @property
    def psi_R(self):
        return self._parts_dense(2)

    def cache_dense(self) -> None:
        if self._dense is None:
            self._dense = np.concatenate([self.psi_block(c) for c in self._chunks()])

    # transforms -----------------------------------------------------------

    def forward(self, f, check: bool = True, tol: float = 1e-6) -> DistortedSpectrum:
        f = np.asarray(f)
        if f.shape[0] != self.n_x:
            raise ValueError("function does not match the x grid")
        if check:
            _edge_check(f, tol, "forward: input does not decay at the x-grid boundary")
        g = (self.wx.reshape((-1,) + (1,) * (f.ndim - 1)) * f).astype(complex)
        if self._dense is not None or self.n_k * self.n_x <= DENSE_LIMIT:
            vals = self.psi.conj() @ g
        else:
            vals = np.concatenate([self.psi_block(c).conj() @ g for c in self._chunks()])
        return DistortedSpectrum(self.k, vals)

    def inverse(self, spec, check: bool = True, tol: float = 1e-6) -> np.ndarray:
        vals = spec.values if isinstance(spec, DistortedSpectrum) else np.asarray(spec)
        if vals.shape[0] != self.n_k:
            raise ValueError("spectrum does not match the k grid")
        if check:
            _edge_check(vals, tol, "inverse: spectrum does not decay at the k-grid boundary")
        g = self.wk.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals
        if self._dense is not None or self.n_k * self.n_x <= DENSE_LIMIT:
            return self.psi.T @ g
        out = np.zeros((self.n_x,) + vals.shape[1:], dtype=complex)
        for c in self._chunks():
            out += self.psi_block(c).T @ g[c]
        return out

    def l2_x(self, f) -> float:
        return float(np.sqrt(np.sum(self.wx * np.abs(f) ** 2)))

    def l2_k(self, g) -> float:
        g = g.values if isinstance(g, DistortedSpectrum) else g
        return float(np.sqrt(np.sum(self.wk * np.abs(g) ** 2)))

    def check_k_resolution(self, t_max: float) -> float:
        """dk (2 t_max k_max + x_max); values above pi/4 are warned about."""
        val = self.dk * (2 * t_max * float(np.max(np.abs(self.k))) + float(np.max(np.abs(self.x))))
        if val >= math.pi / 4:
            warnings.warn(f"k grid too coarse for propagation to t={t_max} "
                          f"(dk*(2 t k_max + x_max) = {val:.3f} >= pi/4)", RuntimeWarning)
        return val


def _edge_check(f, tol, msg):
    a = np.abs(f)
    scale = a.max()
    if scale == 0:
        return
    edge = max(a[:2].max(), a[-2:].max())
    if edge > tol * scale:
        warnings.warn(f"{msg} (edge/max = {edge / scale:.2e})", RuntimeWarning)


def build_basis(sd: ScatteringData, jf: jost.JostField | None, k_grid=None,
                x=None) -> DistortedBasis:
    """Assemble the basis from scattering and Jost data on matching grids.

    ``k_grid`` defaults to the Jost k grid (symmetric staggered).  ``jf`` may
    be None only for the flat case (T = 1, R = 0, m = 1), in which case ``x``
    must be supplied.
    """
    if jf is not None:
        x = jf.x_grid
        k = jf.k_grid if k_grid is None else np.asarray(k_grid, dtype=float)
        if not np.allclose(sd.k_grid, jf.kpos, rtol=0, atol=1e-14):
            raise ValueError("scattering data and Jost field use different k grids")
    else:
        if x is None or k_grid is None:
            raise ValueError("x and k_grid required without a Jost field")
        x = np.asarray(x, dtype=float)
        k = np.asarray(k_grid, dtype=float)
    dk = np.diff(k)
    if not np.allclose(dk, dk[0], rtol=1e-9):
        raise ValueError("k grid must be uniform")
    if np.any(k == 0):
        raise ValueError("k grid must avoid 0")
    pos = np.searchsorted(sd.k_grid, np.abs(k) - 1e-12 * max(1.0, sd.k_grid[-1]))
    pos = np.minimum(pos, len(sd.k_grid) - 1)
    if not np.allclose(sd.k_grid[pos], np.abs(k), rtol=0, atol=1e-12):
        raise ValueError("basis k grid not covered by the scattering data")
    dx = x[1] - x[0]
    wx = np.full(len(x), dx)
    wx[0] = wx[-1] = 0.5 * dx
    wk = np.full(len(k), dk[0])
    return DistortedBasis(x, k, wx, wk, chi_plus(x), chi_minus(x), sd, jf, pos)


def basis_for(spec: PotentialSpec, k_grid) -> DistortedBasis:
    """Jost data, scattering data and basis in one call."""
    k_grid = np.asarray(k_grid, dtype=float)
    if spec.amplitude == 0 and spec.analytic:
        kpos = np.unique(np.abs(k_grid))
        return build_basis(flat_scattering(kpos), None, k_grid, spec.grid.x)
    jf = jost.solve_m(spec, k_grid, "both", 0)
    return build_basis(compute_TR(jf), jf)


def decomposition_defect(basis: DistortedBasis) -> float:
    """max |sqrt(2 pi) psi - (psi_S + psi_L + psi_R)|."""
    worst = 0.0
    for c in basis._chunks():
        S, L, R = basis.parts_block(c)
        worst = max(worst, float(np.max(np.abs(SQRT2PI * basis.psi_block(c) - (S + L + R)))))
    return worst


def linear_propagate(spec: DistortedSpectrum, t: float) -> DistortedSpectrum:
    """u~(t) = exp(i t k^2) u~(0)."""
    return DistortedSpectrum(spec.k_grid, np.exp(1j * t * spec.k_grid**2) * spec.values)


def profile(spec: DistortedSpectrum, t: float) -> DistortedSpectrum:
    """f~(t) = exp(-i t k^2) u~(t)."""
    return linear_propagate(spec, -t)


def apply_L(f, v, dx: float) -> np.ndarray:
    """(-d^2/dx^2 + V) f with the fourth-order centred stencil (zero outside the grid)."""
    f = np.asarray(f)
    p = np.pad(f, 2)
    d2 = (-p[4:] + 16 * p[3:-1] - 30 * p[2:-2] + 16 * p[1:-3] - p[:-4]) / (12 * dx * dx)
    return -d2 + np.asarray(v) * f


def diagonalization_residual(f, basis: DistortedBasis, v) -> float:
    """||F(Lf) - k^2 F(f)|| / ||k^2 F(f)|| on the basis grids."""
    f = np.asarray(f)
    if not np.any(f):
        return 0.0
    Lf = apply_L(f, v, basis.dx)
    a = basis.forward(Lf, check=False).values
    b = basis.k**2 * basis.forward(f, check=False).values
    return basis.l2_k(a - b) / basis.l2_k(b)


# ----------------------------------------------------------------------------
# empirical constants of the pointwise and weighted estimates

def psi_part_constants(basis: DistortedBasis, gamma: float | None = None) -> dict:
    """max |psi_S|/min(|k||x|,1), max |psi_L|/min(|k|,1), max |psi_R| <x>^{gamma-1}."""
    cs = cl = cr = 0.0
    ax = np.abs(basis.x)[None, :]
    bracket = np.sqrt(1 + basis.x**2)[None, :]
    g = gamma if gamma is not None else (
        basis.jost_field.spec.gamma if basis.jost_field is not None else 1.0)
    for c in basis._chunks():
        S, L, R = basis.parts_block(c)
        ak = np.abs(basis.k[c])[:, None]
        den = np.minimum(ak * ax, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rs = np.where(den > 0, np.abs(S) / den, 0.0)
        cs = max(cs, float(rs.max()))
        cl = max(cl, float((np.abs(L) / np.minimum(ak, 1.0)).max()))
        cr = max(cr, float((np.abs(R) * bracket ** (g - 1)).max()))
    return {"psi_S": cs, "psi_L": cl, "psi_R": cr}


def weighted_ratio(f, basis: DistortedBasis) -> float:
    """||d_k f~|| / ||<x> f||, with d_k by centred differences on the k grid."""
    ft = basis.forward(f, check=False).values
    dft = np.gradient(ft, basis.dk)
    # the kink of f~ at k = 0 is excluded from the difference quotient
    mid = len(ft) // 2
    dft[mid - 1:mid + 1] = (ft[mid - 1:mid + 1] - ft[mid - 2:mid]) / basis.dk
    return basis.l2_k(dft) / basis.l2_x(np.sqrt(1 + basis.x**2) * f)


def regularity_ratio(f, basis: DistortedBasis) -> float:
    """||k f~|| / ||f||_{H^1} with the H^1 norm from spectral derivatives."""
    ft = basis.forward(f, check=False).values
    xi = 2 * np.pi * np.fft.fftfreq(basis.n_x, basis.dx)
    fh = np.fft.fft(f)
    h1 = math.sqrt(basis.dx * np.sum((1 + xi**2) * np.abs(fh) ** 2) / basis.n_x)
    return basis.l2_k(basis.k * ft) / h1
