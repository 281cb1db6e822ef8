"""
Transmission and reflection coefficients, scattering matrix, genericity.

With A_s = int exp(2iky) V m_s and B_s = int V m_s (s = +, computed in the
frame of each side), the coefficients are

    1/T = 1 - B_s/(2ik)         (either side)
    R_- = T A_+/(2ik),  R_+ = T A_-/(2ik)

Written as T = 2ik/(2ik - B) there is no cancellation as k -> 0.
Only k > 0 is computed; negative k follows from conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import jost
from .potential import PotentialSpec


@dataclass
class ScatteringData:
    k_grid: np.ndarray                 # positive k
    T: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    dk_T: np.ndarray | None = None
    dk_R_plus: np.ndarray | None = None
    dk_R_minus: np.ndarray | None = None
    cross_check: np.ndarray | None = None   # |1/T from m_+ - 1/T from m_-|
    provenance: dict = field(default_factory=dict)
    _splines: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def unitarity_defect(self) -> np.ndarray:
        t2 = np.abs(self.T) ** 2
        return np.maximum(np.abs(t2 + np.abs(self.R_plus) ** 2 - 1),
                          np.abs(t2 + np.abs(self.R_minus) ** 2 - 1))

    @property
    def orthogonality_defect(self) -> np.ndarray:
        return np.abs(self.T * self.R_minus.conj() + self.R_plus * self.T.conj())

    def coefficients(self, k) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """T, R_+, R_- at arbitrary real k (cubic spline in k, conjugation for k < 0)."""
        k = np.asarray(k, dtype=float)
        ka = np.abs(k)
        kg = self.k_grid
        if np.any(ka > kg[-1] * (1 + 1e-12)):
            raise ValueError(f"|k| beyond the scattering grid (max {kg[-1]})")
        out = []
        for name in ("T", "R_plus", "R_minus"):
            vals = getattr(self, name)
            exact = np.isclose(ka[..., None], kg, rtol=0, atol=1e-13 * max(1.0, kg[-1]))
            hit = exact.any(-1)
            res = np.empty(k.shape, dtype=complex)
            if hit.any():
                res[hit] = vals[np.argmax(exact[hit], axis=-1)]
            if (~hit).any():
                sp = self._spline(name)
                res[~hit] = sp(ka[~hit])
            res = np.where(k < 0, res.conj(), res)
            out.append(res)
        return tuple(out)

    def _spline(self, name):
        if name not in self._splines:
            # extend evenly through k = 0 using the conjugation symmetry
            vals = getattr(self, name)
            kk = np.concatenate([-self.k_grid[::-1], self.k_grid])
            vv = np.concatenate([vals[::-1].conj(), vals])
            re = CubicSpline(kk, vv.real)
            im = CubicSpline(kk, vv.imag)
            self._splines[name] = lambda q: re(q) + 1j * im(q)
        return self._splines[name]

    def signed(self) -> dict:
        """Coefficients on the symmetric grid (-k reversed, then k)."""
        kk = np.concatenate([-self.k_grid[::-1], self.k_grid])
        d = {"k": kk}
        for name in ("T", "R_plus", "R_minus"):
            v = getattr(self, name)
            d[name] = np.concatenate([v[::-1].conj(), v])
        return d


def compute_TR(jf: jost.JostField, tol: float = 1e-6) -> ScatteringData:
    """T and R_+- from the Jost totals of both sides.

    The two evaluations of 1/T are compared; their disagreement is stored
    in ``cross_check`` and a warning is raised above ``tol``.
    """
    if set(jf.sides) != {"+", "-"}:
        raise ValueError("compute_TR needs m_+ and m_-")
    k = jf.kpos
    tp, tm = jf.totals("+"), jf.totals("-")
    z = 2j * k
    den = z - tp["B"]
    T = z / den
    cross = np.abs(tp["B"] - tm["B"]) / np.abs(z)
    R_minus = tp["A"] / den
    R_plus = tm["A"] / den
    sd = ScatteringData(k, T, R_plus, R_minus, cross_check=cross,
                        provenance={"family": jf.spec.family, "params": dict(jf.spec.params),
                                    "grid": jf.spec.grid.to_dict()})
    if jf.derivative_order >= 1:
        dB = tp["dB"]
        den2 = den**2
        sd.dk_T = (-2j * tp["B"] + z * dB) / den2
        for name, A, dA in (("dk_R_minus", tp["A"], tp["dA"]), ("dk_R_plus", tm["A"], tm["dA"])):
            setattr(sd, name, (dA * den - A * (2j - dB)) / den2)
    bad = float(np.max(cross, initial=0.0))
    if bad > tol:
        import warnings
        warnings.warn(f"1/T from m_+ and m_- differ by {bad:.2e}; grid may be under-resolved",
                      RuntimeWarning)
    return sd


def scattering_data(spec: PotentialSpec, k_pos, derivative_order: int = 0) -> ScatteringData:
    """Jost totals plus T, R on the positive k values ``k_pos``."""
    jf = jost.solve_m(spec, np.asarray(k_pos, dtype=float), "both", derivative_order,
                      store_fields=False)
    return compute_TR(jf)


def scattering_matrix(sd: ScatteringData, k) -> tuple[np.ndarray, np.ndarray]:
    """S(k) = [[T, R_+], [R_-, T]] and S^{-1} = [[conj T, conj R_-], [conj R_+, conj T]].

    Vectorized: for array k the result has shape k.shape + (2, 2).
    """
    T, Rp, Rm = sd.coefficients(k)
    S = np.stack([np.stack([T, Rp], -1), np.stack([Rm, T], -1)], -2)
    Sinv = np.stack([np.stack([T.conj(), Rm.conj()], -1), np.stack([Rp.conj(), T.conj()], -1)], -2)
    return S, Sinv


def flat_scattering(k_pos) -> ScatteringData:
    """T = 1, R = 0 (V = 0)."""
    k = np.asarray(k_pos, dtype=float)
    one = np.ones(len(k), dtype=complex)
    zero = np.zeros(len(k), dtype=complex)
    return ScatteringData(k, one, zero, zero.copy(), zero.copy(), zero.copy(), zero.copy(),
                          np.zeros(len(k)))


@dataclass
class GenericityReport:
    wronskian_integral: float      # int V m(., 0) extrapolated to k = 0
    integral_direct: float         # the same from the k = 0 sweep
    error_bar: float
    T_slope_at_zero: complex       # -2i / I0
    T_slope_fd: complex            # finite-difference slope from the smallest k
    k_min: float
    T_at_kmin: complex
    R_plus_at_kmin: complex
    R_minus_at_kmin: complex
    wronskian_at_kmin: complex     # W(k) = 2ik/T(k) = 2ik - int V m
    is_generic: bool
    inconclusive: bool

    def to_dict(self):
        out = {}
        for key, v in self.__dict__.items():
            out[key] = [v.real, v.imag] if isinstance(v, complex) else v
        return out


def genericity_report(spec: PotentialSpec, dk: float = 0.01, threshold: float = 1e-8) -> GenericityReport:
    """Check int V m(x,0) dx != 0.

    The integral is obtained two ways: a quadratic extrapolation to k = 0
    from the three smallest staggered k, and a direct k = 0 sweep.
    """
    ks = (np.arange(3) + 0.5) * dk
    jf = jost.solve_m(spec, ks, "both", 0, store_fields=False)
    sd = compute_TR(jf)
    B = jf.totals("+")["B"]
    # Lagrange weights for the value at 0 through k = dk/2, 3dk/2, 5dk/2
    wts = np.array([15 / 8, -10 / 8, 3 / 8])
    I_extrap = complex(wts @ B)
    _, I_direct = jost.solve_m_zero(spec, "+")
    err = abs(I_extrap - I_direct) + abs(I_extrap.imag)
    I0 = I_direct
    inconclusive = abs(I0) <= err or abs(I0) <= threshold
    generic = abs(I0) > max(threshold, err)
    slope = -2j / I0 if I0 != 0 else complex(math.inf)
    fd = complex((sd.T[1] - sd.T[0]) / (ks[1] - ks[0]))
    return GenericityReport(float(I_extrap.real), float(I_direct), float(err), complex(slope), fd,
                            float(ks[0]), complex(sd.T[0]), complex(sd.R_plus[0]),
                            complex(sd.R_minus[0]), complex(2j * ks[0] - B[0]),
                            bool(generic), bool(inconclusive and not generic))


def fpm_consistency(jf: jost.JostField, sd: ScatteringData, k_idx=None) -> float:
    """sup over the left half-grid of |f_+ - (1/T) f_-(., -k) - (R_-/T) f_-(., k)|."""
    x = jf.x_grid
    left = np.nonzero(x <= 0)[0]
    kk = sd.k_grid if k_idx is None else sd.k_grid[np.atleast_1d(k_idx)]
    sel = np.searchsorted(sd.k_grid, kk)
    mp = jf.evaluate("+", 0, left, kk)
    mm = jf.evaluate("-", 0, left, kk)
    mm_neg = mm.conj()
    e = np.exp(1j * np.outer(kk, x[left]))
    T, Rm = sd.T[sel][:, None], sd.R_minus[sel][:, None]
    fp = e * mp
    rec = (mm_neg * e + Rm * mm * e.conj()) / T
    return float(np.max(np.abs(fp - rec)))


def derivative_bound(sd: ScatteringData) -> float:
    """max_k <k> |dT/dk|; requires derivative data."""
    if sd.dk_T is None:
        raise ValueError("scattering data has no k-derivatives")
    return float(np.max(np.sqrt(1 + sd.k_grid**2) * np.abs(sd.dk_T)))
