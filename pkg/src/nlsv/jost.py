"""
Jost modifiers m_+(x,k), m_-(x,k) and their k-derivatives.

m_+ solves m(x) = 1 + int_x^inf D_k(y - x) V(y) m(y) dy with
D_k(d) = (exp(2ikd) - 1)/(2ik).  Because D_k(y - x) separates into
exp(2iky) exp(-2ikx) and 1, the trapezoid discretization of the Volterra
equation becomes an explicit backward sweep: the node-j term has zero kernel,
so m_j only needs the running sums of the nodes to its right.

Derivatives in k satisfy the same Volterra equation with extra sources
(-2i m' for the first, -4i (dm/dk)' for the second), and m' itself is
-exp(-2ikx) A(x), where A is the running sum with the exp(2iky) weight.

Only the window where V is numerically non-zero is swept.  Outside it
the fields are given in closed form by the plane-wave tails:

    m_+(x,k) = 1                                 right of the window
    m_+(x,k) = 1 + (exp(-2ikx) A - B)/(2ik)      left of the window

with A = int exp(2iky) V m_+, B = int V m_+.  m_- is obtained from m_+ of
the reflected potential V(-x).

For analytic potentials the sweep runs on an internal refinement of the
user grid and three step sizes are combined by Richardson extrapolation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg

from .potential import PotentialSpec

SIDES = ("+", "-")

# window: where |V| exceeds this fraction of max|V|
WINDOW_REL_THRESHOLD = 1e-17
# internal step target: 2 k_max h <= STEP_PHASE
STEP_PHASE = 0.04
MAX_INTERNAL_STEP = 0.02
SMALL_K = 1e-4
_BLOCK = 256


def staggered_k_grid(dk: float, n_k: int) -> np.ndarray:
    """k_j = (j + 1/2) dk for j = -n_k .. n_k-1."""
    return (np.arange(-n_k, n_k) + 0.5) * dk


def dk_kernel(k, d, order: int = 0):
    """D_k(d) = (exp(2ikd) - 1)/(2ik) and its k-derivatives.

    A Taylor series in z = 2ikd is used where |z| < 1/2 (or |k| < SMALL_K):
    there the closed forms lose up to |z|^-order digits to cancellation.
    """
    k = np.asarray(k, dtype=float)
    d = np.asarray(d, dtype=float)
    k, d = np.broadcast_arrays(k, d)
    out = np.empty(k.shape, dtype=complex)
    small = (np.abs(k) < SMALL_K) | (np.abs(2 * k * d) < 0.5)
    big = ~small
    if big.any():
        kb, db = k[big], d[big]
        z = 2j * kb
        e = np.exp(z * db)
        if order == 0:
            out[big] = (e - 1) / z
        elif order == 1:
            # d/dk: (2id e)/(2ik) - (e-1)/(2ik^2)
            out[big] = db * e / kb - (e - 1) / (z * kb)
        elif order == 2:
            out[big] = (2j * db**2 * e / kb - 2 * db * e / kb**2
                        + 2 * (e - 1) / (z * kb**2))
        else:
            raise ValueError("order must be 0, 1 or 2")
    if small.any():
        ks, ds = k[small], d[small]
        z = 2j * ks * ds
        # D = d sum_n z^n/(n+1)!  ;  derivatives term by term in k
        acc = np.zeros(ks.shape, dtype=complex)
        for n in range(order, 18):
            coef = math.factorial(n) // math.factorial(n - order) if order else 1
            acc += coef * (2j) ** n * ks ** (n - order) * ds ** (n + 1) / math.factorial(n + 1)
        out[small] = acc
    return out


@dataclass
class _SideSolution:
    """m_+ data for one side, in that side's (possibly reflected) frame."""

    x: np.ndarray           # user grid in the side frame, ascending
    i_lo: int               # window = x[i_lo .. i_hi]
    i_hi: int
    win: np.ndarray | None  # (order+1, n_k, n_win) sweep fields on window nodes
    totals: dict            # A, B and their k-derivatives, each (n_k,)
    residual_scale: float

    def values(self, k, kidx, order, idx):
        """Fields at user-grid indices idx (side frame) for the k values ``k``
        (positions ``kidx`` in the solved grid); shape (len(k), len(idx))."""
        idx = np.asarray(idx)
        x = self.x[idx]
        out = np.zeros((len(k), len(idx)), dtype=complex)
        if order == 0:
            out[:] = 1.0
        inside = (idx >= self.i_lo) & (idx <= self.i_hi)
        left = idx < self.i_lo
        if inside.any():
            if self.win is None:
                raise ValueError("window fields were not stored")
            out[:, inside] = self.win[order][np.ix_(kidx, idx[inside] - self.i_lo)]
        if left.any():
            out[:, left] = left_tail(k, x[left], {n: t[kidx] for n, t in self.totals.items()}, order)
        return out


def left_tail(k, x, totals, order=0):
    """m_+ and k-derivatives left of the support from the totals A, B."""
    k = np.asarray(k, dtype=float)[:, None]
    x = np.asarray(x, dtype=float)[None, :]
    A, B = totals["A"][:, None], totals["B"][:, None]
    e = np.exp(-2j * k * x)
    N = e * A - B
    z = 2j * k
    if order == 0:
        return 1 + N / z
    dA, dB = totals["dA"][:, None], totals["dB"][:, None]
    N1 = -2j * x * e * A + e * dA - dB
    if order == 1:
        return N1 / z - N / (z * k)
    d2A, d2B = totals["d2A"][:, None], totals["d2B"][:, None]
    N2 = (-2j * x) ** 2 * e * A + 2 * (-2j * x) * e * dA + e * d2A - d2B
    return N2 / z - 2 * N1 / (z * k) + 2 * N / (z * k**2)


def _sweep(x0, h, n, v, k, order, stride, accumulate_dk=True):
    """Backward trapezoid sweep on nodes x0 + h*j, j=0..n-1, right to left.

    Returns (fields at every stride-th node, totals).
    """
    nk = len(k)
    n_out = (n - 1) // stride + 1
    fields = np.empty((order + 1, nk, n_out), dtype=complex)
    inv = 1.0 / (2j * k)
    x_all = x0 + h * np.arange(n)
    sa = np.zeros((order + 1, nk), dtype=complex)  # raw sums over i > j
    sb = np.zeros((order + 1, nk), dtype=complex)
    a_last = np.zeros((order + 1, nk), dtype=complex)
    b_last = np.zeros((order + 1, nk), dtype=complex)
    # trapezoid totals of the k-derivatives of A and B
    tdA = np.zeros(nk, dtype=complex)
    tdB = np.zeros(nk, dtype=complex)
    td2A = np.zeros(nk, dtype=complex)
    td2B = np.zeros(nk, dtype=complex)
    cur = np.zeros((order + 1, nk), dtype=complex)
    for b_end in range(n, 0, -_BLOCK):
        b_start = max(0, b_end - _BLOCK)
        xb = x_all[b_start:b_end]
        E = np.exp(2j * np.outer(xb, k))
        for jj in range(b_end - b_start - 1, -1, -1):
            j = b_start + jj
            e = E[jj]
            ec = e.conj()
            vj = v[j]
            w = h if 0 < j < n - 1 else 0.5 * h
            if j == n - 1:
                cur[0] = 1.0
                cur[1:] = 0.0
                full_a = np.zeros((order + 1, nk), dtype=complex)
            else:
                at = h * (sa + 0.5 * a_last)
                bt = h * (sb + 0.5 * b_last)
                cur[0] = 1.0 + (ec * at[0] - bt[0]) * inv
                full_a = at.copy()
                full_a[0] += 0.5 * h * e * vj * cur[0]
                if order >= 1:
                    cur[1] = (ec * at[1] - bt[1]) * inv
                    if order >= 2:
                        cur[2] = (ec * at[2] - bt[2]) * inv
            # forcing F_s = V m_s + sigma_s
            f = np.empty((order + 1, nk), dtype=complex)
            f[0] = vj * cur[0]
            if order >= 1:
                f[1] = vj * cur[1] + 2j * ec * full_a[0]
                if j != n - 1:
                    full_a[1] += 0.5 * h * e * f[1]
            if order >= 2:
                f[2] = vj * cur[2] + 4j * ec * full_a[1]
            a = e * f
            if j == n - 1:
                a_last[:] = a
                b_last[:] = f
            else:
                sa += a
                sb += f
            if accumulate_dk and vj != 0.0:
                xj = x_all[j]
                g0 = e * vj * cur[0]
                if order >= 1:
                    tdB += w * vj * cur[1]
                    tdA += w * (2j * xj * g0 + e * vj * cur[1])
                if order >= 2:
                    td2A += w * (-4 * xj**2 * g0 + 4j * xj * e * vj * cur[1] + e * vj * cur[2])
                    td2B += w * vj * cur[2]
            if j % stride == 0:
                fields[:, :, j // stride] = cur
    # totals over the whole window (node 0 included with half weight)
    # sa, sb hold nodes 0..n-2 at this point
    A = h * (sa[0] - 0.5 * a[0] + 0.5 * a_last[0])
    B = h * (sb[0] - 0.5 * f[0] + 0.5 * b_last[0])
    totals = {"A": A, "B": B}
    if order >= 1:
        totals["dA"], totals["dB"] = tdA, tdB
    if order >= 2:
        totals["d2A"], totals["d2B"] = td2A, td2B
    return fields, totals


def _window(spec: PotentialSpec, x: np.ndarray, v_frame) -> tuple[int, int]:
    """Index range of the user grid (side frame) covering the support of V."""
    if spec.family == "square_barrier":
        hw = spec._half_width()
        i_lo = int(np.argmin(np.abs(x + hw)))
        i_hi = int(np.argmin(np.abs(x - hw)))
        if abs(x[i_lo] + hw) > 1e-9 * max(1.0, hw) or abs(x[i_hi] - hw) > 1e-9 * max(1.0, hw):
            raise ValueError("square_barrier edges must be grid nodes")
        return i_lo, i_hi
    vals = np.abs(v_frame(x))
    vmax = vals.max() if vals.size else 0.0
    if vmax == 0.0:
        return 0, -1
    nz = np.nonzero(vals > WINDOW_REL_THRESHOLD * vmax)[0]
    i_lo = max(int(nz[0]) - 1, 0)
    i_hi = min(int(nz[-1]) + 1, len(x) - 1)
    return i_lo, i_hi


def _frame(spec: PotentialSpec, side: str):
    """User grid and V in the side frame (reflected for m_-)."""
    x = spec.grid.x
    if side == "+":
        xf = x
        if spec.analytic:
            vf = spec.__call__
        else:
            samples = np.asarray(spec.samples, dtype=float)
            vf = _sample_lookup(xf, samples)
    else:
        xf = -x[::-1]
        if spec.analytic:
            vf = lambda y: spec(-np.asarray(y))  # noqa: E731
        else:
            samples = np.asarray(spec.samples, dtype=float)[::-1]
            vf = _sample_lookup(xf, samples)
    return xf, vf


def _sample_lookup(xf, samples):
    def f(y):
        y = np.asarray(y, dtype=float)
        if y.shape == xf.shape and np.array_equal(y, xf):
            return samples
        idx = np.rint((y - xf[0]) / (xf[1] - xf[0])).astype(int)
        return samples[idx]
    return f


def _internal_v(spec, vf, x0, h, n, refine):
    xs = x0 + h * np.arange(n)
    if spec.analytic:
        v = np.asarray(vf(xs), dtype=float)
        if spec.family == "square_barrier":
            v = np.full(n, spec.amplitude)
        return v
    return np.asarray(vf(xs), dtype=float)


def _solve_side(spec, kpos, side, order, refine, store_fields, levels=3):
    x, vf = _frame(spec, side)
    dx = spec.grid.dx
    i_lo, i_hi = _window(spec, x, vf)
    nk = len(kpos)
    if i_hi <= i_lo:
        totals = {key: np.zeros(nk, dtype=complex) for key in ("A", "B", "dA", "dB", "d2A", "d2B")}
        win = np.zeros((order + 1, nk, 0), dtype=complex)
        if store_fields and order >= 0:
            win = np.zeros((order + 1, nk, 0), dtype=complex)
        return _SideSolution(x, 0, -1, win, totals, 0.0)
    n_cells = i_hi - i_lo
    if spec.analytic and refine:
        kmax = float(np.max(kpos)) if nk else 1.0
        h_target = min(MAX_INTERNAL_STEP, STEP_PHASE / (2 * max(kmax, 1e-3)))
        r = max(1, int(math.ceil(dx / h_target - 1e-9)))
    else:
        r = 1
        levels = 1
    results = []
    for lev in range(levels):
        sub = r * 2**lev
        h = dx / sub
        n = n_cells * sub + 1
        v = _internal_v(spec, vf, x[i_lo], h, n, refine)
        f, t = _sweep(x[i_lo], h, n, v, kpos, order, stride=sub)
        results.append((f, t))
    if levels == 3:
        comb = lambda a, b, c: (64 * c - 20 * b + a) / 45  # noqa: E731
        fields = comb(results[0][0], results[1][0], results[2][0])
        totals = {key: comb(results[0][1][key], results[1][1][key], results[2][1][key])
                  for key in results[0][1]}
        scale = float(np.max(np.abs(results[2][0] - results[1][0]), initial=0.0))
    else:
        fields, totals = results[0]
        scale = math.nan
    return _SideSolution(x, i_lo, i_hi, fields if store_fields else None, totals, scale)


@dataclass
class JostField:
    """Jost modifiers on a staggered k grid and the user x grid.

    Arrays follow the row-major (k, x) layout.  Fields are materialized lazily
    from the swept window and the closed-form tails; use :meth:`evaluate` to
    get sub-blocks without building the full arrays.
    """

    spec: PotentialSpec
    k_grid: np.ndarray
    derivative_order: int
    sides: tuple
    _kpos: np.ndarray = field(repr=False)
    _inverse: np.ndarray = field(repr=False)
    _sol: dict = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def x_grid(self) -> np.ndarray:
        return self.spec.grid.x

    @property
    def side(self) -> str:
        return "both" if len(self.sides) == 2 else self.sides[0]

    def totals(self, side: str) -> dict:
        """Totals A, B (and k-derivatives) on the positive k values ``kpos``."""
        return self._sol[side].totals

    @property
    def kpos(self) -> np.ndarray:
        return self._kpos

    def evaluate(self, side: str, order: int = 0, x_idx=None, k=None) -> np.ndarray:
        """m_side (or d^order/dk^order m_side) at user-grid indices ``x_idx``.

        ``k`` must be a subset of |k_grid| values (any sign); by default the
        full k grid.  Returns shape (len(k), len(x_idx)).
        """
        if side not in self.sides:
            raise ValueError(f"side {side} not populated")
        if order > self.derivative_order:
            raise ValueError("derivative order not computed")
        n_x = self.spec.grid.n_x
        x_idx = np.arange(n_x) if x_idx is None else np.asarray(x_idx)
        if k is None:
            kk = self.k_grid
            pos_index = self._inverse
        else:
            kk = np.asarray(k, dtype=float)
            pos_index = np.searchsorted(self._kpos, np.abs(kk))
            if np.any(pos_index >= len(self._kpos)) or not np.allclose(self._kpos[np.minimum(pos_index, len(self._kpos) - 1)], np.abs(kk)):
                raise ValueError("k values not on the Jost grid")
        sol = self._sol[side]
        idx_frame = x_idx if side == "+" else n_x - 1 - x_idx
        uniq, inv = np.unique(pos_index, return_inverse=True)
        vals = sol.values(self._kpos[uniq], uniq, order, idx_frame)[inv]
        neg = kk < 0
        if neg.any():
            # m(x,-k) = conj m(x,k); d/dk picks up (-1)^order
            vals[neg] = (-1) ** order * vals[neg].conj()
        return vals

    def _full(self, side, order):
        key = (side, order)
        if key not in self._cache:
            self._cache[key] = self.evaluate(side, order)
        return self._cache[key]

    @property
    def m_plus(self):
        return self._full("+", 0)

    @property
    def m_minus(self):
        return self._full("-", 0)

    @property
    def dk_m_plus(self):
        return self._full("+", 1)

    @property
    def dk_m_minus(self):
        return self._full("-", 1)

    def window(self, side: str) -> tuple[float, float]:
        """Support window in physical x."""
        sol = self._sol[side]
        if sol.i_hi < sol.i_lo:
            return (0.0, 0.0)
        a, b = sol.x[sol.i_lo], sol.x[sol.i_hi]
        return (a, b) if side == "+" else (-b, -a)

    def richardson_estimate(self, side: str) -> float:
        return self._sol[side].residual_scale


def solve_m(spec: PotentialSpec, k_grid, side: str = "both", derivative_order: int = 0,
            refine: bool = True, store_fields: bool = True) -> JostField:
    """Backward-sweep solution of the Volterra equations for m_+ and/or m_-.

    Parameters
    ----------
    spec : PotentialSpec
        Potential and user grid.  Analytic families are re-sampled on an
        internal refinement of the grid.
    k_grid : array
        Non-zero k values; negative entries are filled by conjugation.
    side : {"+", "-", "both"}
    derivative_order : 0, 1 or 2
    store_fields : bool
        Keep the window fields (needed for x-resolved output).  Totals are
        always kept.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    if derivative_order not in (0, 1, 2):
        raise ValueError("derivative_order must be 0, 1 or 2")
    if np.any(k_grid == 0):
        raise ValueError("k grid must avoid k = 0 (use a staggered grid)")
    sides = SIDES if side == "both" else (side,)
    for s in sides:
        if s not in SIDES:
            raise ValueError(f"unknown side {s!r}")
    kpos, inverse = np.unique(np.abs(k_grid), return_inverse=True)
    sols = {s: _solve_side(spec, kpos, s, derivative_order, refine, store_fields) for s in sides}
    return JostField(spec, k_grid, derivative_order, sides, kpos, inverse, sols)


def solve_m_zero(spec: PotentialSpec, side: str = "+", refine: bool = True):
    """m_side(x, 0) on the user grid and I0 = int V m(., 0) dx.

    At k = 0 the kernel is D_0(d) = d, which separates as y - x, so the
    same explicit sweep applies with polynomial weights.
    """
    x, vf = _frame(spec, side)
    dx = spec.grid.dx
    i_lo, i_hi = _window(spec, x, vf)
    m = np.ones(len(x))
    if i_hi <= i_lo:
        return m, 0.0
    n_cells = i_hi - i_lo
    r = max(1, int(math.ceil(dx / MAX_INTERNAL_STEP - 1e-9))) if spec.analytic and refine else 1
    levels = 3 if spec.analytic and refine else 1
    outs = []
    for lev in range(levels):
        sub = r * 2**lev
        h = dx / sub
        n = n_cells * sub + 1
        xs = x[i_lo] + h * np.arange(n)
        v = _internal_v(spec, vf, x[i_lo], h, n, refine)
        mm = np.empty(n)
        sp = sq = 0.0       # sums over i > j of y V m and V m
        p_last = q_last = 0.0
        for j in range(n - 1, -1, -1):
            if j == n - 1:
                mm[j] = 1.0
            else:
                P = h * (sp + 0.5 * p_last)
                Q = h * (sq + 0.5 * q_last)
                mm[j] = 1.0 + P - xs[j] * Q
            q = v[j] * mm[j]
            if j == n - 1:
                p_last, q_last = xs[j] * q, q
            else:
                sp += xs[j] * q
                sq += q
        q0 = v[0] * mm[0]
        I0 = h * (sq - 0.5 * q0 + 0.5 * q_last)
        S = h * (sp - 0.5 * xs[0] * q0 + 0.5 * p_last)
        outs.append((mm[::sub], I0, S))
    if levels == 3:
        comb = lambda a, b, c: (64 * c - 20 * b + a) / 45  # noqa: E731
        mw = comb(outs[0][0], outs[1][0], outs[2][0])
        I0 = comb(outs[0][1], outs[1][1], outs[2][1])
        S = comb(outs[0][2], outs[1][2], outs[2][2])
    else:
        mw, I0, S = outs[0]
    m[i_lo:i_hi + 1] = mw
    # left of the window: m = 1 + S - x I0 (linear growth)
    m[:i_lo] = 1.0 + S - x[:i_lo] * I0
    if side == "-":
        m = m[::-1]
    return m, float(I0)


# ----------------------------------------------------------------------------
# cross-check solvers and diagnostics

def solve_m_direct(spec: PotentialSpec, k: float, side: str = "+", picard: bool = False,
                   max_iter: int = 200, tol: float = 1e-13):
    """O(N^2) solve of the discretized Volterra equation on the user grid.

    The kernel is evaluated with :func:`dk_kernel` (so k may be tiny).  With
    ``picard=True`` the fixed point is found by Picard iteration and the
    achieved residual is returned; otherwise the triangular system is solved
    directly.  Returns (m on the user grid, residual).
    """
    x, vf = _frame(spec, side)
    v = np.asarray(vf(x), dtype=float)
    n = len(x)
    h = spec.grid.dx
    w = np.full(n, h)
    w[-1] = 0.5 * h
    d = x[None, :] - x[:, None]
    K = np.triu(dk_kernel(np.full_like(d, k), d), 1) * (w * v)[None, :]
    if picard:
        m = np.ones(n, dtype=complex)
        res = math.inf
        for _ in range(max_iter):
            m_new = 1 + K @ m
            res = float(np.max(np.abs(m_new - m)))
            m = m_new
            if res < tol:
                break
        else:
            warnings.warn(f"Picard iteration did not converge (residual {res:.3e})", RuntimeWarning)
    else:
        m = linalg.solve_triangular(np.eye(n) - K, np.ones(n, dtype=complex), lower=False)
        res = float(np.max(np.abs(m - 1 - K @ m)))
    if side == "-":
        m = m[::-1]
    return m, res


def volterra_residual(jf: JostField, side: str = "+", k_idx=None) -> float:
    """sup |m - 1 - int_x^inf D_k(y-x) V m dy| on the user grid.

    The integral is evaluated with cumulative Simpson on the user grid, so
    the residual measures the user-grid quadrature error as well.
    """
    spec = jf.spec
    x, vf = _frame(spec, side)
    v = np.asarray(vf(x), dtype=float) if spec.analytic else vf(x)
    ks = jf.k_grid if k_idx is None else jf.k_grid[np.atleast_1d(k_idx)]
    m = jf.evaluate(side, 0, k=ks)
    if side == "-":
        m = m[:, ::-1]
    worst = 0.0
    for i, k in enumerate(ks):
        g = v * m[i]
        eA = np.exp(2j * k * x)
        # integrals from x to the right end, via reversed cumulative Simpson
        A = _tail_integral(eA * g, spec.grid.dx)
        B = _tail_integral(g, spec.grid.dx)
        rhs = 1 + (eA.conj() * A - B) / (2j * k)
        worst = max(worst, float(np.max(np.abs(m[i] - rhs))))
    return worst


def _tail_integral(g, dx):
    """int_{x_j}^{x_end} g for every node, by cumulative Simpson."""
    rev = g[::-1]
    re = integrate.cumulative_simpson(rev.real, dx=dx, initial=0)
    im = integrate.cumulative_simpson(rev.imag, dx=dx, initial=0)
    return (re + 1j * im)[::-1]


@dataclass
class BoundReport:
    constants: dict        # (side, s, region) -> C
    refined: dict          # same keys at doubled resolution
    finite: bool
    stable: bool

    def to_dict(self):
        fmt = lambda d: {f"{a}|{b}|{c}": v for (a, b, c), v in d.items()}  # noqa: E731
        return {"constants": fmt(self.constants), "refined": fmt(self.refined),
                "finite": self.finite, "stable": self.stable}


def _bound_constants(jf: JostField, wf) -> dict:
    x = jf.x_grid
    kk = jf.k_grid
    bracket_k = np.sqrt(1 + kk**2)[:, None]
    out = {}
    for side in jf.sides:
        sign = 1 if side == "+" else -1
        W = wf.plus if side == "+" else wf.minus
        for s in range(jf.derivative_order + 1):
            f = jf.evaluate(side, s)
            if s == 0:
                f = f - 1
            num = np.abs(f) * bracket_k
            good = sign * x >= -1
            denom = W[s + 1][good]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(denom > 1e-300, num[:, good] / denom, 0.0)
                # where the weight has vanished the field must vanish too
                ratio = np.where((denom <= 1e-300) & (num[:, good] > 1e-12), np.inf, ratio)
            out[(side, s, "good")] = float(np.max(ratio, initial=0.0))
            bad = sign * x <= 1
            ratio = num[:, bad] / (1 + x[bad] ** 2) ** ((s + 1) / 2)
            out[(side, s, "bad")] = float(np.max(ratio, initial=0.0))
    return out


def check_m_bounds(jf: JostField, wf=None, rel_tol: float = 0.1) -> BoundReport:
    """Empirical constants of the pointwise bounds on m_side - 1 and its k-derivatives.

    C(s) = max |d_k^s (m - 1)| <k> / W^{s+1}(x) on +-x >= -1, and the variant
    with <x>^{s+1} on +-x <= 1.  Stability is judged by re-solving on a grid
    with twice as many points.
    """
    from .potential import PotentialSpec, weight_functions

    if wf is None:
        wf = weight_functions(jf.spec)
    c = _bound_constants(jf, wf)
    spec = jf.spec
    if spec.analytic:
        g2 = spec.grid.refined(2)
        spec2 = PotentialSpec(spec.family, spec.params, spec.gamma, g2)
        jf2 = solve_m(spec2, jf.k_grid, jf.side, jf.derivative_order)
        c2 = _bound_constants(jf2, weight_functions(spec2))
    else:
        c2 = dict(c)
    finite = all(math.isfinite(v) for v in c.values())
    stable = all(abs(c[key] - c2[key]) <= rel_tol * max(abs(c[key]), 1e-14) for key in c)
    return BoundReport(c, c2, finite, stable)
