"""
The fifteen acceptance checks.

Each check returns (passed, metrics).  Expensive shared work (the long
linear and nonlinear runs, their profiles) lives on a Context and is built
on first use, so running several checks together costs one set of runs.
"""

from __future__ import annotations

import copy
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asy
from . import distorted, dynamics, jost, oracles, potential, scattering

DEFAULTS = {
    "seed": 0,
    "flat_limit": {"x_max": 192.0, "n_x": 1537, "dk": 0.01, "n_k": 300, "n_tests": 10,
                   "max_seconds": 10.0},
    "unitarity": {"n_x": 16384, "k_min": 0.05, "k_max": 10.0, "n_k": 200},
    "square_oracle": {"k": [0.5, 1.0, 2.0, 5.0]},
    "genericity": {"dk": 0.01},
    "isometry": {"x_max": 192.0, "n_x": 1537, "dk": 0.01, "n_k": 800, "n_tests": 20},
    "diagonalization": {"dx": [0.1, 0.05, 0.025], "dk": 0.05, "n_k": 200},
    "jost_oracle": {"k": [0.1, 1.0, 5.0]},
    "long_run": {"x_max": 2048.0, "n_x": 16384, "dt": 5e-3, "t_max": 200.0, "epsilon0": 0.1,
                 "sigma": 3.0, "dk": 0.02, "k_max": 8.0, "decay_window": [5.0, 200.0]},
    "conservation": {"x_max": 160.0, "n_x": 1025, "k_max": 1.2, "dt": 1e-3, "t_max": 50.0,
                     "epsilon0": 0.1, "sigma": 6.0, "x0": -40.0,
                     "scheme": "distorted_exact_linear"},
    "modified_scattering": {"times": [25.0, 50.0, 100.0], "drift_window": [50.0, 200.0]},
    "reduced_ode": {"seeds": [25.0, 50.0], "t_end": 200.0, "dt": 0.05},
    "oscillatory": {"t": 100.0, "y_min": 10.0, "y_max": 100.0, "n_y": 1801, "bound": 0.5},
    "physical": {"times": [50.0, 100.0, 200.0], "weight": 0.3},
}


def merged(config: dict | None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    for key, val in (config or {}).items():
        if isinstance(val, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(val)
        else:
            cfg[key] = val
    return cfg


def test_functions(rng, x, n):
    """Smooth, band-limited wave packets with a linear envelope factor."""
    out = []
    for _ in range(n):
        s = rng.uniform(3.0, 6.0)
        p = rng.uniform(-0.5, 0.5)
        c = rng.uniform(-30.0, 30.0)
        a = rng.uniform(-1.0, 1.0)
        y = (x - c) / s
        out.append(np.exp(-0.5 * y**2 + 1j * p * x) * (1 + a * y))
    return np.array(out).T           # (n_x, n)


class Context:
    def __init__(self, config=None):
        self.cfg = merged(config)
        self.rng = np.random.default_rng(self.cfg["seed"])
        self._cache = {}

    def get(self, name, build):
        if name not in self._cache:
            self._cache[name] = build()
        return self._cache[name]

    # long runs -------------------------------------------------------------

    @property
    def long_spec(self):
        c = self.cfg["long_run"]
        return potential.gaussian_barrier(x_min=-c["x_max"], x_max=c["x_max"], n_x=c["n_x"])

    @property
    def long_basis(self):
        def build():
            c = self.cfg["long_run"]
            n_k = int(round(c["k_max"] / c["dk"]))
            return distorted.basis_for(self.long_spec, jost.staggered_k_grid(c["dk"], n_k))
        return self.get("long_basis", build)

    def long_run(self, nonlinear: bool):
        def build():
            c = self.cfg["long_run"]
            spec = self.long_spec
            x = spec.grid.x
            u0 = dynamics.gaussian_data(x, c["epsilon0"], sigma=c["sigma"])
            # snapshots: 0 and a geometric ladder with ratio 2^(1/8) ending at t_max
            ladder = {c["t_max"] * 2 ** (-j / 8) for j in range(81)}
            snaps = tuple(sorted({0.0} | ladder))
            # reach is set by the distorted spectrum of the data, not its flat one
            ut = self.long_basis.forward(u0, check=False).values
            a = np.abs(ut)
            k_eff = float(np.max(np.abs(self.long_basis.k[a > 1e-3 * a.max()])))
            cfg = dynamics.RunConfig(dt=c["dt"], t_max=c["t_max"], epsilon0=c["epsilon0"],
                                     snapshot_times=snaps, nonlinear=nonlinear,
                                     reach_bandwidth=k_eff, enforce_reach=False)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return dynamics.evolve(u0, cfg, x, potential.sample_potential(spec))
        return self.get(("run", nonlinear), build)

    @property
    def history(self):
        return self.get("hist", lambda: asy.extract_profiles(self.long_run(True), self.long_basis))

    @property
    def history_neg(self):
        def build():
            neg = dynamics.mirrored(self.long_run(True))
            return asy.extract_profiles(neg, self.long_basis)
        return self.get("hist_neg", build)

    @property
    def band(self) -> float:
        c = self.cfg["long_run"]
        return asy.resolved_k(c["x_max"], c["t_max"])


# ----------------------------------------------------------------------------
# checks

def c01_flat_limit(ctx):
    c = ctx.cfg["flat_limit"]
    t0 = time.perf_counter()
    spec = potential.gaussian_barrier(amplitude=0.0, x_min=-c["x_max"], x_max=c["x_max"], n_x=c["n_x"])
    kg = jost.staggered_k_grid(c["dk"], c["n_k"])
    jf = jost.solve_m(spec, kg, "both")
    sd = scattering.compute_TR(jf)
    tr_err = max(float(np.max(np.abs(sd.T - 1))), float(np.max(np.abs(sd.R_plus))),
                 float(np.max(np.abs(sd.R_minus))))
    basis = distorted.build_basis(sd, jf)
    x = spec.grid.x
    F = test_functions(ctx.rng, x, c["n_tests"])
    fwd = basis.forward(F, check=False).values
    E = np.exp(-1j * np.outer(kg, x)) / math.sqrt(2 * math.pi)
    ref = E @ (basis.wx[:, None] * F)
    fwd_err = float(np.max(np.linalg.norm(fwd - ref, axis=0) / np.linalg.norm(ref, axis=0)))
    inv = basis.inverse(ref, check=False)
    ref_inv = E.conj().T @ (basis.wk[:, None] * ref)
    inv_err = float(np.max(np.linalg.norm(inv - ref_inv, axis=0) / np.linalg.norm(ref_inv, axis=0)))
    secs = time.perf_counter() - t0
    ok = tr_err < 1e-10 and fwd_err < 1e-8 and inv_err < 1e-8 and secs < c["max_seconds"]
    return ok, {"TR_error": tr_err, "forward_rel_error": fwd_err, "inverse_rel_error": inv_err,
                "seconds": secs}


def c02_unitarity(ctx):
    c = ctx.cfg["unitarity"]
    spec = potential.gaussian_barrier(n_x=c["n_x"])
    k = np.linspace(c["k_min"], c["k_max"], c["n_k"])
    sd = scattering.scattering_data(spec, k)
    d = float(np.max(sd.unitarity_defect))
    return d < 1e-6, {"max_defect": d, "n_x": c["n_x"]}


def c03_square_oracle(ctx):
    k = np.array(ctx.cfg["square_oracle"]["k"])
    spec = potential.square_barrier()
    sd = scattering.scattering_data(spec, k)
    T, _, _ = oracles.square_barrier_TR(spec.params["amplitude"], spec.params["half_width"], k)
    err = float(np.max(np.abs(np.abs(sd.T) ** 2 - np.abs(T) ** 2)))
    return err < 1e-6, {"max_T2_error": err}


def c04_genericity(ctx):
    g = scattering.genericity_report(potential.gaussian_barrier(), dk=ctx.cfg["genericity"]["dk"])
    bound = 2 * abs(g.T_slope_at_zero) * g.k_min
    rp, rm = abs(g.R_plus_at_kmin + 1), abs(g.R_minus_at_kmin + 1)
    ok = g.is_generic and abs(g.T_at_kmin) <= bound and rp < 0.05 and rm < 0.05
    return ok, {"I0": g.integral_direct, "abs_T_kmin": abs(g.T_at_kmin), "bound": bound,
                "R_plus_plus_1": rp, "R_minus_plus_1": rm, "k_min": g.k_min}


def c05_isometry(ctx):
    c = ctx.cfg["isometry"]
    spec = potential.gaussian_barrier(x_min=-c["x_max"], x_max=c["x_max"], n_x=c["n_x"])
    basis = distorted.basis_for(spec, jost.staggered_k_grid(c["dk"], c["n_k"]))
    F = test_functions(ctx.rng, spec.grid.x, c["n_tests"])
    ft = basis.forward(F, check=False).values
    back = basis.inverse(ft, check=False)
    pars, rt = 0.0, 0.0
    for j in range(F.shape[1]):
        nx = basis.l2_x(F[:, j])
        pars = max(pars, abs(basis.l2_k(ft[:, j]) / nx - 1))
        rt = max(rt, basis.l2_x(back[:, j] - F[:, j]) / nx)
    return pars < 1e-6 and rt < 1e-6, {"parseval_defect": pars, "roundtrip_error": rt}


def c06_diagonalization(ctx):
    c = ctx.cfg["diagonalization"]
    kg = jost.staggered_k_grid(c["dk"], c["n_k"])
    res = []
    for dx in c["dx"]:
        n = int(round(24 / dx)) + 1
        spec = potential.gaussian_barrier(n_x=n)
        basis = distorted.basis_for(spec, kg)
        x = spec.grid.x
        res.append(distorted.diagonalization_residual(x * np.exp(-x**2), basis,
                                                      potential.sample_potential(spec)))
    orders = [math.log2(res[i] / res[i + 1]) for i in range(len(res) - 1)]
    ok = max(res) < 1e-3 and all(3.5 <= p <= 4.5 for p in orders)
    return ok, {"residuals": res, "observed_orders": orders}


def c07_jost_oracle(ctx):
    ks = np.array(ctx.cfg["jost_oracle"]["k"])
    worst = {}
    for spec in (potential.gaussian_barrier(), potential.sech2_barrier(), potential.square_barrier()):
        jf = jost.solve_m(spec, ks, "both")
        x = spec.grid.x
        e = 0.0
        for side in ("+", "-"):
            m = jf.evaluate(side)
            for i, k in enumerate(ks):
                e = max(e, float(np.max(np.abs(m[i] - oracles.jost_ode(spec, k, x, side)))))
        worst[spec.family] = e
    return max(worst.values()) < 1e-7, {"sup_error": worst}


def c08_decay(ctx):
    w = ctx.cfg["long_run"]["decay_window"]
    lin = dynamics.decay_fit(ctx.long_run(False), tuple(w))
    nls = dynamics.decay_fit(ctx.long_run(True), tuple(w))
    ok = abs(lin.slope + 0.5) <= 0.05 and abs(nls.slope + 0.5) <= 0.05
    return ok, {"linear_slope": lin.slope, "nls_slope": nls.slope, "window": list(lin.window)}


def c09_conservation(ctx):
    c = ctx.cfg["conservation"]
    L = c["x_max"]
    spec = potential.gaussian_barrier(x_min=-L, x_max=L, n_x=c["n_x"])
    # dk = pi/L makes staggered plane waves orthogonal on the window
    dk = math.pi / L
    basis = distorted.basis_for(spec, jost.staggered_k_grid(dk, int(round(c["k_max"] / dk))))
    x = spec.grid.x
    u0 = dynamics.gaussian_data(x, c["epsilon0"], sigma=c["sigma"], x0=c["x0"])
    cfg = dynamics.RunConfig(dt=c["dt"], t_max=c["t_max"], scheme=c["scheme"],
                             epsilon0=c["epsilon0"], snapshot_times=(0.0, c["t_max"] / 2, c["t_max"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tr = dynamics.evolve(u0, cfg, x, potential.sample_potential(spec), basis=basis)
    q = np.array(tr.conserved)
    dm = float(np.max(np.abs(q[:, 1] / q[0, 1] - 1)))
    dh = float(np.max(np.abs(q[:, 2] / q[0, 2] - 1)))
    return dm < 1e-8 and dh < 1e-5, {"mass_drift": dm, "hamiltonian_drift": dh}


def c10_modified_scattering(ctx):
    c = ctx.cfg["modified_scattering"]
    hist = ctx.history
    mp = asy.correct_plus(hist)
    diffs = [mp.cauchy_difference(t, ctx.band) for t in c["times"]]
    decreasing = all(b < a for a, b in zip(diffs, diffs[1:]))
    n = hist.n_pos
    kstar = n + int(np.argmax(np.abs(hist.f_tilde[0, n:])))
    d_f, d_w = asy.phase_drift(hist, mp, kstar, *c["drift_window"])
    ratio = d_f / d_w if d_w > 0 else math.inf
    return decreasing and ratio >= 2, {"cauchy": diffs, "k_band": ctx.band,
                                       "k_star": float(hist.k_grid[kstar]),
                                       "drift_f": d_f, "drift_W": d_w, "drift_ratio": ratio}


def c11_modulus(ctx):
    hp = ctx.history
    mp = asy.correct_plus(hp)
    e_plus = float(np.max(np.abs(np.abs(mp.W) - np.abs(hp.f_tilde))))
    hn = ctx.history_neg
    mm = asy.correct_minus(hn, ctx.long_basis.scattering)
    nz = np.sqrt(np.sum(np.abs(hn.Z) ** 2, -1))
    nw = np.sqrt(np.sum(np.abs(mm.W) ** 2, -1))
    e_minus = float(np.max(np.abs(nw - nz)))
    ok = e_plus < 1e-10 and e_minus < 1e-10 and mm.unitary_defect < 1e-10
    return ok, {"plus": e_plus, "minus": e_minus, "unitary_defect": mm.unitary_defect}


def c12_negative_time(ctx):
    Z = ctx.rng.normal(size=(64, 2)) + 1j * ctx.rng.normal(size=(64, 2))
    out = {}
    for name, S in (("flat", np.eye(2)), ("k_to_0", np.array([[0.0, -1.0], [-1.0, 0.0]]))):
        S = np.broadcast_to(S.astype(complex), (64, 2, 2))
        Sinv = np.conj(np.swapaxes(S, -1, -2))
        S0, S1 = asy.s_matrices(Z, S, Sinv)
        out[name] = float(np.max(np.abs(S1 - S0)))
    # the same with measured data at the smallest k, for the record
    sd = ctx.long_basis.scattering
    S, Sinv = scattering.scattering_matrix(sd, sd.k_grid[:1])
    S0, S1 = asy.s_matrices(Z[:1], S, Sinv)
    out["measured_k_min"] = float(np.max(np.abs(S1 - S0)) / np.max(np.abs(S0)))
    out["k_min"] = float(sd.k_grid[0])
    return out["flat"] < 1e-8 and out["k_to_0"] < 1e-8, out


def c13_reduced_ode(ctx):
    c = ctx.cfg["reduced_ode"]
    hist = ctx.history
    sd = ctx.long_basis.scattering
    sel = hist.kpos <= ctx.band
    kp = hist.kpos[sel]
    btab = asy.BTable(min(c["seeds"]) * 0.9, c["t_end"] * 1.1)
    ref = hist.Z[hist.index(c["t_end"])][sel]
    errs = []
    for ts in c["seeds"]:
        _, Z = asy.reduced_ode_evolve(hist.Z[hist.index(ts)][sel], sd, kp, ts, c["t_end"],
                                      dt=c["dt"], btab=btab)
        errs.append(float(np.max(np.abs(Z[-1] - ref))))
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    return ok, {"seeds": c["seeds"], "mismatch": errs, "k_band": ctx.band}


def c14_oscillatory(ctx):
    c = ctx.cfg["oscillatory"]
    y = np.linspace(c["y_min"], c["y_max"], c["n_y"])
    oc = asy.oscillatory_coeffs(c["t"], np.concatenate([-y[::-1], y]))
    n = len(y)
    w = float(np.max(np.abs(oc.b[n:] - 1 / (2 * math.sqrt(2 * math.pi))) * np.sqrt(y)))
    odd = float(np.max(np.abs(oc.h[n:] + oc.h[:n][::-1])))
    return w <= c["bound"] and odd < 1e-8, {"weighted_sup": w, "oddness": odd}


def c15_physical(ctx):
    c = ctx.cfg["physical"]
    hist = ctx.history
    traj = ctx.long_run(True)
    x = traj.x
    kmax = float(np.max(hist.k_grid))
    half = 0.5 * min(x[-1], -x[0])
    vals = []
    for t in c["times"]:
        sel = (np.abs(x) <= half) & (np.abs(x) <= 2 * t * kmax)
        pred = asy.physical_asymptotics(hist.f_tilde[hist.index(t)], hist.k_grid, t, x[sel])
        vals.append(float(np.max(np.abs(traj.at(t).u[sel] - pred)) * t ** c["weight"]))
    ok = all(b <= a for a, b in zip(vals, vals[1:]))
    return ok, {"weighted_residual": vals}


CHECKS = {
    1: ("flat_limit", c01_flat_limit),
    2: ("unitarity", c02_unitarity),
    3: ("square_oracle", c03_square_oracle),
    4: ("genericity", c04_genericity),
    5: ("isometry", c05_isometry),
    6: ("diagonalization", c06_diagonalization),
    7: ("jost_oracle", c07_jost_oracle),
    8: ("decay", c08_decay),
    9: ("conservation", c09_conservation),
    10: ("modified_scattering", c10_modified_scattering),
    11: ("modulus", c11_modulus),
    12: ("negative_time", c12_negative_time),
    13: ("reduced_ode", c13_reduced_ode),
    14: ("oscillatory", c14_oscillatory),
    15: ("physical_asymptotics", c15_physical),
}


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0
    error: str | None = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        brief = self.error or ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items())
        return f"[{tag}] {self.number:2d} {self.name}: {brief}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(u) for u in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_short(u)}" for k, u in v.items()) + "}"
    return str(v)


def select(filter_: str | None) -> list[int]:
    if not filter_:
        return list(CHECKS)
    out = []
    for tok in filter_.split(","):
        tok = tok.strip()
        if tok.isdigit():
            out.append(int(tok))
        else:
            out += [n for n, (name, _) in CHECKS.items() if tok in name]
    if not out:
        raise KeyError(f"no check matches {filter_!r}")
    return sorted(set(out))


def run_check(number: int, ctx: Context) -> CheckResult:
    name, fn = CHECKS[number]
    # a stream per check, so results do not depend on which checks ran before
    ctx.rng = np.random.default_rng([ctx.cfg["seed"], number])
    t0 = time.perf_counter()
    try:
        ok, metrics = fn(ctx)
        return CheckResult(number, name, bool(ok), metrics, time.perf_counter() - t0)
    except Exception as exc:          # a crash is a failed check, reported as such
        return CheckResult(number, name, False, {}, time.perf_counter() - t0,
                           f"{type(exc).__name__}: {exc}")


def run_all(filter_: str | None = None, config: dict | None = None, ctx: Context | None = None):
    ctx = ctx or Context(config)
    return [run_check(n, ctx) for n in select(filter_)]
