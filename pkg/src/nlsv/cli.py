"""
nlsv: scatter | basis | evolve | asymptotics | verify

Exit codes: 0 success, 1 I/O or numerical failure, 2 hypothesis violations
under --strict, 3 failed verification checks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

EXIT_OK, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_VERIFY = 0, 1, 2, 3


class CliError(Exception):
    pass


def _load_json(path):
    p = Path(path)
    if not p.is_file():
        raise CliError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{p}: invalid JSON ({exc})") from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _potential(cfg):
    from . import potential
    d = cfg.get("potential", cfg)
    try:
        return potential.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise CliError(f"bad potential config: missing or invalid {exc}") from None


def _k_grid(cfg, default_dk=0.05, default_kmax=10.0):
    from . import jost
    k = cfg.get("k", {})
    dk = float(k.get("dk", default_dk))
    n = int(round(float(k.get("k_max", default_kmax)) / dk))
    return jost.staggered_k_grid(dk, n)


def _manifest(args, cfg, command):
    from .io import RunManifest, config_hash
    return RunManifest(config_hash(cfg), command,
                       [str(args.config)] if args.config else [],
                       extra={"seed": args.seed, "threads": args.threads})


# ----------------------------------------------------------------------------

def cmd_scatter(args) -> int:
    from . import potential, scattering
    from .io import SCATTERING_COLUMNS, scattering_rows, write_csv, write_json
    cfg = _load_json(args.config)
    spec = _potential(cfg)
    out = _out_dir(args)
    t0 = time.perf_counter()
    rep = potential.hypothesis_report(spec)
    kg = _k_grid(cfg)
    sd = scattering.scattering_data(spec, kg[kg > 0], derivative_order=1)
    m = _manifest(args, cfg, "scatter")
    m.add_output(write_csv(out / "scattering.csv", SCATTERING_COLUMNS, scattering_rows(sd)))
    m.add_output(write_json(out / "hypothesis.json", rep.to_dict()))
    m.timing["seconds"] = time.perf_counter() - t0
    m.verification_summary = {"max_unitarity_defect": float(sd.unitarity_defect.max()),
                              "hypothesis_violations": list(rep.violations)}
    m.write(out)
    print(f"scattering data for {spec.family}: {len(sd.k_grid)} k values, "
          f"max unitarity defect {sd.unitarity_defect.max():.2e}")
    if args.strict and rep.violations:
        print("hypothesis violations: " + "; ".join(rep.violations), file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_basis(args) -> int:
    from . import distorted
    from .io import SCATTERING_COLUMNS, file_hash, scattering_rows, write_csv, write_field
    cfg = _load_json(args.config)
    spec = _potential(cfg)
    out = _out_dir(args)
    t0 = time.perf_counter()
    basis = distorted.basis_for(spec, _k_grid(cfg))
    m = _manifest(args, cfg, "basis")
    sc = write_csv(out / "scattering.csv", SCATTERING_COLUMNS, scattering_rows(basis.scattering))
    m.add_output(sc)
    head = {"x_min": spec.grid.x_min, "x_max": spec.grid.x_max, "n_x": spec.grid.n_x,
            "k": basis.k.tolist(), "potential": spec.to_dict(),
            "scattering_sha256": file_hash(sc)}
    m.add_output(write_field(out / "basis.bin", basis.psi, head))
    m.timing["seconds"] = time.perf_counter() - t0
    m.write(out)
    print(f"basis: {basis.n_k} x {basis.n_x} written to {out / 'basis.bin'}")
    return EXIT_OK


def _run_from_config(cfg):
    from . import distorted, dynamics, potential
    spec = _potential(cfg)
    x = spec.grid.x
    r = dict(cfg.get("run", {}))
    r["snapshot_times"] = tuple(r.get("snapshot_times", ()))
    rc = dynamics.RunConfig(**r)
    d = cfg.get("data", {})
    u0 = dynamics.gaussian_data(x, rc.epsilon0, **d)
    basis = None
    if rc.scheme == "distorted_exact_linear" or "k" in cfg:
        basis = distorted.basis_for(spec, _k_grid(cfg, 0.02, 4.0))
    traj = dynamics.evolve(u0, rc, x, potential.sample_potential(spec), basis=basis)
    return spec, rc, basis, traj


def cmd_evolve(args) -> int:
    from .io import write_csv, write_field
    cfg = _load_json(args.config)
    out = _out_dir(args)
    t0 = time.perf_counter()
    spec, rc, _, traj = _run_from_config(cfg)
    m = _manifest(args, cfg, "evolve")
    U = [s.u for s in traj.states]
    head = {"x_min": spec.grid.x_min, "x_max": spec.grid.x_max, "n_x": spec.grid.n_x,
            "times": traj.times.tolist(), "config_hash": rc.hash()}
    m.add_output(write_field(out / "snapshots.bin", U, head))
    m.add_output(write_csv(out / "conserved.csv", ["t", "mass", "hamiltonian"], traj.conserved))
    m.timing["seconds"] = time.perf_counter() - t0
    m.extra.update({"scheme": rc.scheme, "run_hash": rc.hash(), "warnings": traj.warnings,
                    "conserved": [list(c) for c in traj.conserved]})
    m.write(out)
    print(f"{len(traj.states)} snapshots to t={traj.times[-1]:g} ({rc.scheme})")
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    import numpy as np

    from . import asymptotics as asy
    from .io import write_csv, write_json
    cfg = _load_json(args.config)
    out = _out_dir(args)
    t0 = time.perf_counter()
    cfg.setdefault("k", {"dk": 0.02, "k_max": 4.0})
    spec, rc, basis, traj = _run_from_config(cfg)
    hist = asy.extract_profiles(traj, basis)
    mp = asy.correct_plus(hist)
    band = asy.resolved_k(min(spec.grid.x_max, -spec.grid.x_min), rc.t_max)
    times = hist.times

    def rows():
        Zabs = np.abs(hist.f_tilde)
        for i, t in enumerate(times):
            for j, k in enumerate(hist.k_grid):
                yield (float(t), float(k), mp.W[i, j].real, mp.W[i, j].imag, float(Zabs[i, j]))

    m = _manifest(args, cfg, "asymptotics")
    m.add_output(write_csv(out / "profiles.csv", ["t", "k", "re_W", "im_W", "abs_Z"], rows()))
    cauchy = {}
    for t in times:
        if t > 0 and np.any(np.isclose(times, 2 * t)):
            cauchy[repr(float(t))] = mp.cauchy_difference(float(t), band)
    # fitted log-phase slope at the profile maximum, late half of the run
    n = hist.n_pos
    j = n + int(np.argmax(np.abs(hist.f_tilde[0, n:])))
    late = times >= max(times[-1] / 4, 1.0)
    ph = np.unwrap(np.angle(hist.f_tilde[late, j]))
    slope = float(np.polyfit(np.log(times[late]), ph, 1)[0]) if late.sum() >= 2 else float("nan")
    predicted = -asy.LOG_PHASE_COEF * float(np.mean(np.abs(hist.f_tilde[late, j]) ** 2))
    x = traj.x
    half = 0.5 * min(x[-1], -x[0])
    table = []
    for t in times[late]:
        sel = (np.abs(x) <= half) & (np.abs(x) <= 2 * t * hist.k_grid.max())
        pred = asy.physical_asymptotics(hist.f_tilde[hist.index(t)], hist.k_grid, t, x[sel])
        table.append({"t": float(t), "sup_residual": float(np.max(np.abs(traj.at(t).u[sel] - pred)))})
    summary = {"k_band": band, "cauchy_differences": cauchy, "k_star": float(hist.k_grid[j]),
               "log_phase_slope": slope, "log_phase_slope_predicted": predicted,
               "physical_residuals": table, "threshold_rule": "k <= |t|^-rho per snapshot"}
    m.add_output(write_json(out / "summary.json", summary))
    m.timing["seconds"] = time.perf_counter() - t0
    m.write(out)
    print(f"profiles for {len(times)} snapshots; log-phase slope {slope:.3e} "
          f"(predicted {predicted:.3e})")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify
    from .io import write_json
    cfg = _load_json(args.config) if args.config else {}
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        results = verify.run_all(args.filter, cfg)
    except KeyError as exc:
        raise CliError(str(exc)) from None
    for r in results:
        print(r.line(), flush=True)
    failed = [r for r in results if not r.passed]
    if args.out:
        out = _out_dir(args)
        m = _manifest(args, cfg, "verify")
        report = {"checks": [{"number": r.number, "name": r.name, "passed": r.passed,
                              "metrics": r.metrics, "error": r.error} for r in results],
                  "all_passed": not failed}
        m.add_output(write_json(out / "verify.json", report))
        m.timing = {r.name: r.seconds for r in results}
        m.verification_summary = {r.name: r.passed for r in results}
        m.write(out)
    if failed:
        print("failed: " + ", ".join(f"{r.number} {r.name}" for r in failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"scatter": cmd_scatter, "basis": cmd_basis, "evolve": cmd_evolve,
            "asymptotics": cmd_asymptotics, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlsv", description=__doc__.split("\n\n")[0].strip())
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=(name != "verify"), help="JSON config file")
        s.add_argument("--out", default=None if name == "verify" else f"{name}_out",
                       help="output directory")
        s.add_argument("--strict", action="store_true",
                       help="exit 2 when the potential violates the hypotheses")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--threads", type=int, default=None, help="BLAS/FFT thread cap")
        if name == "verify":
            s.add_argument("--filter", default=None,
                           help="comma-separated check numbers or name fragments")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads:
        # only effective if set before numpy loads its BLAS, i.e. when run as a script
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"nlsv {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, ValueError, FloatingPointError, RuntimeError) as exc:
        print(f"nlsv {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
