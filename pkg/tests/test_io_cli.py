import json
from pathlib import Path

import numpy as np
import pytest

from nlsv import cli, io

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_field_roundtrip(tmp_path):
    a = np.arange(12).reshape(3, 4) * (1 + 0.5j)
    p = io.write_field(tmp_path / "f.bin", a, {"note": "x", "t": np.float64(1.5)})
    head, b = io.read_field(p)
    assert head["shape"] == [3, 4] and head["t"] == 1.5
    np.testing.assert_array_equal(a, b)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError, match="payload"):
        io.read_field(p)
    (tmp_path / "g.bin").write_bytes(b'{"format": "other"}\n')
    with pytest.raises(ValueError):
        io.read_field(tmp_path / "g.bin")


def test_json_plain(tmp_path):
    p = io.write_json(tmp_path / "a.json", {"z": 1 + 2j, "n": np.int64(3), "inf": float("inf"),
                                            "arr": np.array([0.5]), "b": np.bool_(True)})
    assert json.loads(p.read_text()) == {"arr": [0.5], "b": True, "inf": "inf", "n": 3, "z": [1.0, 2.0]}
    assert io.config_hash({"a": 1, "b": 2}) == io.config_hash({"b": 2, "a": 1})


def test_manifest_detects_tampering(tmp_path):
    m = io.RunManifest("h", "test")
    m.add_output(io.write_csv(tmp_path / "a.csv", ["x"], [(1.0,), (0.1,)]))
    m.write(tmp_path)
    assert io.check_manifest(tmp_path) == []
    (tmp_path / "a.csv").write_text("x\n2\n")
    assert io.check_manifest(tmp_path) == ["a.csv"]


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_scatter_deterministic(tmp_path, capsys):
    cfg = CONFIGS / "gaussian_barrier.json"
    assert run("scatter", "--config", cfg, "--out", tmp_path / "a") == 0
    assert run("scatter", "--config", cfg, "--out", tmp_path / "b") == 0
    for name in ("scattering.csv", "hypothesis.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert io.check_manifest(tmp_path / "a") == []
    head = (tmp_path / "a" / "scattering.csv").read_text().splitlines()[0]
    assert head.split(",") == io.SCATTERING_COLUMNS


def test_scatter_flat(tmp_path):
    assert run("scatter", "--config", CONFIGS / "flat.json", "--out", tmp_path) == 0
    rows = (tmp_path / "scattering.csv").read_text().splitlines()[1:]
    for r in rows:
        v = [float(c) for c in r.split(",")]
        assert abs(v[1] - 1) < 1e-14 and max(map(abs, v[2:7])) < 1e-14


def test_exit_codes(tmp_path, capsys):
    assert run("scatter", "--config", tmp_path / "missing.json", "--out", tmp_path) == 1
    assert "missing.json" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("scatter", "--config", bad, "--out", tmp_path) == 1
    bad.write_text(json.dumps({"family": "nonsense", "params": {}}))
    assert run("scatter", "--config", bad, "--out", tmp_path) == 1
    sq = CONFIGS / "square_barrier.json"
    assert run("scatter", "--config", sq, "--out", tmp_path / "s") == 0
    assert run("scatter", "--config", sq, "--out", tmp_path / "s", "--strict") == 2
    assert run("verify", "--filter", "flat,square", "--out", tmp_path / "v") == 0
    assert json.loads((tmp_path / "v" / "verify.json").read_text())["all_passed"]
    assert run("verify", "--filter", "nosuchcheck") == 1
    assert run("verify", "--filter", "conservation", "--config", CONFIGS / "verify_bad_dt.json") == 3
    with pytest.raises(SystemExit):
        cli.main(["evolve"])


def test_basis_output(tmp_path):
    assert run("basis", "--config", CONFIGS / "square_barrier.json", "--out", tmp_path) == 0
    head, psi = io.read_field(tmp_path / "basis.bin")
    assert psi.shape == (len(head["k"]), head["n_x"])
    assert head["scattering_sha256"] == io.file_hash(tmp_path / "scattering.csv")


def test_evolve_and_asymptotics(tmp_path):
    cfg = CONFIGS / "run_small.json"
    assert run("evolve", "--config", cfg, "--out", tmp_path / "e") == 0
    head, U = io.read_field(tmp_path / "e" / "snapshots.bin")
    assert head["times"] == [0, 1.25, 2.5, 5, 10, 20] and U.shape == (6, 2048)
    cons = np.loadtxt(tmp_path / "e" / "conserved.csv", delimiter=",", skiprows=1)
    assert np.ptp(cons[:, 1]) < 1e-12 * cons[0, 1]
    assert run("asymptotics", "--config", cfg, "--out", tmp_path / "a") == 0
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["log_phase_slope"] < 0
    assert summary["log_phase_slope"] == pytest.approx(summary["log_phase_slope_predicted"], rel=0.5)
    assert io.check_manifest(tmp_path / "a") == []
