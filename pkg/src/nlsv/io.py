"""
On-disk formats.

Binary fields: one JSON header line (utf-8, newline terminated) followed by
little-endian float64 pairs (re, im), row-major over the array shape given
in the header.  CSV and JSON writers format floats with repr so reruns are
byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

FORMAT_TAG = "nlsv-field/1"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(obj.real), _plain(obj.imag)]
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_field(path, values, header: dict | None = None) -> Path:
    a = np.ascontiguousarray(np.asarray(values, dtype=np.complex128))
    head = dict(header or {})
    head.update({"format": FORMAT_TAG, "shape": list(a.shape), "dtype": "complex128-le"})
    path = Path(path)
    with path.open("wb") as fh:
        fh.write((json.dumps(_plain(head), sort_keys=True) + "\n").encode())
        fh.write(a.view(np.float64).astype("<f8").tobytes())
    return path


def read_field(path) -> tuple[dict, np.ndarray]:
    with Path(path).open("rb") as fh:
        head = json.loads(fh.readline().decode())
        if head.get("format") != FORMAT_TAG:
            raise ValueError(f"{path}: not an {FORMAT_TAG} file")
        raw = np.frombuffer(fh.read(), dtype="<f8")
    shape = tuple(head["shape"])
    if raw.size != 2 * int(np.prod(shape)):
        raise ValueError(f"{path}: payload size does not match header shape {shape}")
    return head, raw.view(np.complex128).reshape(shape)


def write_csv(path, columns: list[str], rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def scattering_rows(sd):
    ud = sd.unitarity_defect
    for i, k in enumerate(sd.k_grid):
        yield (float(k), sd.T[i].real, sd.T[i].imag, sd.R_plus[i].real, sd.R_plus[i].imag,
               sd.R_minus[i].real, sd.R_minus[i].imag, float(ud[i]))


SCATTERING_COLUMNS = ["k", "re_T", "im_T", "re_R_plus", "im_R_plus", "re_R_minus", "im_R_minus",
                      "unitarity_defect"]


def file_hash(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(_plain(cfg), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    config_hash: str
    command: str
    input_paths: list = field(default_factory=list)
    output_paths: dict = field(default_factory=dict)     # name -> sha256
    timing: dict = field(default_factory=dict)
    verification_summary: dict = field(default_factory=dict)
    tool_version: str = __version__
    extra: dict = field(default_factory=dict)

    def add_output(self, path) -> None:
        self.output_paths[Path(path).name] = file_hash(path)

    def write(self, out_dir) -> Path:
        return write_json(Path(out_dir) / "manifest.json", asdict(self))


def check_manifest(out_dir) -> list[str]:
    """Names of listed outputs that are missing or whose hash changed."""
    out_dir = Path(out_dir)
    m = json.loads((out_dir / "manifest.json").read_text())
    bad = []
    for name, digest in m["output_paths"].items():
        p = out_dir / name
        if not p.exists() or file_hash(p) != digest:
            bad.append(name)
    return bad
