"""File formats: decimal CSV and a headered binary layout for matrices, plus bundles.

Matrix CSV is row-major with 17-significant-digit decimals, which round-trips
float64 exactly.  The binary layout is magic "HINV", little-endian u32 rows,
u32 cols, then the row-major f64 payload.  Sample paths are CSV (one row per
time index, dim columns) with a JSON sidecar carrying provenance.  JSON output
is key-sorted with a trailing newline so artifacts are byte-stable.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .simulate import SamplePath
from .spaces import BasisSpace

MAGIC = b"HINV"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix_csv(path, mat: np.ndarray) -> None:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={mat.ndim}")
    lines = [",".join(format_float(v) for v in row) for row in mat]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"no data in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged rows in {path}")
    return np.array(rows, dtype=float)


def write_matrix_binary(path, mat: np.ndarray) -> None:
    mat = np.ascontiguousarray(mat, dtype="<f8")
    if mat.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={mat.ndim}")
    rows, cols = mat.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", rows, cols))
        fh.write(mat.tobytes())


def read_matrix_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path} does not carry the expected magic bytes")
    rows, cols = struct.unpack("<II", raw[4:12])
    payload = np.frombuffer(raw[12:], dtype="<f8")
    if payload.size != rows * cols:
        raise ValueError(
            f"{path} payload has {payload.size} values, header says {rows}x{cols}"
        )
    return payload.reshape(rows, cols).astype(float)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# --- sample paths --------------------------------------------------------------


def _sidecar(path) -> Path:
    return Path(str(path) + ".meta.json")


def write_sample_csv(path, sample: SamplePath) -> None:
    """One row per time index, dim columns; provenance in `<path>.meta.json`."""
    write_matrix_csv(path, sample.data)
    meta = dict(sample.provenance)
    meta.update({"dim": sample.space.dim, "basis_id": sample.space.basis_id, "N": sample.N})
    write_json(_sidecar(path), meta)


def read_sample_csv(path, space: BasisSpace | None = None) -> SamplePath:
    data = read_matrix_csv(path)
    meta = {}
    side = _sidecar(path)
    if side.exists():
        meta = read_json(side)
    if space is None:
        space = BasisSpace(data.shape[1], meta.get("basis_id", "fourier"))
    return SamplePath(space, data, meta)


# --- estimate bundles ----------------------------------------------------------


def _write_operator(outdir: Path, name: str, mat: np.ndarray) -> None:
    write_matrix_csv(outdir / f"{name}.csv", mat)
    write_matrix_binary(outdir / f"{name}.bin", mat)


def save_psi_estimate(outdir, est) -> None:
    """Write Psi, its components, and a JSON diagnostics file into a directory."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_operator(outdir, "Psi_L", est.Psi_L.mat)
    for j, mat in enumerate(est.psi_mats(), start=1):
        _write_operator(outdir, f"psi_{j}", mat)
    t = est.tuning
    write_json(
        outdir / "diagnostics.json",
        {
            "tuning": {"L": t.L, "K": t.K, "theta": t.theta, "schedule_id": t.schedule_id},
            "diagnostics": _plain(est.diagnostics),
            "eigenvalues": [float(v) for v in est.eigen.values],
        },
    )


def save_arma_fit(outdir, fit, tuning_extra: dict | None = None) -> None:
    """Write fitted AR/MA operators and diagnostics into a directory."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for i, op in enumerate(fit.alpha, start=1):
        _write_operator(outdir, f"alpha_{i}", op.mat)
    for j, op in enumerate(fit.beta, start=1):
        _write_operator(outdir, f"beta_{j}", op.mat)
    if fit.pi_hat is not None:
        _write_operator(outdir, "pi_hat", fit.pi_hat.mat)
    meta = {"p": fit.p, "q": fit.q, "diagnostics": _plain(fit.diagnostics)}
    if fit.psi_source is not None:
        t = fit.psi_source.tuning
        meta["tuning"] = {"L": t.L, "K": t.K, "theta": t.theta, "schedule_id": t.schedule_id}
    if tuning_extra:
        meta.setdefault("tuning", {}).update(_plain(tuning_extra))
    write_json(outdir / "diagnostics.json", meta)


def save_cov_estimate(outdir, ce) -> None:
    """Write the stacked covariance, cross-covariance, and metadata."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_matrix_binary(outdir / "C_stacked.bin", ce.C_stacked.mat)
    write_matrix_binary(outdir / "D_cross.bin", ce.D_cross.mat)
    write_json(
        outdir / "metadata.json",
        {
            "L": ce.L,
            "N": ce.N,
            "centered": ce.centered,
            "eigenvalues": [float(v) for v in ce.eigen.values],
        },
    )


def _plain(obj):
    """Coerce numpy scalars/bools to plain JSON-serializable Python values."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj
