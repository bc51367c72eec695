"""
Input/Output handlers for oscilloflow.

This module reads and writes the artifacts of a run: binary checkpoints,
trace CSV files, JSON summaries, snapshot archives and the digests that tie
sweep rows to their configuration and initial data.
"""

import csv
import hashlib
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .dynamics import Health, SimulationState
from .errors import CheckpointError
from .norms import NormTrace
from .spectral import SpectralField, TorusGrid

logger = logging.getLogger(__name__)

MAGIC = b"OSCF1"
_KIND_CODES = {"NS": 0, "SQG": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
# Packed little-endian header; alpha is NaN for NS.
HEADER = np.dtype([
    ("magic", "S5"), ("kind", "u1"), ("dim", "u1"), ("components", "u1"), ("n", "<u4"),
    ("alpha", "<f8"), ("N", "<f8"), ("time", "<f8"), ("step_count", "<u8"),
])


def persist_checkpoint(state: SimulationState, path: str, equation_kind: str,
                       alpha: Optional[float] = None, n_multiplier: float = 0.0) -> None:
    """Write ``state`` as an OSCF1 checkpoint; coefficients are (real, imag) f64 pairs in row-major k order."""
    if equation_kind not in _KIND_CODES:
        raise CheckpointError(f"unknown equation kind {equation_kind!r}")
    if state.health is Health.DIVERGED:
        raise CheckpointError("refusing to checkpoint a diverged state")
    f = state.field
    header = np.zeros((), dtype=HEADER)
    header["magic"] = MAGIC
    header["kind"] = _KIND_CODES[equation_kind]
    header["dim"] = f.grid.dim
    header["components"] = f.components
    header["n"] = f.grid.n
    header["alpha"] = np.nan if alpha is None else alpha
    header["N"] = n_multiplier
    header["time"] = state.time
    header["step_count"] = state.step_count
    payload = np.ascontiguousarray(f.coefficients, dtype="<c16")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(payload.tobytes())
    logger.debug("checkpoint written to %s (t=%.6g, %d steps)", path, state.time, state.step_count)


class Checkpoint:
    """Loaded checkpoint: the state plus the header metadata."""

    def __init__(self, state: SimulationState, equation_kind: str, alpha: Optional[float], n_multiplier: float):
        self.state = state
        self.equation_kind = equation_kind
        self.alpha = alpha
        self.n_multiplier = n_multiplier


def load_checkpoint(path: str) -> Checkpoint:
    """Read an OSCF1 checkpoint; any malformation raises CheckpointError naming the byte offset."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) or raw[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: bad magic at byte offset 0 (expected {MAGIC!r})")
    if len(raw) < HEADER.itemsize:
        raise CheckpointError(f"{path}: truncated header at byte offset {len(raw)} "
                              f"(need {HEADER.itemsize} bytes)")
    header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    kind_code = int(header["kind"])
    if kind_code not in _KIND_NAMES:
        raise CheckpointError(f"{path}: unknown equation kind {kind_code} at byte offset 5")
    dim, components, n = int(header["dim"]), int(header["components"]), int(header["n"])
    try:
        grid = TorusGrid(dim, n)
    except ValueError as e:
        raise CheckpointError(f"{path}: invalid grid in header at byte offset 6: {e}")
    count = components * grid.size
    expected = HEADER.itemsize + 16 * count
    if len(raw) != expected:
        raise CheckpointError(f"{path}: payload ends at byte offset {len(raw)}, expected {expected}")
    coeffs = np.frombuffer(raw, dtype="<c16", count=count, offset=HEADER.itemsize)
    coeffs = coeffs.astype(np.complex128).reshape((components,) + grid.shape)
    kind = _KIND_NAMES[kind_code]
    field = SpectralField(grid, coeffs, divergence_free=kind == "NS")
    alpha = float(header["alpha"])
    state = SimulationState(float(header["time"]), field, int(header["step_count"]), Health.OK)
    return Checkpoint(state, kind, None if np.isnan(alpha) else alpha, float(header["N"]))


def trace_columns(trace: NormTrace) -> List[str]:
    # for NS the dissipation norm is H^1 itself, so the column appears once
    dissipation = ["h_alpha2", "h1"] if trace.equation_kind == "SQG" else ["h1"]
    return ["time", "l2"] + dissipation + ["h2", "h_top", "grad_linf", "xt_running", "energy_residual_running"]


def write_trace_csv(trace: NormTrace, path: str) -> None:
    names = trace_columns(trace)
    derived = {"time": trace.time_array(), "xt_running": trace.xt_running(),
               "energy_residual_running": trace.energy_residual_running()}
    columns = [derived[name] if name in derived else trace.column(name) for name in names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in zip(*columns):
            writer.writerow([repr(float(v)) for v in row])


def read_trace_csv(path: str) -> Dict[str, np.ndarray]:
    with open(path, "r", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        names = reader.fieldnames or []
    return {name: np.array([float(r[name]) for r in rows]) for name in names}


def write_rows_csv(rows: Sequence[Mapping[str, Any]], columns: Sequence[str], path_or_stream) -> None:
    def dump(fh):
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _to_py(row.get(k)) for k in columns})

    if isinstance(path_or_stream, str):
        with open(path_or_stream, "w", newline="") as fh:
            dump(fh)
    else:
        dump(path_or_stream)


def _to_py(obj):
    if isinstance(obj, dict):
        return {k: _to_py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_py(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Health):
        return obj.value
    return obj


def write_json(data: Any, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(_to_py(data), fh, indent=2)


def read_json(path: str) -> Any:
    with open(path, "r") as fh:
        return json.load(fh)


def save_snapshots(snapshots: Iterable[Tuple[float, SpectralField]], path: str,
                   equation_kind: str, alpha: Optional[float]) -> None:
    snaps = list(snapshots)
    if not snaps:
        raise CheckpointError("no snapshots to save")
    grid = snaps[0][1].grid
    np.savez_compressed(
        path,
        times=np.array([t for t, _ in snaps], dtype=float),
        coefficients=np.stack([f.coefficients for _, f in snaps]),
        equation_kind=np.array(equation_kind),
        alpha=np.array(np.nan if alpha is None else alpha),
        dim=np.array(grid.dim),
        n=np.array(grid.n),
    )


def load_snapshots(path: str) -> Tuple[List[Tuple[float, SpectralField]], str, Optional[float]]:
    """Snapshots as (time, field) pairs plus the equation kind and alpha."""
    with np.load(path) as data:
        grid = TorusGrid(int(data["dim"]), int(data["n"]))
        kind = str(data["equation_kind"])
        alpha = float(data["alpha"])
        snaps = [(float(t), SpectralField(grid, c, divergence_free=kind == "NS"))
                 for t, c in zip(data["times"], data["coefficients"])]
    return snaps, kind, None if np.isnan(alpha) else alpha


def canonical_json(value: Any) -> str:
    return json.dumps(_to_py(value), sort_keys=True, separators=(",", ":"))


def config_digest(config_doc: Mapping[str, Any]) -> str:
    return hashlib.sha256(canonical_json(config_doc).encode("utf-8")).hexdigest()


def field_digest(f: SpectralField) -> str:
    return hashlib.sha256(np.ascontiguousarray(f.coefficients, dtype="<c16").tobytes()).hexdigest()
