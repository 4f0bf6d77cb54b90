"""Snapshot and CSV serialization.

Snapshot format (``.mfkg``), little-endian throughout:

    bytes 0-4   magic  b"MFKG1"
    u32         format version (currently 1)
    u32         dim
    u32         points per axis
    f64         box length L
    f64         mass m
    f64         sample time t
    f64 pairs   psi, row-major, interleaved (re, im)
    f64 pairs   pi, same layout

Trajectory CSV columns: t, re_gamma, im_gamma, re_f, im_f, H, Q, then one
column per configured seminorm radius.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .fields import FieldState
from .grid import Grid

__all__ = [
    "MAGIC",
    "save_snapshot",
    "load_snapshot",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_columns_csv",
]

MAGIC = b"MFKG1"
_HEADER = struct.Struct("<IIIddd")


def save_snapshot(path, state: FieldState, m: float = 1.0) -> None:
    """Write one phase-space sample to ``path`` in the MFKG1 layout."""
    grid = state.grid
    payload = [
        MAGIC,
        _HEADER.pack(1, grid.dim, grid.points_per_axis, grid.box_length, m, state.time),
        np.ascontiguousarray(state.psi, dtype="<c16").tobytes(),
        np.ascontiguousarray(state.pi, dtype="<c16").tobytes(),
    ]
    Path(path).write_bytes(b"".join(payload))


def load_snapshot(path) -> tuple[FieldState, float]:
    """Read a snapshot; returns the state together with the stored mass."""
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not an MFKG1 snapshot (bad magic)")
    version, dim, n, box_length, m, t = _HEADER.unpack_from(raw, len(MAGIC))
    if version != 1:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    grid = Grid(dim, n, box_length)
    offset = len(MAGIC) + _HEADER.size
    count = grid.num_points
    expected = offset + 2 * count * 16
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated snapshot ({len(raw)} bytes, expected {expected})")
    flat = np.frombuffer(raw, dtype="<c16", count=2 * count, offset=offset)
    psi = flat[:count].reshape(grid.shape).astype(np.complex128)
    pi = flat[count:].reshape(grid.shape).astype(np.complex128)
    return FieldState(grid, psi, pi, t), m


def write_columns_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    """Write equal-length columns; floats serialized via repr for determinism."""
    rows = zip(*columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def write_trajectory_csv(path, traj) -> None:
    header = ["t", "re_gamma", "im_gamma", "re_f", "im_f", "H", "Q"]
    columns = [
        traj.times,
        traj.gamma.real,
        traj.gamma.imag,
        traj.force.real,
        traj.force.imag,
        traj.energy,
        traj.charge,
    ]
    for label, series in traj.seminorms.items():
        header.append(label)
        columns.append(series)
    write_columns_csv(path, header, columns)


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Read back a trajectory CSV as named columns (always includes t, gamma, f)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[] for _ in header]
        for row in reader:
            for i, v in enumerate(row):
                data[i].append(float(v))
    cols = {name: np.asarray(vals) for name, vals in zip(header, data)}
    required = {"t", "re_gamma", "im_gamma", "re_f", "im_f"}
    missing = required - cols.keys()
    if missing:
        raise ValueError(f"{path}: missing trajectory columns {sorted(missing)}")
    cols["gamma"] = cols["re_gamma"] + 1j * cols["im_gamma"]
    cols["f"] = cols["re_f"] + 1j * cols["im_f"]
    return cols
