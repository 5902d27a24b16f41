"""Binary snapshot files: magic "GBZK", fixed little-endian layout.

Header: magic (4 bytes), version u32, nx u32, ny u32, then lx, ly, a, t as
IEEE-754 binary64; payload is the ny*nx sample array, row-major (y outer).
Write-then-read is the identity, bit for bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import GridSpec, RealField2D

__all__ = ["SnapshotFile", "SnapshotFormatError", "write_snapshot", "read_snapshot"]

MAGIC = b"GBZK"
VERSION = 1
_HEADER = struct.Struct("<4sIII4d")  # magic, version, nx, ny, lx, ly, a, t


class SnapshotFormatError(ValueError):
    pass


@dataclass
class SnapshotFile:
    field: RealField2D
    a: float
    t: float


def write_snapshot(path: str | Path, snap: SnapshotFile) -> None:
    g = snap.field.grid
    header = _HEADER.pack(MAGIC, VERSION, g.nx, g.ny, g.lx, g.ly, snap.a, snap.t)
    payload = np.ascontiguousarray(snap.field.samples, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path: str | Path) -> SnapshotFile:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header")
    magic, version, nx, ny, lx, ly, a, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + nx * ny * 8
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: truncated payload ({len(raw)} bytes, expected {expected})"
        )
    samples = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(ny, nx)
    grid = GridSpec(nx=nx, ny=ny, lx=lx, ly=ly)
    return SnapshotFile(RealField2D(grid, samples.copy()), a=a, t=t)
