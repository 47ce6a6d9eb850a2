"""Binary field checkpoints.

Layout: b"STRP1", nx (int64 LE), ny (int64 LE), lx (float64 LE), then nx*ny
complex coefficients as (real, imag) float64 LE pairs, k-index major.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .grid import Grid, SpectralField

MAGIC = b"STRP1"
_HEADER = struct.Struct("<5sqqd")


def write_checkpoint(path, field: SpectralField) -> None:
    g = field.grid
    data = np.ascontiguousarray(field.coeffs, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.nx, g.ny, float(g.lx)))
        fh.write(data.tobytes(order="C"))


def read_checkpoint(path) -> SpectralField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated checkpoint header")
    magic, nx, ny, lx = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size:]
    if len(body) != 16 * nx * ny:
        raise ValidationError(f"{path}: expected {nx * ny} coefficients, got {len(body) // 16}")
    coeffs = np.frombuffer(body, dtype="<c16").reshape(nx, ny)
    return SpectralField(Grid(int(nx), int(ny), float(lx)), coeffs)
