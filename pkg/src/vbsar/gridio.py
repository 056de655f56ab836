"""Binary grid serialization.

Layout, all little-endian:
  bytes 0..3   magic "VBG1"
  bytes 4..7   u32 number of rows
  bytes 8..11  u32 number of columns
  byte  12     dtype tag: 0 = real float64, 1 = complex128 stored as
               interleaved (real, imag) float64 pairs
  byte  13     layout tag: 0 = row-major
  bytes 14..45 32-byte configuration hash (sha256 of the config text)
  bytes 46..   payload, rows*cols float64 values (2x for complex)

The round trip is bit-exact: values are written as raw IEEE-754 doubles.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"VBG1"
DTYPE_REAL = 0
DTYPE_COMPLEX = 1
LAYOUT_ROW_MAJOR = 0
HASH_BYTES = 32
_HEADER = struct.Struct(f"<4sIIBB{HASH_BYTES}s")


class GridFormatError(ValueError):
    """Raised for bad magic, header fields, or truncated payloads."""


def write_grid(path, grid: np.ndarray, config_hash: bytes = b"") -> None:
    """Write a 2-D real or complex grid with the embedded config hash."""
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise GridFormatError(f"grid must be 2-D, got shape {grid.shape}")
    if len(config_hash) > HASH_BYTES:
        raise GridFormatError(f"config hash longer than {HASH_BYTES} bytes")
    padded = bytes(config_hash).ljust(HASH_BYTES, b"\0")
    if np.iscomplexobj(grid):
        tag = DTYPE_COMPLEX
        payload = np.ascontiguousarray(grid, dtype="<c16").tobytes()
    else:
        tag = DTYPE_REAL
        payload = np.ascontiguousarray(grid, dtype="<f8").tobytes()
    header = _HEADER.pack(MAGIC, grid.shape[0], grid.shape[1], tag,
                          LAYOUT_ROW_MAJOR, padded)
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(payload)


def read_grid(path):
    """Read a grid written by write_grid; returns (array, config_hash)."""
    with open(path, "rb") as handle:
        raw = handle.read()
    if len(raw) < _HEADER.size:
        raise GridFormatError("file shorter than the grid header")
    magic, rows, cols, tag, layout, chash = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise GridFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if layout != LAYOUT_ROW_MAJOR:
        raise GridFormatError(f"unsupported layout tag {layout}")
    if tag == DTYPE_REAL:
        dtype, per_value = np.dtype("<f8"), 8
    elif tag == DTYPE_COMPLEX:
        dtype, per_value = np.dtype("<c16"), 16
    else:
        raise GridFormatError(f"unsupported dtype tag {tag}")
    expected = rows * cols * per_value
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise GridFormatError(
            f"payload holds {len(payload)} bytes, expected {expected}")
    grid = np.frombuffer(payload, dtype=dtype).reshape(rows, cols).copy()
    return grid, chash
