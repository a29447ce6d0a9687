"""Binary container for synthesized snapshot matrices.

Layout (all little-endian):
  bytes 0..7   magic b"NFMDATA1"
  bytes 8..23  four uint32: M (rx antennas), N (tx antennas), L (snapshots),
               K (targets recorded in the sidecar; 0 if unknown)
  then X       N*L complex values, column-major, each as two float64 (re, im)
  then Y       M*L complex values, column-major, same encoding

A JSON sidecar at <path>.json optionally stores the generating config with
sorted keys, so identical configs produce byte-identical file pairs.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"NFMDATA1"
_HEADER = struct.Struct("<4I")


def write_datafile(path, x, y, n_targets=0, config=None) -> None:
    """Write X, Y, and dims to `path`; config (if given) to `path`.json."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise ValueError("X and Y must be matrices sharing the snapshot count")
    n, ell = x.shape
    m = y.shape[0]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(m, n, ell, int(n_targets)))
        fh.write(x.ravel(order="F").astype("<c16").tobytes())
        fh.write(y.ravel(order="F").astype("<c16").tobytes())
    if config is not None:
        with open(str(path) + ".json", "w", encoding="utf-8") as fh:
            json.dump(config, fh, sort_keys=True, indent=2)
            fh.write("\n")


def read_datafile(path):
    """Read back (X, Y, n_targets, config-or-None)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + _HEADER.size or raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a snapshot container (bad magic)")
    m, n, ell, k = _HEADER.unpack_from(raw, len(MAGIC))
    offset = len(MAGIC) + _HEADER.size
    n_x = n * ell
    n_y = m * ell
    expected = offset + 16 * (n_x + n_y)
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated container ({len(raw)} bytes, expected {expected})")
    flat = np.frombuffer(raw, dtype="<c16", count=n_x + n_y, offset=offset)
    x = flat[:n_x].reshape((n, ell), order="F").astype(np.complex128)
    y = flat[n_x:].reshape((m, ell), order="F").astype(np.complex128)
    config = None
    try:
        with open(str(path) + ".json", "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError):
        pass
    return x, y, k, config
