"""Binary on-disk format for tensors in any of the three layouts.

Layout (all integers little-endian):

* magic ``b"TLSH"``
* format tag, u8: 0 = dense, 1 = CP, 2 = TT
* order N, u8
* N mode sizes, u32 each
* dense payload: prod(d_n) float64 values, last index fastest
* CP payload: rank R (u32), scale (f64), then the N factor matrices; factor n
  stores element [i, r] at flat offset i*R + r
* TT payload: rank R (u32), scale (f64), then the N cores; core n of shape
  (r_left, d_n, r_right) stores element [a, i, b] at flat offset
  (a*d_n + i)*r_right + b

Floats round-trip bit-exactly: payload bytes are the IEEE-754 images of the
stored arrays.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .tensors import CpTensor, DenseTensor, Tensor, TtTensor, num_elements, validate_shape

__all__ = ["MAGIC", "read_tensor", "write_tensor", "FormatError"]

MAGIC = b"TLSH"

_TAG_DENSE = 0
_TAG_CP = 1
_TAG_TT = 2

_F8 = np.dtype("<f8")
_U4 = np.dtype("<u4")


class FormatError(ValueError):
    """The byte stream is not a valid tensor file."""


def _tt_core_shapes(shape: tuple[int, ...], rank: int) -> list[tuple[int, int, int]]:
    n = len(shape)
    if n == 1:
        return [(1, shape[0], 1)]
    bonds = [1] + [rank] * (n - 1) + [1]
    return [(bonds[i], shape[i], bonds[i + 1]) for i in range(n)]


def write_tensor(path: str | Path, t: Tensor) -> None:
    """Serialize a tensor to ``path`` in the TLSH binary layout."""
    shape = t.shape
    parts = [MAGIC]
    if isinstance(t, DenseTensor):
        tag = _TAG_DENSE
    elif isinstance(t, CpTensor):
        tag = _TAG_CP
    elif isinstance(t, TtTensor):
        tag = _TAG_TT
    else:
        raise TypeError(f"not a tensor: {t!r}")
    if len(shape) > 255:
        raise ValueError("order does not fit in the u8 header field")
    parts.append(struct.pack("<BB", tag, len(shape)))
    parts.append(np.asarray(shape, dtype=_U4).tobytes())
    if isinstance(t, DenseTensor):
        parts.append(np.ascontiguousarray(t.data).astype(_F8, copy=False).tobytes())
    elif isinstance(t, CpTensor):
        parts.append(struct.pack("<I", t.rank))
        parts.append(struct.pack("<d", t.scale))
        for m in t.factors:
            parts.append(np.ascontiguousarray(m).astype(_F8, copy=False).tobytes())
    else:
        parts.append(struct.pack("<I", t.rank))
        parts.append(struct.pack("<d", t.scale))
        for c in t.cores:
            parts.append(np.ascontiguousarray(c).astype(_F8, copy=False).tobytes())
    Path(path).write_bytes(b"".join(parts))


class _Cursor:
    def __init__(self, buf: bytes, path: str) -> None:
        self.buf = buf
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError(f"{self.path}: truncated tensor file")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def floats(self, count: int) -> np.ndarray:
        raw = self.take(count * 8)
        return np.frombuffer(raw, dtype=_F8).astype(np.float64, copy=False)

    def done(self) -> None:
        if self.pos != len(self.buf):
            raise FormatError(f"{self.path}: {len(self.buf) - self.pos} trailing bytes")


def read_tensor(path: str | Path) -> Tensor:
    """Deserialize a tensor file, restoring whichever format it was written in."""
    cur = _Cursor(Path(path).read_bytes(), str(path))
    if cur.take(4) != MAGIC:
        raise FormatError(f"{path}: bad magic (not a TLSH tensor file)")
    tag, order = struct.unpack("<BB", cur.take(2))
    if order < 1:
        raise FormatError(f"{path}: zero-order tensor header")
    shape = validate_shape(np.frombuffer(cur.take(4 * order), dtype=_U4).tolist())
    if tag == _TAG_DENSE:
        data = cur.floats(num_elements(shape)).reshape(shape)
        cur.done()
        return DenseTensor(data)
    if tag == _TAG_CP:
        (rank,) = struct.unpack("<I", cur.take(4))
        (scale,) = struct.unpack("<d", cur.take(8))
        if rank < 1:
            raise FormatError(f"{path}: zero CP rank")
        factors = [cur.floats(d * rank).reshape(d, rank) for d in shape]
        cur.done()
        return CpTensor(factors, scale)
    if tag == _TAG_TT:
        (rank,) = struct.unpack("<I", cur.take(4))
        (scale,) = struct.unpack("<d", cur.take(8))
        if rank < 1:
            raise FormatError(f"{path}: zero TT rank")
        cores = [
            cur.floats(a * d * b).reshape(a, d, b) for a, d, b in _tt_core_shapes(shape, rank)
        ]
        cur.done()
        return TtTensor(cores, scale)
    raise FormatError(f"{path}: unknown format tag {tag}")
