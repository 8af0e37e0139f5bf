"""Binary tensor file format shared by all tools ("RYF1").

Layout: 4 ASCII magic bytes "RYF1", little-endian u32 rank, u32 dims[rank],
u32 dtype code (1 = float32), then the row-major payload. Boolean masks are
stored as dtype 1 with values {0.0, 1.0}.
"""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"RYF1"
DTYPE_F32 = 1


class TensorFormatError(ValueError):
    """Raised when a file does not follow the RYF1 layout."""


def write_tensor(path: str | os.PathLike, array: np.ndarray) -> None:
    """Write ``array`` as float32 in RYF1 layout, atomically."""
    arr = np.ascontiguousarray(array, dtype=np.float32)
    tmp = f"{os.fspath(path)}.tmp{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(struct.pack("<I", DTYPE_F32))
        fh.write(arr.tobytes())
    os.replace(tmp, path)


def read_tensor(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise TensorFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        (rank,) = struct.unpack("<I", fh.read(4))
        dims = struct.unpack(f"<{rank}I", fh.read(4 * rank))
        (dtype,) = struct.unpack("<I", fh.read(4))
        if dtype != DTYPE_F32:
            raise TensorFormatError(f"unsupported dtype code {dtype}")
        count = int(np.prod(dims)) if rank else 1
        payload = fh.read(4 * count)
        if len(payload) != 4 * count:
            raise TensorFormatError("truncated payload")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def write_mask(path: str | os.PathLike, mask: np.ndarray) -> None:
    write_tensor(path, mask.astype(np.float32))


def read_mask(path: str | os.PathLike) -> np.ndarray:
    return read_tensor(path) > 0.5
