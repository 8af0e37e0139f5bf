import os

import numpy as np
import pytest

from raycam.tensorio import (
    TensorFormatError,
    read_mask,
    read_tensor,
    write_mask,
    write_tensor,
)


def test_roundtrip_shapes(tmp_path):
    rng = np.random.default_rng(0)
    for shape in [(5,), (3, 4), (2, 3, 4), (1, 1, 1, 7)]:
        arr = rng.normal(size=shape).astype(np.float32)
        path = tmp_path / "t.ryf"
        write_tensor(path, arr)
        back = read_tensor(path)
        assert back.shape == arr.shape
        assert np.array_equal(back, arr)


def test_header_layout(tmp_path):
    path = tmp_path / "t.ryf"
    write_tensor(path, np.zeros((2, 3), dtype=np.float32))
    raw = path.read_bytes()
    assert raw[:4] == b"RYF1"
    # rank 2, dims (2, 3), dtype 1, then 6 floats
    assert raw[4:8] == (2).to_bytes(4, "little")
    assert raw[8:16] == (2).to_bytes(4, "little") + (3).to_bytes(4, "little")
    assert raw[16:20] == (1).to_bytes(4, "little")
    assert len(raw) == 20 + 4 * 6


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.ryf"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(TensorFormatError):
        read_tensor(path)


def test_truncated(tmp_path):
    path = tmp_path / "t.ryf"
    write_tensor(path, np.ones((4, 4), dtype=np.float32))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(TensorFormatError):
        read_tensor(path)


def test_unsupported_dtype(tmp_path):
    path = tmp_path / "t.ryf"
    write_tensor(path, np.ones(2, dtype=np.float32))
    raw = bytearray(path.read_bytes())
    raw[12:16] = (9).to_bytes(4, "little")  # dtype code after rank+1 dim
    path.write_bytes(bytes(raw))
    with pytest.raises(TensorFormatError):
        read_tensor(path)


def test_mask_roundtrip(tmp_path):
    mask = np.array([[True, False], [False, True]])
    path = tmp_path / "m.ryf"
    write_mask(path, mask)
    assert np.array_equal(read_mask(path), mask)


def test_atomic_write_leaves_no_temp(tmp_path):
    path = tmp_path / "t.ryf"
    write_tensor(path, np.ones(3))
    leftovers = [f for f in os.listdir(tmp_path) if f != "t.ryf"]
    assert leftovers == []


def test_write_is_deterministic(tmp_path):
    arr = np.linspace(0, 1, 12).reshape(3, 4)
    a, b = tmp_path / "a.ryf", tmp_path / "b.ryf"
    write_tensor(a, arr)
    write_tensor(b, arr)
    assert a.read_bytes() == b.read_bytes()
