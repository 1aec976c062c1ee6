"""Binary tensor file round-trip and corruption handling."""

import struct

import numpy as np
import pytest

from tensorlsh import CpTensor, DenseTensor, TtTensor, read_tensor, write_tensor
from tensorlsh.tensorio import MAGIC, FormatError


def _roundtrip(tmp_path, t, name="t.tlsh"):
    path = tmp_path / name
    write_tensor(path, t)
    return path, read_tensor(path)


class TestRoundTrip:
    def test_dense_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        values = rng.standard_normal((3, 4, 2))
        values[0, 0, 0] = -0.0  # sign of zero must survive
        values[1, 2, 1] = 5e-324  # smallest subnormal
        t = DenseTensor(values)
        _, back = _roundtrip(tmp_path, t)
        assert isinstance(back, DenseTensor)
        assert back.shape == t.shape
        assert np.array_equal(
            back.data.view(np.uint64), t.data.view(np.uint64)
        ), "payload must round-trip bit-for-bit"

    def test_cp_bit_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        t = CpTensor([rng.standard_normal((d, 3)) for d in (2, 5, 4)], scale=1 / 7)
        _, back = _roundtrip(tmp_path, t)
        assert isinstance(back, CpTensor)
        assert back.rank == 3 and back.scale == t.scale
        for a, b in zip(back.factors, t.factors):
            assert np.array_equal(a.view(np.uint64), b.view(np.uint64))

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_tt_bit_exact(self, tmp_path, order):
        rng = np.random.default_rng(3 + order)
        shape = tuple(rng.integers(2, 5, size=order))
        rank = 3
        if order == 1:
            cores = [rng.standard_normal((1, shape[0], 1))]
        else:
            bonds = [1] + [rank] * (order - 1) + [1]
            cores = [
                rng.standard_normal((bonds[i], shape[i], bonds[i + 1])) for i in range(order)
            ]
        t = TtTensor(cores, scale=0.125)
        _, back = _roundtrip(tmp_path, t)
        assert isinstance(back, TtTensor)
        assert back.shape == t.shape and back.scale == t.scale
        for a, b in zip(back.cores, t.cores):
            assert np.array_equal(a.view(np.uint64), b.view(np.uint64))

    def test_rewrite_is_byte_identical(self, tmp_path):
        rng = np.random.default_rng(9)
        t = CpTensor([rng.standard_normal((4, 2)) for _ in range(3)])
        p1, back = _roundtrip(tmp_path, t, "a.tlsh")
        p2 = tmp_path / "b.tlsh"
        write_tensor(p2, back)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_layout(self, tmp_path):
        t = DenseTensor(np.zeros((2, 3)))
        path, _ = _roundtrip(tmp_path, t)
        raw = path.read_bytes()
        assert raw[:4] == MAGIC
        tag, order = struct.unpack("<BB", raw[4:6])
        assert (tag, order) == (0, 2)
        assert struct.unpack("<II", raw[6:14]) == (2, 3)
        assert len(raw) == 14 + 6 * 8


class TestCorruption:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.tlsh"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(FormatError):
            read_tensor(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "t.tlsh"
        write_tensor(path, DenseTensor(np.ones((2, 2))))
        raw = path.read_bytes()
        path.write_bytes(raw[:-5])
        with pytest.raises(FormatError):
            read_tensor(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "t.tlsh"
        write_tensor(path, DenseTensor(np.ones((2, 2))))
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FormatError):
            read_tensor(path)

    def test_unknown_tag(self, tmp_path):
        path = tmp_path / "t.tlsh"
        write_tensor(path, DenseTensor(np.ones((2, 2))))
        raw = bytearray(path.read_bytes())
        raw[4] = 9
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError):
            read_tensor(path)

    def test_non_finite_payload_rejected(self, tmp_path):
        path = tmp_path / "t.tlsh"
        write_tensor(path, DenseTensor(np.ones((2,))))
        raw = bytearray(path.read_bytes())
        raw[-8:] = struct.pack("<d", float("nan"))
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError):
            read_tensor(path)
