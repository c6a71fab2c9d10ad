import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvsc_sim.corefmt import (
    SymbolSequence,
    VideoTensor,
    bits_from_tokens,
    bits_to_text,
    check_unit_power,
    decode_gvt,
    decode_pnm,
    encode_gvt,
    encode_pnm,
    frame_slice,
    read_pnm,
    read_tensor,
    text_to_bits,
    write_pnm,
    write_tensor,
)
from gvsc_sim.errors import DomainError, FormatError, ShapeError


def rand_video(shape, seed=0):
    return VideoTensor(np.random.default_rng(seed).random(shape))


class TestVideoTensor:
    def test_shape_properties(self):
        v = rand_video((2, 4, 5, 3))
        assert (v.frames, v.height, v.width, v.channels) == (2, 4, 5, 3)
        assert v.data.dtype == np.float32

    def test_read_only(self):
        v = rand_video((1, 2, 2, 1))
        with pytest.raises(ValueError):
            v.data[0, 0, 0, 0] = 0.5

    @pytest.mark.parametrize("shape", [(1, 2, 2, 2), (0, 2, 2, 3), (2, 2, 3)])
    def test_bad_shapes(self, shape):
        with pytest.raises((ShapeError, DomainError)):
            VideoTensor(np.zeros(shape))

    def test_out_of_range_values(self):
        with pytest.raises(DomainError):
            VideoTensor(np.full((1, 2, 2, 1), 1.5))


class TestFrameSlice:
    def test_first_frame(self):
        v = rand_video((8, 4, 4, 3))
        assert np.array_equal(frame_slice(v, 1).data, v.data[0:1])

    def test_out_of_range(self):
        v = rand_video((8, 4, 4, 3))
        with pytest.raises(IndexError):
            frame_slice(v, 9)
        with pytest.raises(IndexError):
            frame_slice(v, 0)

    def test_single_frame_identity(self):
        v = rand_video((1, 3, 3, 1))
        assert frame_slice(v, 1) == v

    def test_every_frame_matches_manual_slice(self):
        v = rand_video((5, 3, 2, 3), seed=3)
        for f in range(1, 6):
            assert np.array_equal(frame_slice(v, f).data[0], v.data[f - 1])


class TestGvt:
    def test_roundtrip(self, tmp_path):
        v = rand_video((2, 4, 4, 3))
        write_tensor(v, tmp_path / "a.gvt")
        assert read_tensor(tmp_path / "a.gvt") == v

    def test_zero_tensor_full_size(self, tmp_path):
        v = VideoTensor(np.zeros((8, 256, 256, 3)))
        write_tensor(v, tmp_path / "z.gvt")
        back = read_tensor(tmp_path / "z.gvt")
        assert back.shape == (8, 256, 256, 3) and not back.data.any()

    def test_layout_is_documented_bytes(self):
        arr = np.arange(6, dtype=np.float32).reshape(1, 1, 2, 3) / 10
        blob = encode_gvt(arr)
        assert blob[:4] == b"GVT1"
        assert struct.unpack("<4I", blob[4:20]) == (1, 1, 2, 3)
        assert np.array_equal(np.frombuffer(blob[20:], "<f4"), arr.ravel())

    def test_bad_magic(self):
        blob = b"XXXX" + encode_gvt(np.zeros((1, 1, 1, 1)))[4:]
        with pytest.raises(FormatError, match="offset 0"):
            decode_gvt(blob)

    def test_truncated(self):
        blob = encode_gvt(np.zeros((1, 2, 2, 1)))
        with pytest.raises(FormatError, match="truncated"):
            decode_gvt(blob[:-1])

    def test_trailing_bytes(self):
        with pytest.raises(FormatError, match="trailing"):
            decode_gvt(encode_gvt(np.zeros((1, 1, 1, 1))) + b"\0")

    def test_dimension_overflow(self):
        blob = b"GVT1" + struct.pack("<4I", 65536, 65536, 65536, 3)
        with pytest.raises(FormatError, match="offset 4"):
            decode_gvt(blob)

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(1, 8), st.integers(1, 64), st.integers(1, 64), st.sampled_from([1, 3]), st.integers(0, 2**32 - 1)
    )
    def test_roundtrip_property(self, f, h, w, c, seed):
        v = rand_video((f, h, w, c), seed)
        assert VideoTensor(decode_gvt(encode_gvt(v.data))) == v


class TestPnm:
    def test_ppm_roundtrip_is_byte_exact(self, tmp_path):
        raster = np.random.default_rng(1).integers(0, 256, size=(5, 7, 3)).astype(np.uint8)
        frame = VideoTensor(raster[None] / 255.0)
        write_pnm(frame, tmp_path / "f.ppm")
        assert np.array_equal(np.rint(read_pnm(tmp_path / "f.ppm").data[0] * 255), raster)

    def test_pgm_with_comment(self):
        blob = b"P5\n# made by hand\n2 1\n255\n\x00\xff"
        assert np.array_equal(decode_pnm(blob)[..., 0], [[0.0, 1.0]])

    def test_encode_pgm_header(self):
        assert encode_pnm(np.zeros((1, 2, 1))).startswith(b"P5\n2 1\n255\n")

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            decode_pnm(b"P3\n1 1\n255\n0 0 0")

    def test_truncated_raster(self):
        with pytest.raises(FormatError, match="truncated"):
            decode_pnm(b"P6\n2 2\n255\n\x00\x00")


class TestBits:
    def test_tokens_average(self):
        assert bits_from_tokens(95.63) == pytest.approx(765.04, abs=1e-9)

    def test_tokens_zero_and_integer(self):
        assert bits_from_tokens(0) == 0
        assert bits_from_tokens(100, 8) == 800

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            bits_from_tokens(-1)
        with pytest.raises(DomainError):
            bits_from_tokens(1, 0)

    @given(st.text(max_size=50))
    def test_text_roundtrip(self, text):
        assert bits_to_text(text_to_bits(text)) == text

    def test_msb_first(self):
        assert text_to_bits("A").tolist() == [0, 1, 0, 0, 0, 0, 0, 1]


class TestSymbolSequence:
    def test_count_and_power(self):
        s = SymbolSequence(np.array([1 + 1j, 1 - 1j]) / np.sqrt(2))
        assert s.count == 2
        assert s.mean_power() == pytest.approx(1.0)

    def test_empty_sequence(self):
        s = SymbolSequence(np.zeros(0, dtype=complex))
        assert s.count == 0

    def test_unit_power_hook(self):
        check_unit_power(np.ones(4, dtype=complex))
        check_unit_power(np.zeros(0, dtype=complex))
        with pytest.raises(AssertionError):
            check_unit_power(np.full(4, 2.0 + 0j))

    def test_with_symbols_keeps_side_information(self):
        s = SymbolSequence(np.ones(3, dtype=complex), gain=2.5)
        t = s.with_symbols(np.zeros(3, dtype=complex))
        assert t.gain == 2.5 and t.count == 3
