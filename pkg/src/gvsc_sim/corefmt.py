"""Data model for videos, bits and symbols, plus bit-exact fixture I/O.

Pixel data lives in ``[0, 1]`` as float32; 8-bit image files map by ``v / 255``.
Frame indices in the public API are 1-based, matching ``x_f`` for ``1 <= f <= F``.

GVT container layout (all little-endian)::

    offset 0   b"GVT1"
    offset 4   F, H, W, C   (uint32 each)
    offset 20  F*H*W*C float32 values, row-major, frame-major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError, ShapeError

GVT_MAGIC = b"GVT1"
_GVT_HEADER = struct.Struct("<4sIIII")
# Anything above this is treated as a corrupt header rather than a real fixture.
MAX_GVT_ELEMENTS = 1 << 31

UNIT_POWER_TOL = 1e-6


@dataclass(frozen=True)
class VideoTensor:
    """Immutable ``F x H x W x C`` frame stack with values in ``[0, 1]``.

    ``C`` is 3 for RGB video and 1 for sketch stacks.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32, copy=True)
        if arr.ndim != 4:
            raise ShapeError(f"expected F x H x W x C array, got shape {arr.shape}")
        f, h, w, c = arr.shape
        if f < 1 or h < 1 or w < 1:
            raise ShapeError(f"all dimensions must be >= 1, got {arr.shape}")
        if c not in (1, 3):
            raise ShapeError(f"channel count must be 1 or 3, got {c}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("pixel values must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, VideoTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.shape, self.data.tobytes()))


def frame_slice(video: VideoTensor, f: int) -> VideoTensor:
    """Return frame ``f`` (1-based) as a single-frame tensor."""
    if not 1 <= f <= video.frames:
        raise IndexError(f"frame index {f} outside 1..{video.frames}")
    return VideoTensor(video.data[f - 1 : f])


@dataclass(frozen=True)
class SymbolSequence:
    """Complex baseband symbols plus the side information of power normalization.

    ``gain`` is the factor the encoder multiplied by to reach unit power; the
    receiver divides it back out. ``zero_power`` marks an all-zero payload that
    was passed through unnormalized.
    """

    symbols: np.ndarray
    gain: float = 1.0
    zero_power: bool = False

    def __post_init__(self):
        arr = np.array(self.symbols, dtype=np.complex128, copy=True).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "symbols", arr)

    @property
    def count(self) -> int:
        return self.symbols.size

    def mean_power(self) -> float:
        if self.count == 0:
            return 0.0
        return float(np.mean(np.abs(self.symbols) ** 2))

    def with_symbols(self, symbols: np.ndarray) -> SymbolSequence:
        """Same side information, new symbol values (e.g. after the channel)."""
        return SymbolSequence(symbols, gain=self.gain, zero_power=self.zero_power)


def check_unit_power(symbols: np.ndarray, tol: float = UNIT_POWER_TOL) -> None:
    """Assert hook for encoder outputs: mean ``|x|^2`` must be 1 within ``tol``."""
    symbols = np.asarray(symbols)
    if symbols.size == 0:
        return
    power = float(np.mean(np.abs(symbols) ** 2))
    if abs(power - 1.0) > tol:
        raise AssertionError(f"encoder emitted mean power {power!r}, expected 1")


def bits_from_tokens(n_tokens: float, bits_per_token: int = 8) -> float:
    """Payload size in bits. Fractional token averages are allowed."""
    if n_tokens < 0:
        raise DomainError("n_tokens must be >= 0")
    if bits_per_token < 1:
        raise DomainError("bits_per_token must be >= 1")
    return n_tokens * bits_per_token


def text_to_bits(text: str) -> np.ndarray:
    """UTF-8 bytes of ``text`` as an MSB-first uint8 bit array."""
    raw = np.frombuffer(text.encode("utf-8"), dtype=np.uint8)
    return np.unpackbits(raw)


def bits_to_text(bits: np.ndarray) -> str:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise ShapeError("bit count must be a multiple of 8")
    return np.packbits(bits).tobytes().decode("utf-8", errors="replace")


def as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise DomainError("bit sequences may only contain 0 and 1")
    return arr.astype(np.uint8).reshape(-1)


# --- GVT container -----------------------------------------------------------


def encode_gvt(array: np.ndarray) -> bytes:
    arr = np.asarray(array, dtype="<f4")
    if arr.ndim != 4:
        raise ShapeError(f"GVT holds 4-D arrays, got shape {arr.shape}")
    return _GVT_HEADER.pack(GVT_MAGIC, *arr.shape) + np.ascontiguousarray(arr).tobytes()


def decode_gvt(blob: bytes) -> np.ndarray:
    """Parse a GVT container into a float32 array of shape (F, H, W, C)."""
    if len(blob) < 4 or blob[:4] != GVT_MAGIC:
        raise FormatError(f"bad magic {bytes(blob[:4])!r}, expected {GVT_MAGIC!r}", offset=0)
    if len(blob) < _GVT_HEADER.size:
        raise FormatError("truncated header", offset=len(blob))
    _, f, h, w, c = _GVT_HEADER.unpack_from(blob, 0)
    count = f * h * w * c
    if count > MAX_GVT_ELEMENTS:
        raise FormatError(f"dimensions {f}x{h}x{w}x{c} overflow the element limit", offset=4)
    expected = _GVT_HEADER.size + 4 * count
    if len(blob) < expected:
        raise FormatError(
            f"truncated payload: need {expected} bytes, file has {len(blob)}", offset=len(blob)
        )
    if len(blob) > expected:
        raise FormatError("trailing bytes after payload", offset=expected)
    data = np.frombuffer(blob, dtype="<f4", count=count, offset=_GVT_HEADER.size)
    return data.reshape(f, h, w, c).astype(np.float32)


def write_gvt(array: np.ndarray, path) -> None:
    Path(path).write_bytes(encode_gvt(array))


def read_gvt(path) -> np.ndarray:
    return decode_gvt(Path(path).read_bytes())


def write_tensor(video: VideoTensor, path) -> None:
    write_gvt(video.data, path)


def read_tensor(path) -> VideoTensor:
    return VideoTensor(read_gvt(path))


# --- PPM / PGM ---------------------------------------------------------------


def _read_header_tokens(blob: bytes, n: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < n:
        if pos >= len(blob):
            raise FormatError("truncated header", offset=pos)
        ch = blob[pos : pos + 1]
        if ch == b"#":
            while pos < len(blob) and blob[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(blob) and not blob[pos : pos + 1].isspace() and blob[pos : pos + 1] != b"#":
                pos += 1
            tokens.append(blob[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(blob) or not blob[pos : pos + 1].isspace():
        raise FormatError("missing whitespace after header", offset=pos)
    return tokens, pos + 1


def decode_pnm(blob: bytes) -> np.ndarray:
    """Decode binary P5/P6 (maxval 255) into an ``H x W x C`` array in [0, 1]."""
    magic = blob[:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"unsupported magic {bytes(magic)!r}", offset=0)
    tokens, start = _read_header_tokens(blob, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise FormatError(f"non-numeric header field: {exc}", offset=2) from None
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxval}", offset=2)
    channels = 3 if magic == b"P6" else 1
    count = width * height * channels
    if len(blob) - start < count:
        raise FormatError("truncated raster", offset=len(blob))
    raster = np.frombuffer(blob, dtype=np.uint8, count=count, offset=start)
    return raster.reshape(height, width, channels).astype(np.float32) / 255.0


def encode_pnm(image: np.ndarray) -> bytes:
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[:, :, None]
    h, w, c = image.shape
    if c not in (1, 3):
        raise ShapeError(f"PNM images need 1 or 3 channels, got {c}")
    magic = b"P6" if c == 3 else b"P5"
    raster = np.clip(np.rint(np.asarray(image, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + raster.tobytes()


def read_pnm(path) -> VideoTensor:
    return VideoTensor(decode_pnm(Path(path).read_bytes())[None])


def write_pnm(frame: VideoTensor, path) -> None:
    if frame.frames != 1:
        raise ShapeError("PPM/PGM files hold a single frame")
    Path(path).write_bytes(encode_pnm(frame.data[0]))
