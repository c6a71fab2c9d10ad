"""Analog joint source-channel mapping for visual payloads.

The learned attention DJSCC is not part of this package. Its place is taken by
an :class:`AnalogMapperSpec` contract with two implementations:

* ``linear``: a fixed orthonormal 2-D DCT basis. Coefficients are ordered by
  ``(u + v, u, channel)``, the lowest ``2 * symbol_budget`` are kept, and
  consecutive pairs become one complex symbol. Noiseless decode is the
  orthogonal projection onto the retained basis.
* ``external``: an out-of-process model driven through GVT files (see
  :class:`ExternalMapper`).

Every encoder output is power-normalized; the applied gain travels with the
symbols as side information so the receiver can undo it.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.fft import dctn, idctn
from scipy.ndimage import sobel

from .corefmt import SymbolSequence, VideoTensor, check_unit_power, read_gvt, write_gvt, write_tensor
from .errors import ConfigurationError, ContractError, FramingError

SKETCH_SYMBOLS = 32 * 32 * 2 // 2
# Back-computed so that (1147.56 + N_s) / (3*256*256*8) lands on a CBR of 0.0031.
FIRST_FRAME_SYMBOLS = 3728


@dataclass(frozen=True)
class ExternalMapper:
    """Delegates mapping to ``command`` through files in ``workdir``.

    The command is invoked as ``command encode <workdir>`` after
    ``encoder_input.gvt`` (1 x H x W x C) is written, and must leave
    ``encoder_symbols.gvt`` (1 x 1 x N x 2, real and imaginary parts). For
    ``command decode <workdir>`` the roles are ``decoder_symbols.gvt`` in and
    ``decoder_output.gvt`` out.
    """

    command: tuple[str, ...]
    workdir: Path

    def _run(self, verb: str) -> None:
        proc = subprocess.run([*self.command, verb, str(self.workdir)], capture_output=True, text=True)
        if proc.returncode:
            raise ContractError(f"external mapper {verb} failed: {proc.stderr.strip()}")

    def encode(self, image: VideoTensor) -> np.ndarray:
        Path(self.workdir).mkdir(parents=True, exist_ok=True)
        write_tensor(image, Path(self.workdir) / "encoder_input.gvt")
        self._run("encode")
        raw = read_gvt(Path(self.workdir) / "encoder_symbols.gvt")
        if raw.shape[0] != 1 or raw.shape[1] != 1 or raw.shape[3] != 2:
            raise ContractError(f"encoder symbols must be 1 x 1 x N x 2, got {raw.shape}")
        return raw[0, 0, :, 0].astype(np.float64) + 1j * raw[0, 0, :, 1]

    def decode(self, symbols: np.ndarray) -> np.ndarray:
        pairs = np.stack([symbols.real, symbols.imag], axis=-1)[None, None]
        Path(self.workdir).mkdir(parents=True, exist_ok=True)
        write_gvt(pairs, Path(self.workdir) / "decoder_symbols.gvt")
        self._run("decode")
        return read_gvt(Path(self.workdir) / "decoder_output.gvt")


@dataclass(frozen=True)
class AnalogMapperSpec:
    input_shape: tuple[int, int, int]  # (H, W, C)
    symbol_budget: int
    mapper_kind: str = "linear"
    external: ExternalMapper | None = None

    def __post_init__(self):
        shape = tuple(int(v) for v in self.input_shape)
        object.__setattr__(self, "input_shape", shape)
        if len(shape) != 3 or min(shape) < 1:
            raise ConfigurationError(f"input_shape must be (H, W, C) with positive entries, got {shape}")
        if self.symbol_budget < 1:
            raise ConfigurationError("symbol_budget must be >= 1")
        if self.mapper_kind == "linear":
            if 2 * self.symbol_budget > int(np.prod(shape)):
                raise ConfigurationError(
                    f"linear mapper needs 2 * {self.symbol_budget} <= {int(np.prod(shape))} real dimensions"
                )
        elif self.mapper_kind == "external":
            if self.external is None:
                raise ConfigurationError("external mapper kind needs an ExternalMapper")
        else:
            raise ConfigurationError(f"unknown mapper kind {self.mapper_kind!r}")

    @property
    def real_dims(self) -> int:
        return 2 * self.symbol_budget


@lru_cache(maxsize=32)
def coefficient_order(shape: tuple[int, int, int]) -> np.ndarray:
    """Flat indices of the (H, W, C) DCT coefficients, lowest frequency first."""
    h, w, c = shape
    u, v, ch = np.meshgrid(np.arange(h), np.arange(w), np.arange(c), indexing="ij")
    order = np.lexsort((ch.ravel(), u.ravel(), (u + v).ravel()))
    order.flags.writeable = False
    return order


def power_normalize(symbols) -> SymbolSequence:
    """Scale to unit mean power. Empty or all-zero input passes through flagged."""
    if isinstance(symbols, SymbolSequence):
        base_gain, x = symbols.gain, symbols.symbols
    else:
        base_gain, x = 1.0, np.asarray(symbols, dtype=np.complex128).reshape(-1)
    energy = float(np.sum(np.abs(x) ** 2))
    if x.size == 0 or energy == 0.0:
        return SymbolSequence(x, gain=base_gain, zero_power=True)
    g = np.sqrt(x.size / energy)
    return SymbolSequence(x * g, gain=base_gain * g)


def _check_frame(image: VideoTensor, spec: AnalogMapperSpec) -> None:
    if image.frames != 1 or image.shape[1:] != spec.input_shape:
        raise ConfigurationError(f"image shape {image.shape} does not match mapper input {spec.input_shape}")


def jscc_encode(image: VideoTensor, spec: AnalogMapperSpec) -> SymbolSequence:
    _check_frame(image, spec)
    if spec.mapper_kind == "linear":
        coefs = dctn(image.data[0].astype(np.float64), axes=(0, 1), norm="ortho").reshape(-1)
        kept = coefs[coefficient_order(spec.input_shape)[: spec.real_dims]]
        raw = kept[0::2] + 1j * kept[1::2]
    else:
        raw = spec.external.encode(image)
        if raw.size != spec.symbol_budget:
            raise ContractError(f"external encoder emitted {raw.size} symbols, budget is {spec.symbol_budget}")
    out = power_normalize(raw)
    if not out.zero_power:
        check_unit_power(out.symbols)
    return out


def jscc_decode(received: SymbolSequence, spec: AnalogMapperSpec) -> VideoTensor:
    """Reconstruct one frame, clamped to [0, 1]."""
    if received.count != spec.symbol_budget:
        raise FramingError(f"expected {spec.symbol_budget} symbols, got {received.count}")
    h, w, c = spec.input_shape
    if received.zero_power:
        return VideoTensor(np.zeros((1, h, w, c)))
    y = received.symbols / received.gain
    if spec.mapper_kind == "linear":
        coefs = np.zeros(h * w * c)
        kept = np.empty(spec.real_dims)
        kept[0::2], kept[1::2] = y.real, y.imag
        coefs[coefficient_order(spec.input_shape)[: spec.real_dims]] = kept
        image = idctn(coefs.reshape(h, w, c), axes=(0, 1), norm="ortho")[None]
    else:
        image = spec.external.decode(y)
        if image.shape != (1, h, w, c):
            raise ContractError(f"external decoder returned shape {image.shape}")
    return VideoTensor(np.clip(image, 0.0, 1.0))


def sketch_spec(height: int = 256, width: int = 256) -> AnalogMapperSpec:
    return AnalogMapperSpec((height, width, 1), SKETCH_SYMBOLS)


def first_frame_spec(height: int = 256, width: int = 256, symbols: int = FIRST_FRAME_SYMBOLS) -> AnalogMapperSpec:
    return AnalogMapperSpec((height, width, 3), symbols)


def sketch_frame(frame: np.ndarray) -> np.ndarray:
    """Edge sketch of one ``H x W x C`` frame: Sobel magnitude of luma in [0, 1]."""
    frame = np.asarray(frame, dtype=np.float64)
    luma = frame[..., 0] if frame.shape[-1] == 1 else frame[..., :3] @ np.array([0.299, 0.587, 0.114])
    mag = np.hypot(sobel(luma, axis=0), sobel(luma, axis=1))
    peak = mag.max()
    return (mag / peak if peak > 0 else mag)[..., None]
