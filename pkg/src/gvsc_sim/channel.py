"""AWGN channel with reproducible circularly-symmetric complex Gaussian noise.

SNR is per symbol, ``SNR = 10 log10(E|x|^2 / sigma^2)``. Every encoder in this
package emits unit-power symbols, so ``signal_power`` defaults to 1.

Noise is drawn with an explicit Box-Muller transform over uniforms from a
Philox-4x64 counter generator keyed directly by the 64-bit seed. Both pieces are
fully specified, so a seed reproduces the same noise on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corefmt import SymbolSequence
from .errors import DomainError

SEED_MASK = (1 << 64) - 1


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & SEED_MASK))


def standard_normal(seed: int, shape) -> np.ndarray:
    """Standard normal draws via Box-Muller; deterministic in ``seed``."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    n = int(np.prod(shape, dtype=np.int64))
    pairs = (n + 1) // 2
    u = philox(seed).random(2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u in (0, 1]
    angle = 2.0 * np.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(angle)
    z[:, 1] = radius * np.sin(angle)
    return z.reshape(-1)[:n].reshape(shape)


def sigma2_from_snr(snr_db: float, signal_power: float = 1.0) -> float:
    if not signal_power > 0:
        raise DomainError(f"signal_power must be positive, got {signal_power}")
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return signal_power / 10.0 ** (snr_db / 10.0)


def snr_from_sigma2(sigma2: float, signal_power: float = 1.0) -> float:
    if sigma2 == 0:
        return math.inf
    return 10.0 * math.log10(signal_power / sigma2)


def ebn0_from_esn0(esn0_db: float, bits_per_symbol: int, code_rate: float = 1.0) -> float:
    """Per-information-bit SNR for a per-symbol SNR."""
    return esn0_db - 10.0 * math.log10(bits_per_symbol * code_rate)


def esn0_from_ebn0(ebn0_db: float, bits_per_symbol: int, code_rate: float = 1.0) -> float:
    return ebn0_db + 10.0 * math.log10(bits_per_symbol * code_rate)


@dataclass(frozen=True)
class NoiseParams:
    snr_db: float
    sigma2: float
    rng_seed: int = 0

    def __post_init__(self):
        if self.sigma2 < 0 or not math.isfinite(self.sigma2):
            raise DomainError(f"sigma2 must be finite and >= 0, got {self.sigma2}")
        if self.sigma2 == 0 and not math.isinf(self.snr_db):
            raise DomainError("sigma2 = 0 is reserved for the ideal channel (snr_db = inf)")

    @classmethod
    def from_snr(cls, snr_db: float, rng_seed: int = 0, signal_power: float = 1.0) -> NoiseParams:
        return cls(snr_db, sigma2_from_snr(snr_db, signal_power), rng_seed)

    @classmethod
    def ideal(cls) -> NoiseParams:
        return cls(math.inf, 0.0, 0)


def complex_noise(sigma2: float, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. CN(0, sigma2) samples: sigma2/2 per real dimension."""
    z = standard_normal(seed, 2 * n).reshape(n, 2) if n else np.zeros((0, 2))
    return math.sqrt(sigma2 / 2.0) * (z[:, 0] + 1j * z[:, 1])


def awgn(symbols, params: NoiseParams):
    """Add calibrated complex Gaussian noise.

    Accepts a raw complex array (returned as an array) or a
    :class:`SymbolSequence` (returned with its side information intact).
    The noise realization depends only on the seed and the symbol count.
    """
    if isinstance(symbols, SymbolSequence):
        return symbols.with_symbols(awgn(symbols.symbols, params))
    x = np.asarray(symbols, dtype=np.complex128)
    if params.sigma2 == 0:
        return x.copy()
    noise = complex_noise(params.sigma2, x.size, params.rng_seed).reshape(x.shape)
    return x + noise
