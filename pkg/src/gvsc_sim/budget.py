"""Symbol counts and channel bandwidth ratio (CBR) for each transmission scheme.

``CBR = K / (C_in * H * W * F)`` symbols per pixel, where ``K`` is every complex
symbol sent. Text payloads cost ``K_d = N_d / (M * R_c)`` symbols.

Budget mode accepts fractional counts (dataset averages such as 95.63 tokens per
caption); :func:`transmission_symbols` gives the integer count an actual
transmission needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigurationError, DomainError
from .fec import SUPPORTED_RATES
from .modulation import SUPPORTED_ORDERS


@dataclass(frozen=True)
class VideoDims:
    frames: int = 8
    height: int = 256
    width: int = 256
    channels: int = 3

    def __post_init__(self):
        if min(self.frames, self.height, self.width, self.channels) < 1:
            raise DomainError(f"video dimensions must be >= 1, got {self}")

    @property
    def denominator(self) -> int:
        return self.channels * self.height * self.width * self.frames

    @classmethod
    def of(cls, video) -> VideoDims:
        f, h, w, c = video.shape
        return cls(f, h, w, c)


# Evaluation clips: 8 frames of 256 x 256 RGB.
DEFAULT_DIMS = VideoDims()


@dataclass(frozen=True)
class LinkBudget:
    k_text: float
    k_visual: float
    denominator: int
    published_cbr: float | None = None

    def __post_init__(self):
        if self.k_text < 0 or self.k_visual < 0 or self.denominator < 1:
            raise DomainError("budget components must be non-negative")

    @property
    def k_total(self) -> float:
        return self.k_text + self.k_visual

    @property
    def cbr(self) -> float:
        return self.k_total / self.denominator


def _check_rate(rate) -> Fraction:
    r = Fraction(rate).limit_denominator(12)
    if r not in SUPPORTED_RATES:
        raise ConfigurationError(f"unsupported code rate {rate}")
    return r


def description_symbols(n_bits: float, modulation_bits: int, rate) -> float:
    """``N_d / (M * R_c)`` for a text payload of ``n_bits``."""
    if modulation_bits not in SUPPORTED_ORDERS:
        raise ConfigurationError(f"unsupported modulation order {modulation_bits}")
    r = _check_rate(rate)
    if n_bits < 0:
        raise DomainError("n_bits must be >= 0")
    return n_bits * r.denominator / (modulation_bits * r.numerator)


def transmission_symbols(symbols: float) -> int:
    """Concrete transmissions send whole symbols: round a budget up."""
    if symbols < 0:
        raise DomainError("symbol count must be >= 0")
    # guard against 1147.0000000001 style float noise before ceiling
    return math.ceil(round(symbols, 9))


def cbr(k: float, c_in: int, h: int, w: int, f: int) -> float:
    if min(c_in, h, w, f) < 1:
        raise DomainError("all dimensions must be >= 1")
    return k / (c_in * h * w * f)


def visual_symbols(chain, dims: VideoDims) -> float:
    """Symbols of a visual chain: an explicit count, or an opaque CBR share."""
    symbols = getattr(chain, "symbols", None)
    share = getattr(chain, "cbr", None)
    if symbols is not None:
        return float(symbols)
    if share is not None:
        return share * dims.denominator
    raise ConfigurationError(f"visual chain {chain!r} defines neither symbols nor cbr")


def text_symbols(chain) -> float:
    n_bits = chain.avg_tokens * chain.bits_per_token
    return description_symbols(n_bits, chain.modulation.order_bits, chain.rate)


def scheme_budget(scheme, dims: VideoDims = DEFAULT_DIMS) -> LinkBudget:
    """Compose the text and visual budgets of a catalog scheme."""
    k_text = text_symbols(scheme.text_chain) if scheme.text_chain is not None else 0.0
    k_visual = visual_symbols(scheme.visual_chain, dims) if scheme.visual_chain is not None else 0.0
    return LinkBudget(k_text, k_visual, dims.denominator, scheme.published_cbr)


def round_sig(value: float, digits: int) -> float:
    if value == 0:
        return 0.0
    return round(value, digits - 1 - math.floor(math.log10(abs(value))))
