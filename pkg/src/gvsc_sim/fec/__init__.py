"""Channel codes: rate-1/3 turbo for text payloads, multi-rate LDPC for bitstreams."""

from fractions import Fraction

from ..errors import ConfigurationError
from .alist import from_alist, read_alist, to_alist, write_alist
from .ldpc import (
    SUPPORTED_RATES,
    LdpcCodeSpec,
    gf2_rank,
    ldpc_code,
    ldpc_decode,
    ldpc_encode,
)
from .turbo import TurboCodeSpec, qpp_interleaver, rsc_trellis, siso_decode, turbo_decode, turbo_encode


def code_rate(value) -> Fraction:
    """Parse ``"1/3"``, ``0.5``, or a Fraction into a supported code rate."""
    try:
        rate = Fraction(value).limit_denominator(12) if not isinstance(value, str) else Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"cannot parse code rate {value!r}: {exc}") from None
    if rate not in SUPPORTED_RATES:
        raise ConfigurationError(f"unsupported code rate {rate}; supported: {', '.join(map(str, SUPPORTED_RATES))}")
    return rate


__all__ = [
    "SUPPORTED_RATES",
    "LdpcCodeSpec",
    "TurboCodeSpec",
    "code_rate",
    "from_alist",
    "gf2_rank",
    "ldpc_code",
    "ldpc_decode",
    "ldpc_encode",
    "qpp_interleaver",
    "read_alist",
    "rsc_trellis",
    "siso_decode",
    "to_alist",
    "turbo_decode",
    "turbo_encode",
    "write_alist",
]
