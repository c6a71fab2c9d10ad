"""Link-level simulator for generative semantic video transmission over AWGN channels."""

from .budget import LinkBudget, VideoDims, scheme_budget
from .channel import NoiseParams, awgn
from .corefmt import SymbolSequence, VideoTensor, read_tensor, write_tensor
from .errors import (
    ConfigurationError,
    ContractError,
    DomainError,
    FormatError,
    FramingError,
    GvscError,
    ShapeError,
    UnsupportedRegimeError,
)
from .modulation import QAM4, QAM16, modulate, soft_demodulate
from .strategy import ADAPTIVE_LDPC_TABLE, SchemeKind, default_catalog, select_ldpc_config, select_scheme

__version__ = "0.1.0"
