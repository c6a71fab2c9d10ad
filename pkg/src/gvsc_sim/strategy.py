"""Scheme catalog, the SNR-adaptive LDPC/modulation table, and scheme selection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigurationError, UnsupportedRegimeError
from .fec import code_rate
from .jscc import FIRST_FRAME_SYMBOLS, SKETCH_SYMBOLS
from .modulation import QAM4, QAM16, ModulationScheme, scheme_by_name


class SchemeKind(enum.Enum):
    DESC_ONLY = "DescOnly"
    SKETCH_DESC = "SketchDesc"
    SKETCHES_DESC = "SketchesDesc"
    FIRST_FRAME_DESC = "FirstFrameDesc"
    H26X_LDPC = "H26xLdpc"
    DJSCC_RGB = "DjsccRgb"
    DVST = "Dvst"

    @classmethod
    def parse(cls, name: str) -> SchemeKind:
        key = name.strip().replace("_", "").replace("-", "").replace("+", "").replace(".", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ConfigurationError(f"unknown scheme {name!r}; choose from {', '.join(k.value for k in cls)}")


# Stable numeric ids feed the seed derivation; never renumber.
SCHEME_IDS = {
    SchemeKind.DESC_ONLY: 1,
    SchemeKind.SKETCH_DESC: 2,
    SchemeKind.SKETCHES_DESC: 3,
    SchemeKind.FIRST_FRAME_DESC: 4,
    SchemeKind.H26X_LDPC: 5,
    SchemeKind.DJSCC_RGB: 6,
    SchemeKind.DVST: 7,
}

DISPLAY_NAMES = {
    SchemeKind.DESC_ONLY: "Desc. Only",
    SchemeKind.SKETCH_DESC: "Sketch+Desc.",
    SchemeKind.SKETCHES_DESC: "Sketches+Desc.",
    SchemeKind.FIRST_FRAME_DESC: "First Frame+Desc.",
    SchemeKind.H26X_LDPC: "H.26x+LDPC",
    SchemeKind.DJSCC_RGB: "DJSCC-RGB",
    SchemeKind.DVST: "DVST",
}


@dataclass(frozen=True)
class TextChain:
    """Description payload: turbo code plus QAM."""

    avg_tokens: float = 95.63
    bits_per_token: int = 8
    rate: Fraction = Fraction(1, 3)
    modulation: ModulationScheme = QAM4
    turbo_block: int = 1024
    turbo_iterations: int = 8


@dataclass(frozen=True)
class JsccChain:
    """Analog visual payload.

    ``source`` names what is sent: ``sketch`` or ``rgb``, first frame only or
    every frame. The budget is either an explicit symbol count or an opaque
    CBR share (for streams whose internal split is not modelled).
    """

    source: str
    symbols: float | None = None
    cbr: float | None = None

    def __post_init__(self):
        if self.source not in ("sketch_first", "sketch_all", "rgb_first", "rgb_all"):
            raise ConfigurationError(f"unknown visual source {self.source!r}")
        if (self.symbols is None) == (self.cbr is None):
            raise ConfigurationError("a JSCC chain needs exactly one of symbols or cbr")

    @property
    def all_frames(self) -> bool:
        return self.source.endswith("_all")

    @property
    def uses_sketch(self) -> bool:
        return self.source.startswith("sketch")


@dataclass(frozen=True)
class LdpcConfigTable:
    """SNR (dB) -> (code rate, modulation), all rows at the same CBR."""

    rows: tuple[tuple[float, Fraction, ModulationScheme], ...]
    cbr: float = 0.005

    def __post_init__(self):
        snrs = [r[0] for r in self.rows]
        if not snrs or snrs != sorted(snrs) or len(set(snrs)) != len(snrs):
            raise ConfigurationError("table rows must have strictly increasing SNRs")

    def lookup(self, snr_db: float) -> tuple[Fraction, ModulationScheme]:
        """Nearest lower row; below the first row is unsupported."""
        if math.isnan(snr_db) or snr_db < self.rows[0][0]:
            raise UnsupportedRegimeError(f"no LDPC configuration below {self.rows[0][0]:g} dB (got {snr_db} dB)")
        chosen = self.rows[0]
        for row in self.rows:
            if row[0] <= snr_db:
                chosen = row
        return chosen[1], chosen[2]

    def to_text(self) -> str:
        lines = [f"CBR {self.cbr:g}"]
        for snr, rate, mod in self.rows:
            lines.append(f"{snr:g} dB: {rate} LDPC+{mod.name}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> LdpcConfigTable:
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("CBR "):
            raise ConfigurationError("table text must start with a 'CBR <value>' line")
        rows = []
        for line in lines[1:]:
            try:
                snr_part, cfg = line.split(":", 1)
                rate_part, mod_part = cfg.strip().split(" LDPC+")
                snr = float(snr_part.replace("dB", "").strip())
            except ValueError:
                raise ConfigurationError(f"malformed table row {line!r}") from None
            rows.append((snr, code_rate(rate_part), scheme_by_name(mod_part)))
        return cls(tuple(rows), float(lines[0].split()[1]))


ADAPTIVE_LDPC_TABLE = LdpcConfigTable(
    (
        (0.0, Fraction(1, 3), QAM4),
        (2.0, Fraction(1, 2), QAM4),
        (4.0, Fraction(2, 3), QAM4),
        (6.0, Fraction(3, 4), QAM4),
        (8.0, Fraction(1, 2), QAM16),
        (10.0, Fraction(2, 3), QAM16),
    ),
    cbr=0.005,
)


@dataclass(frozen=True)
class LdpcChain:
    """Opaque codec bitstream sent through the adaptive LDPC + QAM chain."""

    cbr: float = 0.005
    table: LdpcConfigTable = ADAPTIVE_LDPC_TABLE


# Which chains each kind carries: (has text chain, visual chain type or None).
_CHAIN_SHAPE = {
    SchemeKind.DESC_ONLY: (True, None),
    SchemeKind.SKETCH_DESC: (True, JsccChain),
    SchemeKind.SKETCHES_DESC: (True, JsccChain),
    SchemeKind.FIRST_FRAME_DESC: (True, JsccChain),
    SchemeKind.H26X_LDPC: (False, LdpcChain),
    SchemeKind.DJSCC_RGB: (False, JsccChain),
    SchemeKind.DVST: (False, JsccChain),
}

PUBLISHED_CBRS = (0.0007, 0.001, 0.003, 0.0031, 0.004, 0.005)


@dataclass(frozen=True)
class SchemeConfig:
    kind: SchemeKind
    text_chain: TextChain | None
    visual_chain: JsccChain | LdpcChain | None
    published_cbr: float
    # significant figures the published CBR was rounded to
    published_sig_figs: int = 1
    options: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        has_text, visual_type = _CHAIN_SHAPE[self.kind]
        if (self.text_chain is not None) != has_text:
            raise ConfigurationError(f"{self.kind.value} {'needs' if has_text else 'has no'} text chain")
        if visual_type is None and self.visual_chain is not None:
            raise ConfigurationError(f"{self.kind.value} has no visual chain")
        if visual_type is not None and not isinstance(self.visual_chain, visual_type):
            raise ConfigurationError(f"{self.kind.value} needs a {visual_type.__name__}")
        if self.published_cbr not in PUBLISHED_CBRS:
            raise ConfigurationError(f"published CBR {self.published_cbr} is not a catalog value")

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES[self.kind]

    @property
    def scheme_id(self) -> int:
        return SCHEME_IDS[self.kind]

    @property
    def has_visual(self) -> bool:
        return self.visual_chain is not None


def default_catalog() -> dict[SchemeKind, SchemeConfig]:
    text = TextChain()
    entries = [
        SchemeConfig(SchemeKind.DESC_ONLY, text, None, 0.0007),
        SchemeConfig(SchemeKind.SKETCH_DESC, text, JsccChain("sketch_first", symbols=SKETCH_SYMBOLS), 0.001),
        # sketch stream split between key/differential coders is opaque: one CBR share
        SchemeConfig(SchemeKind.SKETCHES_DESC, text, JsccChain("sketch_all", cbr=0.0026), 0.003),
        SchemeConfig(
            SchemeKind.FIRST_FRAME_DESC, text, JsccChain("rgb_first", symbols=FIRST_FRAME_SYMBOLS), 0.0031, 2
        ),
        SchemeConfig(SchemeKind.H26X_LDPC, None, LdpcChain(), 0.005),
        SchemeConfig(SchemeKind.DJSCC_RGB, None, JsccChain("rgb_all", cbr=0.005), 0.005),
        SchemeConfig(SchemeKind.DVST, None, JsccChain("rgb_all", cbr=0.004), 0.004),
    ]
    return {e.kind: e for e in entries}


def select_ldpc_config(snr_db: float, table: LdpcConfigTable = ADAPTIVE_LDPC_TABLE) -> tuple[Fraction, ModulationScheme]:
    return table.lookup(snr_db)


DEFAULT_PREFERENCE = (SchemeKind.FIRST_FRAME_DESC, SchemeKind.SKETCHES_DESC, SchemeKind.SKETCH_DESC)


def select_scheme(
    snr_db: float,
    threshold_db: float = 0.0,
    catalog=None,
    preference=DEFAULT_PREFERENCE,
) -> SchemeConfig:
    """Description plus visuals strictly above the threshold, description only otherwise."""
    if not math.isfinite(threshold_db):
        raise ConfigurationError("threshold_db must be finite")
    if catalog is None:
        catalog = default_catalog()
    entries = {s.kind: s for s in (catalog.values() if isinstance(catalog, dict) else catalog)}
    if not entries:
        raise ConfigurationError("empty scheme catalog")
    if snr_db > threshold_db:
        for kind in preference:
            if kind in entries:
                return entries[kind]
    if SchemeKind.DESC_ONLY not in entries:
        raise ConfigurationError("catalog lacks a DescOnly fallback")
    return entries[SchemeKind.DESC_ONLY]


@dataclass(frozen=True)
class Stage:
    name: str
    detail: str = ""

    def __str__(self):
        return f"{self.name}({self.detail})" if self.detail else self.name


@dataclass(frozen=True)
class TxChain:
    """Parallel branches, each an ordered list of stages."""

    scheme: SchemeKind
    branches: tuple[tuple[Stage, ...], ...]

    def describe(self) -> str:
        return " || ".join("[" + " -> ".join(str(s) for s in b) + "]" for b in self.branches)


def build_tx_chain(scheme: SchemeConfig, snr_db: float | None = None) -> TxChain:
    """The stage list the runner executes; H.26x needs ``snr_db`` for the table."""
    branches = []
    if scheme.text_chain is not None:
        tc = scheme.text_chain
        branches.append(
            (
                Stage("bits"),
                Stage("turbo", str(tc.rate)),
                Stage("qam", tc.modulation.name),
                Stage("awgn"),
                Stage("soft-demod"),
                Stage("turbo-decode"),
            )
        )
    vc = scheme.visual_chain
    if isinstance(vc, JsccChain):
        what = {"sketch_first": "sketch", "sketch_all": "sketches", "rgb_first": "frame", "rgb_all": "frames"}
        branches.append((Stage(what[vc.source]), Stage("jscc_encode"), Stage("awgn"), Stage("jscc_decode")))
    elif isinstance(vc, LdpcChain):
        if snr_db is None:
            raise ConfigurationError("H.26x chain depends on the SNR")
        rate, mod = vc.table.lookup(snr_db)
        branches.append(
            (
                Stage("bitstream"),
                Stage("ldpc", str(rate)),
                Stage("qam", mod.name),
                Stage("awgn"),
                Stage("demod"),
                Stage("decode"),
            )
        )
    return TxChain(scheme.kind, tuple(branches))
