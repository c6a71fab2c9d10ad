"""End-to-end sweep over (scheme, SNR, trial) cells with CSV reporting.

Seeds
-----
Each cell draws everything from ``derive_seed(base, scheme_id, snr_index,
trial)``, bit-exactly::

    mix64(z):  z = (z + 0x9E3779B97F4A7C15) mod 2^64
               z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
               z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
               return z ^ (z >> 31)
    packed = (scheme_id & 0xFFFF) << 48 | (snr_index & 0xFFFF) << 32 | (trial & 0xFFFFFFFF)
    seed   = mix64(base ^ mix64(packed))

``mix64`` is a bijection, so seeds never collide for a fixed base within those
index ranges. Independent streams inside a cell use ``substream(seed, k)``.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..budget import VideoDims, scheme_budget, transmission_symbols
from ..channel import NoiseParams, awgn, philox
from ..corefmt import SymbolSequence, VideoTensor, read_pnm, read_tensor, text_to_bits
from ..errors import ConfigurationError, FormatError, UnsupportedRegimeError
from ..fec import TurboCodeSpec, ldpc_code, ldpc_decode, ldpc_encode, turbo_decode, turbo_encode
from ..jscc import AnalogMapperSpec, jscc_decode, jscc_encode, sketch_frame
from ..metrics import GradientDistance, LossWeights, mse, psnr, ssim, weighted_loss
from ..modulation import modulate, soft_demodulate
from ..strategy import JsccChain, LdpcChain, SchemeConfig, select_scheme
from .config import ADAPTIVE, ADAPTIVE_ID, ExperimentConfig

MASK64 = (1 << 64) - 1
UNSUPPORTED = "unsupported"


class FixtureError(OSError):
    pass


def mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, scheme_id: int, snr_index: int, trial_index: int) -> int:
    packed = (scheme_id & 0xFFFF) << 48 | (snr_index & 0xFFFF) << 32 | (trial_index & 0xFFFFFFFF)
    return mix64((base_seed & MASK64) ^ mix64(packed))


def substream(seed: int, k: int) -> int:
    return mix64(seed ^ mix64((k + 1) * 0x2545F4914F6CDD1D & MASK64))


@dataclass
class TrialRecord:
    scheme: str
    snr_db: float
    trial_index: int
    cbr_exact: float
    cbr_published: float
    ber_text: float | str | None = None
    bler_text: float | str | None = None
    visual_mse: float | None = None
    psnr: float | None = None
    ssim: float | None = None
    weighted_loss: float | None = None
    wall_time: float | None = None

    @property
    def unsupported(self) -> bool:
        return self.ber_text == UNSUPPORTED


CSV_COLUMNS = tuple(f.name for f in fields(TrialRecord))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".12g")


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(_cell(v) for v in astuple(r))
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --- fixtures ----------------------------------------------------------------


def synthetic_video(seed: int = 0, dims: VideoDims = VideoDims()) -> VideoTensor:
    """Deterministic clip: a drifting color gradient with a moving disc."""
    f, h, w, c = dims.frames, dims.height, dims.width, dims.channels
    rng = philox(seed)
    phase = rng.random(3) * 2 * np.pi
    cy, cx = rng.random(2) * 0.5 + 0.25
    vy, vx = (rng.random(2) - 0.5) * 0.04
    y, x = np.mgrid[0:h, 0:w] / np.array([h, w]).reshape(2, 1, 1)
    out = np.empty((f, h, w, c))
    for t in range(f):
        for ch in range(c):
            out[t, :, :, ch] = 0.5 + 0.3 * np.sin(2 * np.pi * (x + 0.5 * y) + phase[ch] + 0.2 * t)
        disc = (y - cy - vy * t) ** 2 + (x - cx - vx * t) ** 2 < 0.02
        out[t][disc] = [0.9, 0.2, 0.1][:c]
    return VideoTensor(np.clip(out, 0, 1))


def load_fixture(path: Path) -> tuple[VideoTensor, str | None]:
    """Read a GVT or PPM/PGM clip plus an optional ``<path>.txt`` description."""
    path = Path(path)
    try:
        video = read_pnm(path) if path.suffix.lower() in (".ppm", ".pgm", ".pnm") else read_tensor(path)
        side = path.with_suffix(path.suffix + ".txt")
        text = side.read_text().strip() if side.exists() else None
    except (OSError, FormatError, ValueError) as exc:
        raise FixtureError(f"cannot read fixture {path}: {exc}") from None
    return video, text


# --- chains ------------------------------------------------------------------


@lru_cache(maxsize=8)
def _turbo_spec(length: int, iterations: int) -> TurboCodeSpec:
    return TurboCodeSpec(length, decode_iterations=iterations)


def _transmit_bits(coded: np.ndarray, mod, snr_db: float, seed: int) -> np.ndarray:
    """Modulate, add noise, and return LLRs for ``coded`` (any shape)."""
    flat = coded.reshape(-1)
    pad = -flat.size % mod.order_bits
    tx = modulate(np.concatenate([flat, np.zeros(pad, dtype=np.uint8)]), mod)
    noise = NoiseParams.from_snr(snr_db, rng_seed=seed)
    llr = soft_demodulate(awgn(tx, noise), noise.sigma2, mod)
    return llr[: flat.size].reshape(coded.shape)


def run_text_chain(text_chain, text: str, snr_db: float, seed: int) -> tuple[float, float]:
    """BER and block error rate of the description after turbo decoding."""
    bits = text_to_bits(text)
    if not bits.size:
        raise ConfigurationError("the description is empty")
    spec = _turbo_spec(text_chain.turbo_block, text_chain.turbo_iterations)
    blocks = -(-bits.size // spec.length)
    msg = np.zeros(blocks * spec.length, dtype=np.uint8)
    msg[: bits.size] = bits
    msg = msg.reshape(blocks, spec.length)
    llr = _transmit_bits(turbo_encode(msg, spec), text_chain.modulation, snr_db, seed)
    decoded, _ = turbo_decode(llr, spec)
    err = decoded.reshape(-1)[: bits.size] != bits
    block_err = np.zeros(blocks, dtype=bool)
    block_err[np.flatnonzero(err) // spec.length] = True
    return float(err.mean()), float(block_err.mean())


def run_ldpc_chain(chain: LdpcChain, dims: VideoDims, snr_db: float, seed: int) -> tuple[float, float]:
    """Send a pseudo-random bitstream filling the budget through the adaptive LDPC chain."""
    rate, mod = chain.table.lookup(snr_db)
    code = ldpc_code(rate)
    per_block = code.n // mod.order_bits
    blocks = max(1, transmission_symbols(chain.cbr * dims.denominator) // per_block)
    msg = philox(substream(seed, 0)).integers(0, 2, size=(blocks, code.k), dtype=np.uint8)
    llr = _transmit_bits(ldpc_encode(msg, code), mod, snr_db, substream(seed, 1))
    decoded, _, _ = ldpc_decode(llr, code)
    err = decoded != msg
    return float(err.mean()), float(err.any(axis=1).mean())


def _split_budget(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


def visual_payload(chain: JsccChain, video: VideoTensor) -> np.ndarray:
    frames = video.data if chain.all_frames else video.data[:1]
    if chain.uses_sketch:
        return np.stack([sketch_frame(f) for f in frames])
    return frames.astype(np.float64)


def run_jscc_chain(chain: JsccChain, video: VideoTensor, snr_db: float, seed: int) -> tuple[VideoTensor, VideoTensor]:
    """Transmit the visual payload frame by frame; returns (sent, reconstructed)."""
    payload = visual_payload(chain, video)
    if chain.symbols is not None:
        total = int(chain.symbols) * len(payload)
    else:
        total = transmission_symbols(chain.cbr * VideoDims.of(video).denominator)
    noise = NoiseParams.from_snr(snr_db)
    out = []
    for i, (frame, n) in enumerate(zip(payload, _split_budget(total, len(payload)))):
        spec = AnalogMapperSpec(frame.shape, n)
        tx: SymbolSequence = jscc_encode(VideoTensor(frame[None]), spec)
        rx = awgn(tx, NoiseParams(noise.snr_db, noise.sigma2, substream(seed, 100 + i)))
        out.append(jscc_decode(rx, spec).data[0])
    return VideoTensor(payload), VideoTensor(np.stack(out))


# --- sweep -------------------------------------------------------------------


def _scheme_label(entry) -> str:
    return ADAPTIVE if entry == ADAPTIVE else entry.name


def _scheme_id(entry) -> int:
    return ADAPTIVE_ID if entry == ADAPTIVE else entry.scheme_id


def run_cell(cfg: ExperimentConfig, scheme_pos: int, snr_index: int, trial: int) -> TrialRecord:
    entry = cfg.schemes[scheme_pos]
    snr = cfg.snr_grid_db[snr_index]
    seed = derive_seed(cfg.base_seed, _scheme_id(entry), snr_index, trial)
    started = time.perf_counter()
    scheme: SchemeConfig = (
        select_scheme(snr, cfg.threshold_db, cfg.catalog) if entry == ADAPTIVE else entry
    )
    if cfg.fixture_paths:
        video, text = load_fixture(cfg.fixture_paths[trial % len(cfg.fixture_paths)])
    else:
        video, text = synthetic_video(trial), None
    text = text or cfg.description
    dims = VideoDims.of(video)
    budget = scheme_budget(scheme, dims)
    rec = TrialRecord(_scheme_label(entry), snr, trial, budget.cbr, scheme.published_cbr)

    if scheme.text_chain is not None:
        rec.ber_text, rec.bler_text = run_text_chain(scheme.text_chain, text, snr, substream(seed, 0))
    vc = scheme.visual_chain
    if isinstance(vc, LdpcChain):
        try:
            rec.ber_text, rec.bler_text = run_ldpc_chain(vc, dims, snr, substream(seed, 1))
        except UnsupportedRegimeError:
            rec.ber_text = rec.bler_text = UNSUPPORTED
    elif isinstance(vc, JsccChain):
        sent, recon = run_jscc_chain(vc, video, snr, substream(seed, 2))
        rec.visual_mse = mse(sent, recon)
        rec.psnr = psnr(sent, recon)
        rec.ssim = ssim(sent, recon)
        rec.weighted_loss = weighted_loss(sent, recon, LossWeights(cfg.loss_k), GradientDistance())
    if cfg.record_wall_time:
        rec.wall_time = time.perf_counter() - started
    return rec


def _run_cell_args(args):
    return run_cell(*args)


def cells(cfg: ExperimentConfig):
    for s in range(len(cfg.schemes)):
        for i in range(len(cfg.snr_grid_db)):
            for t in range(cfg.trials):
                yield cfg, s, i, t


def run(cfg: ExperimentConfig) -> list[TrialRecord]:
    """All cells, ordered by (scheme order, SNR order, trial) whatever ``workers`` is."""
    jobs = list(cells(cfg))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_cell_args, jobs))
    else:
        records = [run_cell(*job) for job in jobs]
    return records


def write_report(cfg: ExperimentConfig, records) -> Path:
    out = Path(cfg.output_path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(to_csv(records))
    except OSError as exc:
        raise FixtureError(f"cannot write report {out}: {exc}") from None
    return out
