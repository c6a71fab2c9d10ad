"""Pixel and structural quality metrics, the weighted MSE/perceptual loss, and
the semantic-scorer plug-in boundary."""

from __future__ import annotations

import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from scipy.ndimage import correlate1d

from .corefmt import VideoTensor, encode_pnm
from .errors import ConfigurationError, ContractError, DomainError, ShapeError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def _pixels(x) -> np.ndarray:
    if isinstance(x, VideoTensor):
        return x.data.astype(np.float64)
    return np.asarray(x, dtype=np.float64)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _pixels(a), _pixels(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a, b, peak: float = 1.0) -> float:
    """PSNR in dB; identical inputs give ``inf``."""
    if peak <= 0:
        raise DomainError("peak must be > 0")
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak) - 10.0 * math.log10(err)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    # separable Gaussian, keeping only windows fully inside the image
    r = len(g) // 2
    out = correlate1d(img, g, axis=0, mode="constant")
    out = correlate1d(out, g, axis=1, mode="constant")
    return out[r : img.shape[0] - r, r : img.shape[1] - r]


def _ssim_plane(x: np.ndarray, y: np.ndarray, g: np.ndarray, c1: float, c2: float) -> float:
    mu_x, mu_y = _filter_valid(x, g), _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mu_x**2
    syy = _filter_valid(y * y, g) - mu_y**2
    sxy = _filter_valid(x * y, g) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def ssim(a, b, peak: float = 1.0) -> float:
    """Mean SSIM over 11x11 Gaussian windows, averaged over frames and channels.

    Accepts ``H x W``, ``H x W x C`` or ``F x H x W x C`` (including
    :class:`VideoTensor`).
    """
    a, b = _pair(a, b)
    if a.ndim == 2:
        a, b = a[None, :, :, None], b[None, :, :, None]
    elif a.ndim == 3:
        a, b = a[None], b[None]
    elif a.ndim != 4:
        raise ShapeError(f"ssim expects 2-D to 4-D input, got shape {a.shape}")
    if min(a.shape[1:3]) < SSIM_WINDOW:
        raise DomainError(f"image {a.shape[1]}x{a.shape[2]} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    g = gaussian_window()
    c1, c2 = (0.01 * peak) ** 2, (0.03 * peak) ** 2
    vals = [
        _ssim_plane(a[f, :, :, c], b[f, :, :, c], g, c1, c2) for f in range(a.shape[0]) for c in range(a.shape[3])
    ]
    return float(np.mean(vals))


class PerceptualDistance(Protocol):
    def __call__(self, a, b) -> float: ...


def _gradient_magnitude(img: np.ndarray) -> np.ndarray:
    gy, gx = np.gradient(img, axis=(0, 1))
    return np.hypot(gx, gy)


def _halve(img: np.ndarray) -> np.ndarray:
    h, w = img.shape[0] // 2 * 2, img.shape[1] // 2 * 2
    x = img[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


@dataclass(frozen=True)
class GradientDistance:
    """Stand-in perceptual distance: mean absolute difference of gradient
    magnitudes over a small image pyramid. Symmetric, non-negative, zero on
    identical inputs."""

    scales: int = 3

    def __call__(self, a, b) -> float:
        a, b = _pair(a, b)
        if a.ndim == 4:
            return float(np.mean([self(a[f], b[f]) for f in range(a.shape[0])]))
        if a.ndim == 2:
            a, b = a[:, :, None], b[:, :, None]
        total = 0.0
        used = 0
        for _ in range(self.scales):
            if min(a.shape[:2]) < 2:
                break
            total += float(np.mean(np.abs(_gradient_magnitude(a) - _gradient_magnitude(b))))
            used += 1
            a, b = _halve(a), _halve(b)
        return total / max(used, 1)


@dataclass(frozen=True)
class LossWeights:
    k: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ConfigurationError(f"k must lie in [0, 1], got {self.k}")


def combine_loss(mse_value: float, dist_value: float, k: float) -> float:
    return k * mse_value + (1.0 - k) * dist_value


def weighted_loss(a, b, w: LossWeights = LossWeights(), p: PerceptualDistance | None = None) -> float:
    """``k * mse + (1 - k) * dist``."""
    p = GradientDistance() if p is None else p
    return combine_loss(mse(a, b), float(p(a, b)), w.k)


class ExternalScorer:
    """Semantic scorer run out of process.

    For each call, frames are written to ``workdir`` as ``ref_000.ppm``,
    ``gen_000.ppm``, ... (PGM for single-channel video), then
    ``command <workdir>`` is run and must leave ``scores.txt`` with one float
    per frame, one per line.
    """

    def __init__(self, command, workdir, name: str = "semantic"):
        self.command = tuple(command)
        self.workdir = Path(workdir)
        self.name = name

    def __call__(self, ref: VideoTensor, gen: VideoTensor) -> list[float]:
        self.workdir.mkdir(parents=True, exist_ok=True)
        ext = "ppm" if ref.channels == 3 else "pgm"
        for f in range(ref.frames):
            (self.workdir / f"ref_{f:03d}.{ext}").write_bytes(encode_pnm(ref.data[f]))
            (self.workdir / f"gen_{f:03d}.{ext}").write_bytes(encode_pnm(gen.data[f]))
        proc = subprocess.run([*self.command, str(self.workdir)], capture_output=True, text=True)
        if proc.returncode:
            raise ContractError(f"semantic scorer failed: {proc.stderr.strip()}")
        lines = [ln for ln in (self.workdir / "scores.txt").read_text().splitlines() if ln.strip()]
        if len(lines) != ref.frames:
            raise ContractError(f"scorer returned {len(lines)} scores for {ref.frames} frames")
        return [float(v) for v in lines]


@dataclass
class FrameReport:
    mse: list[float]
    psnr: list[float]
    ssim: list[float]
    semantic: list[float] | None = None
    extras: dict = field(default_factory=dict)

    @staticmethod
    def _mean(values) -> float:
        total = 0.0
        for v in values:  # frame order, fixed reduction
            total += v
        return total / len(values)

    @property
    def mean_mse(self) -> float:
        return self._mean(self.mse)

    @property
    def mean_psnr(self) -> float:
        return self._mean(self.psnr)

    @property
    def mean_ssim(self) -> float:
        return self._mean(self.ssim)

    @property
    def mean_semantic(self) -> float | None:
        return None if self.semantic is None else self._mean(self.semantic)


def score_frames(ref: VideoTensor, gen: VideoTensor, scorer=None, peak: float = 1.0) -> FrameReport:
    """Compare each generated frame with its reference frame."""
    if ref.shape != gen.shape:
        raise ShapeError(f"shape mismatch: {ref.shape} vs {gen.shape}")
    r, g = ref.data.astype(np.float64), gen.data.astype(np.float64)
    frames = range(ref.frames)
    report = FrameReport(
        mse=[mse(r[f], g[f]) for f in frames],
        psnr=[psnr(r[f], g[f], peak) for f in frames],
        ssim=[ssim(r[f], g[f], peak) for f in frames],
    )
    if scorer is not None:
        report.semantic = list(scorer(ref, gen))
    return report
