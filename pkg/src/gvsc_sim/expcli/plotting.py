"""Optional PNG figures written next to the CSV report: trial-averaged metric vs SNR."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PLOTTED = {
    "ber_text": ("BER", True),
    "bler_text": ("Block error rate", True),
    "psnr": ("PSNR (dB)", False),
    "ssim": ("SSIM", False),
    "weighted_loss": ("Weighted loss", False),
}


def _numeric(value: str):
    try:
        v = float(value)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def series(rows, column: str) -> dict[str, tuple[list[float], list[float]]]:
    """Per scheme: SNRs and the mean of ``column`` over trials (blank cells skipped)."""
    acc = defaultdict(lambda: defaultdict(list))
    for r in rows:
        v = _numeric(r[column])
        if v is not None:
            acc[r["scheme"]][float(r["snr_db"])].append(v)
    out = {}
    for scheme, by_snr in acc.items():
        snrs = sorted(by_snr)
        out[scheme] = (snrs, [sum(by_snr[s]) / len(by_snr[s]) for s in snrs])
    return out


def render_figures(rows, csv_path) -> list[Path]:
    """Write one ``<stem>_<metric>.png`` per metric that has data."""
    csv_path = Path(csv_path)
    written = []
    for column, (label, log_y) in PLOTTED.items():
        data = series(rows, column)
        if not data:
            continue
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for scheme, (x, y) in data.items():
            if log_y:
                # zero error rates cannot sit on a log axis
                pts = [(a, b) for a, b in zip(x, y) if b > 0]
                if not pts:
                    continue
                x, y = zip(*pts)
            ax.plot(x, y, marker="o", label=scheme)
        if log_y:
            ax.set_yscale("log")
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        if ax.lines:
            ax.legend(fontsize=8)
        fig.tight_layout()
        path = csv_path.with_name(f"{csv_path.stem}_{column}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
