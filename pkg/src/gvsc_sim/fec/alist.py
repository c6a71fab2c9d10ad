"""Read and write parity-check matrices in MacKay's alist text format.

Layout (1-based indices, zero-padded lists are allowed)::

    n m
    max_col_weight max_row_weight
    col_weight[0] ... col_weight[n-1]
    row_weight[0] ... row_weight[m-1]
    <n lines: row indices of each column>
    <m lines: column indices of each row>
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import FormatError


def to_alist(h: np.ndarray) -> str:
    h = np.asarray(h, dtype=np.uint8)
    m, n = h.shape
    col_w = h.sum(axis=0)
    row_w = h.sum(axis=1)
    lines = [f"{n} {m}", f"{int(col_w.max())} {int(row_w.max())}"]
    lines.append(" ".join(str(int(w)) for w in col_w))
    lines.append(" ".join(str(int(w)) for w in row_w))
    # an empty list is written as a single 0 so every line stays non-blank
    for j in range(n):
        lines.append(" ".join(str(int(i) + 1) for i in np.flatnonzero(h[:, j])) or "0")
    for i in range(m):
        lines.append(" ".join(str(int(j) + 1) for j in np.flatnonzero(h[i])) or "0")
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> np.ndarray:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    try:
        n, m = (int(v) for v in rows[0])
        col_w = [int(v) for v in rows[2]]
        row_w = [int(v) for v in rows[3]]
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed alist header: {exc}") from None
    if len(col_w) != n or len(row_w) != m or len(rows) < 4 + n + m:
        raise FormatError("alist weight lists do not match the declared size")
    h = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        idx = [int(v) for v in rows[4 + j] if int(v) > 0]
        if len(idx) != col_w[j]:
            raise FormatError(f"column {j + 1} lists {len(idx)} entries, weight says {col_w[j]}")
        h[np.array(idx, dtype=int) - 1, j] = 1
    for i in range(m):
        idx = [int(v) for v in rows[4 + n + i] if int(v) > 0]
        if len(idx) != row_w[i] or not np.array_equal(np.flatnonzero(h[i]) + 1, sorted(idx)):
            raise FormatError(f"row {i + 1} disagrees with the column lists")
    return h


def write_alist(h: np.ndarray, path) -> None:
    Path(path).write_text(to_alist(h))


def read_alist(path) -> np.ndarray:
    return from_alist(Path(path).read_text())
