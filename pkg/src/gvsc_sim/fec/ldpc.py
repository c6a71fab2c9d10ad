"""Multi-rate LDPC codes at block length 648 with normalized min-sum decoding.

Rates 1/2, 2/3 and 3/4 expand the IEEE 802.11n quasi-cyclic base matrices
(Z = 27). Rate 1/3 is an irregular repeat-accumulate code: every message bit
joins four checks, every check sees two message bits plus a dual-diagonal
accumulator, and the message-bit connections are placed by a seeded greedy fill
that rejects length-4 cycles.

Encoding is systematic via GF(2) elimination of ``H`` (pivots are searched from
the last column backwards, so parity lands at the end when the structure
allows). ``k = n - rank(H)`` so rank-deficient matrices are handled.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import ConfigurationError, FramingError

BLOCK_LENGTH = 648
LIFTING = 27
SUPPORTED_RATES = (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4))

# IEEE 802.11n, n = 648, Z = 27. -1 marks an all-zero block.
_BASE_1_2 = """
0 -1 -1 -1 0 0 -1 -1 0 -1 -1 0 1 0 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1
22 0 -1 -1 17 -1 0 0 12 -1 -1 -1 -1 0 0 -1 -1 -1 -1 -1 -1 -1 -1 -1
6 -1 0 -1 10 -1 -1 -1 24 -1 0 -1 -1 -1 0 0 -1 -1 -1 -1 -1 -1 -1 -1
2 -1 -1 0 20 -1 -1 -1 25 0 -1 -1 -1 -1 -1 0 0 -1 -1 -1 -1 -1 -1 -1
23 -1 -1 -1 3 -1 -1 -1 0 -1 9 11 -1 -1 -1 -1 0 0 -1 -1 -1 -1 -1 -1
24 -1 23 1 17 -1 3 -1 10 -1 -1 -1 -1 -1 -1 -1 -1 0 0 -1 -1 -1 -1 -1
25 -1 -1 -1 8 -1 -1 -1 7 18 -1 -1 0 -1 -1 -1 -1 -1 0 0 -1 -1 -1 -1
13 24 -1 -1 0 -1 8 -1 6 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 0 0 -1 -1 -1
7 20 -1 16 22 10 -1 -1 23 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 0 0 -1 -1
11 -1 -1 -1 19 -1 -1 -1 13 -1 3 17 -1 -1 -1 -1 -1 -1 -1 -1 -1 0 0 -1
25 -1 8 -1 23 18 -1 14 9 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 0 0
3 -1 -1 -1 16 -1 -1 2 25 5 -1 -1 1 -1 -1 -1 -1 -1 -1 -1 -1 -1 -1 0
"""

_BASE_2_3 = """
25 26 14 -1 20 -1 2 -1 4 -1 -1 8 -1 16 -1 18 1 0 -1 -1 -1 -1 -1 -1
10 9 15 11 -1 0 -1 1 -1 -1 18 -1 8 -1 10 -1 -1 0 0 -1 -1 -1 -1 -1
16 2 20 26 21 -1 6 -1 1 26 -1 7 -1 -1 -1 -1 -1 -1 0 0 -1 -1 -1 -1
10 13 5 0 -1 3 -1 7 -1 -1 26 -1 -1 13 -1 16 -1 -1 -1 0 0 -1 -1 -1
23 14 24 -1 12 -1 19 -1 17 -1 -1 -1 20 -1 21 -1 0 -1 -1 -1 0 0 -1 -1
6 22 9 20 -1 25 -1 17 -1 8 -1 14 -1 18 -1 -1 -1 -1 -1 -1 -1 0 0 -1
14 23 21 11 20 -1 24 -1 18 -1 19 -1 -1 -1 -1 22 -1 -1 -1 -1 -1 -1 0 0
17 11 11 20 -1 21 -1 26 -1 3 -1 -1 18 -1 26 -1 1 -1 -1 -1 -1 -1 -1 0
"""

_BASE_3_4 = """
16 17 22 24 9 3 14 -1 4 2 7 -1 26 -1 2 -1 21 -1 1 0 -1 -1 -1 -1
25 12 12 3 3 26 6 21 -1 15 22 -1 15 -1 4 -1 -1 16 -1 0 0 -1 -1 -1
25 18 26 16 22 23 9 -1 0 -1 4 -1 4 -1 8 23 11 -1 -1 -1 0 0 -1 -1
9 7 0 1 17 -1 -1 7 3 -1 3 23 -1 16 -1 -1 21 -1 0 -1 -1 0 0 -1
24 5 26 7 1 -1 -1 15 24 15 -1 8 -1 13 -1 13 -1 11 -1 -1 -1 -1 0 0
2 2 19 14 24 1 15 19 -1 21 -1 2 -1 24 -1 3 -1 2 1 -1 -1 -1 -1 0
"""

_BASES = {Fraction(1, 2): _BASE_1_2, Fraction(2, 3): _BASE_2_3, Fraction(3, 4): _BASE_3_4}

RA_SEED = 20240613
_PAD_MESSAGE = 1e30


def expand_base_matrix(base: np.ndarray, z: int) -> np.ndarray:
    """Lift a base matrix: entry ``s >= 0`` becomes the identity cyclically shifted by ``s``."""
    rows, cols = base.shape
    h = np.zeros((rows * z, cols * z), dtype=np.uint8)
    eye = np.arange(z)
    for i in range(rows):
        for j in range(cols):
            s = base[i, j]
            if s >= 0:
                h[i * z + eye, j * z + (eye + s) % z] = 1
    return h


def _parse_base(text: str) -> np.ndarray:
    return np.array([[int(v) for v in line.split()] for line in text.strip().splitlines()])


def repeat_accumulate_matrix(n: int = BLOCK_LENGTH, seed: int = RA_SEED, info_degree: int = 4) -> np.ndarray:
    """Rate-1/3 IRA parity-check matrix ``[H_u | H_p]`` without 4-cycles.

    ``H_p`` is the accumulator (ones on the diagonal and sub-diagonal). Each
    message column picks ``info_degree`` checks, greedily, among rows that
    still have free sockets, never two rows already shared with an earlier
    column and never two adjacent rows (those would close a 4-cycle through
    the accumulator).
    """
    k = n // 3
    m = n - k
    row_cap = k * info_degree // m
    if row_cap * m != k * info_degree:
        raise ConfigurationError("info degree does not divide evenly over the checks")
    for attempt in range(100):
        rng = np.random.Generator(np.random.Philox(key=seed + attempt))
        hu = np.zeros((m, k), dtype=np.uint8)
        load = np.zeros(m, dtype=np.int64)
        ok = True
        for j in range(k):
            chosen: list[int] = []
            # rows already linked to a row we pick through an earlier column
            banned = np.zeros(m, dtype=bool)
            for _ in range(info_degree):
                free = (load < row_cap) & ~banned
                for r in chosen:
                    free[max(r - 1, 0) : r + 2] = False
                cand = np.flatnonzero(free)
                if cand.size == 0:
                    ok = False
                    break
                # prefer the least loaded rows to keep the row degree regular
                cand = cand[load[cand] == load[cand].min()]
                r = int(rng.choice(cand))
                chosen.append(r)
                load[r] += 1
                hu[r, j] = 1
                partners = np.flatnonzero(hu[r, :j])
                if partners.size:
                    banned |= hu[:, partners].any(axis=1)
            if not ok:
                break
        if ok:
            hp = np.eye(m, dtype=np.uint8)
            hp[np.arange(1, m), np.arange(m - 1)] = 1
            return np.concatenate([hu, hp], axis=1)
    raise ConfigurationError("could not build a 4-cycle-free repeat-accumulate matrix")


def gf2_rank(h: np.ndarray) -> int:
    return len(_gf2_eliminate(h)[1])


def _gf2_eliminate(h: np.ndarray) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Reduced row echelon form over GF(2), pivots searched right to left.

    Returns the reduced matrix and a list of (row, pivot column).
    """
    r = np.array(h, dtype=np.uint8, copy=True)
    m, n = r.shape
    pivots = []
    row = 0
    for col in range(n - 1, -1, -1):
        if row == m:
            break
        hits = np.flatnonzero(r[row:, col]) + row
        if hits.size == 0:
            continue
        p = hits[0]
        if p != row:
            r[[row, p]] = r[[p, row]]
        others = np.flatnonzero(r[:, col])
        others = others[others != row]
        r[others] ^= r[row]
        pivots.append((row, col))
        row += 1
    return r, pivots


@dataclass(frozen=True, eq=False)
class LdpcCodeSpec:
    parity_matrix: np.ndarray
    rate: Fraction
    max_iterations: int = 50
    normalization: float = 0.75

    def __post_init__(self):
        h = np.asarray(self.parity_matrix, dtype=np.uint8)
        if h.ndim != 2 or not np.all(h <= 1):
            raise ConfigurationError("parity matrix must be a binary 2-D array")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        h = h.copy()
        h.flags.writeable = False
        object.__setattr__(self, "parity_matrix", h)
        object.__setattr__(self, "rate", Fraction(self.rate))
        m, n = h.shape

        reduced, pivots = _gf2_eliminate(h)
        pivot_cols = np.array(sorted(c for _, c in pivots), dtype=np.int64)
        info = np.setdiff1d(np.arange(n), pivot_cols)
        k = info.size
        if abs(float(self.rate) - k / n) > 0.01 * k / n:
            raise ConfigurationError(f"declared rate {self.rate} does not match k/n = {k}/{n}")
        order = np.argsort([c for _, c in pivots])
        pivot_rows = np.array([pivots[i][0] for i in order], dtype=np.int64)
        gen = reduced[pivot_rows][:, info].T.copy()  # (k, rank): parity = msg @ gen
        object.__setattr__(self, "_info", info)
        object.__setattr__(self, "_parity_pos", pivot_cols)
        object.__setattr__(self, "_generator", gen)

        # padded check-node layout; pad column index n points at a dummy variable
        row_deg = h.sum(axis=1)
        dr = int(row_deg.max())
        row_cols = np.full((m, dr), n, dtype=np.int64)
        for i in range(m):
            cols = np.flatnonzero(h[i])
            row_cols[i, : cols.size] = cols
        mask = row_cols < n
        flat = row_cols.reshape(-1)
        col_deg = h.sum(axis=0)
        dc = int(col_deg.max())
        # edge ids index the decoder's (dr, m) slot layout; pad -> appended zero slot
        col_edges = np.full((n, dc), m * dr, dtype=np.int64)
        fill = np.zeros(n, dtype=np.int64)
        for e in np.flatnonzero(mask.reshape(-1)):
            c = flat[e]
            col_edges[c, fill[c]] = (e % dr) * m + e // dr
            fill[c] += 1
        object.__setattr__(self, "_row_cols", row_cols)
        object.__setattr__(self, "_mask", mask)
        object.__setattr__(self, "_col_edges", col_edges)

    @property
    def n(self) -> int:
        return self.parity_matrix.shape[1]

    @property
    def m(self) -> int:
        return self.parity_matrix.shape[0]

    @property
    def k(self) -> int:
        return self._info.size

    @property
    def info_positions(self) -> np.ndarray:
        return self._info

    @property
    def edges(self) -> int:
        return int(self._mask.sum())

    def syndrome(self, codewords: np.ndarray) -> np.ndarray:
        c = np.atleast_2d(np.asarray(codewords, dtype=np.uint8))
        ext = np.concatenate([c, np.zeros((c.shape[0], 1), dtype=np.uint8)], axis=1)
        return (ext[:, self._row_cols].sum(axis=2) & 1).astype(np.uint8)


@lru_cache(maxsize=None)
def ldpc_code(rate, max_iterations: int = 50, normalization: float = 0.75) -> LdpcCodeSpec:
    """The adopted n = 648 code for one of the supported rates."""
    rate = Fraction(rate).limit_denominator(12)
    if rate not in SUPPORTED_RATES:
        raise ConfigurationError(f"unsupported LDPC rate {rate}")
    if rate == Fraction(1, 3):
        h = repeat_accumulate_matrix()
    else:
        h = expand_base_matrix(_parse_base(_BASES[rate]), LIFTING)
    return LdpcCodeSpec(h, rate, max_iterations, normalization)


def ldpc_encode(message, spec: LdpcCodeSpec) -> np.ndarray:
    msg = np.asarray(message, dtype=np.uint8)
    single = msg.ndim == 1
    msg = np.atleast_2d(msg)
    if msg.shape[1] != spec.k:
        raise ConfigurationError(f"message length {msg.shape[1]} != k = {spec.k}")
    out = np.zeros((msg.shape[0], spec.n), dtype=np.uint8)
    out[:, spec._info] = msg
    out[:, spec._parity_pos] = (msg.astype(np.int64) @ spec._generator) & 1
    return out[0] if single else out


def _check_update(v2c: np.ndarray, alpha: float) -> np.ndarray:
    """Min-sum check update on a (row_degree, checks, blocks) array.

    Padded slots carry a huge positive message, so they never win the minimum
    or flip the sign; their outputs are never read back.
    """
    mag = np.abs(v2c)
    neg = v2c < 0
    parity = np.logical_xor.reduce(neg, axis=0)
    min1 = mag.min(axis=0)
    at_min = mag == min1
    min2 = np.where(at_min, np.inf, mag).min(axis=0)
    # two slots tied at the minimum: each one's exclusive minimum is the other
    min2 = np.where(at_min.sum(axis=0) > 1, min1, min2)
    excl = np.where(at_min, min2, min1)
    return np.where(parity ^ neg, -alpha, alpha) * excl


def ldpc_decode(llrs, spec: LdpcCodeSpec, clip: float = 50.0):
    """Flooding normalized min-sum.

    Returns ``(message, converged, iterations_used)``. A block whose channel
    hard decisions already satisfy every check is returned untouched with zero
    iterations; otherwise decoding stops at the first iteration whose hard
    decisions satisfy ``H c = 0`` or after ``max_iterations``.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    llrs = np.clip(np.atleast_2d(llrs), -clip, clip)
    if llrs.shape[1] != spec.n:
        raise FramingError(f"expected {spec.n} LLRs per block, got {llrs.shape[1]}")
    bsz, n = llrs.shape
    # blocks run along the last axis so reductions sweep contiguous slabs
    row_cols = spec._row_cols.T  # (dr, m)
    col_edges = spec._col_edges.T  # (dc, n)
    dr, m = row_cols.shape

    hard = (llrs < 0).astype(np.uint8)
    converged = ~spec.syndrome(hard).any(axis=1)
    used = np.zeros(bsz, dtype=np.int64)
    active = np.flatnonzero(~converged)
    lch = llrs[active].T.copy()  # (n, B)
    c2v = np.zeros((dr, m, active.size))
    total = lch.copy()
    for it in range(1, spec.max_iterations + 1):
        if active.size == 0:
            break
        ext = np.concatenate([total, np.full((1, active.size), _PAD_MESSAGE)], axis=0)
        v2c = ext[row_cols] - c2v
        c2v = _check_update(v2c, spec.normalization)
        flat = np.concatenate([c2v.reshape(dr * m, -1), np.zeros((1, active.size))], axis=0)
        total = lch + flat[col_edges].sum(axis=0)
        h_act = (total.T < 0).astype(np.uint8)
        hard[active] = h_act
        used[active] = it
        ok = ~spec.syndrome(h_act).any(axis=1)
        converged[active[ok]] = True
        keep = ~ok
        active = active[keep]
        lch, c2v, total = lch[:, keep], c2v[:, :, keep], total[:, keep]
    message = hard[:, spec._info]
    if single:
        return message[0], bool(converged[0]), int(used[0])
    return message, converged, used
