"""Rate-1/3 parallel-concatenated turbo code with max-log-MAP decoding.

Two identical 8-state RSC encoders with octal generators (13, 15): feedback
``1 + D^2 + D^3``, feedforward ``1 + D + D^3``. Both are trellis-terminated
with ``memory`` tail steps. The codeword layout is::

    systematic[L] | parity1[L] | parity2[L] | x1_tail[m] | p1_tail[m] | x2_tail[m] | p2_tail[m]

so ``len = 3L + 4m``.

The interleaver is a quadratic permutation polynomial
``pi(i) = (f1*i + f2*i^2) mod L``; encoder 2 sees ``message[pi]``.

Everything operates on batches: ``(blocks, n)`` arrays are decoded together,
with the time recursion looping in Python and the block/state axes vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from ..errors import ConfigurationError, FramingError

NEG_INF = -np.inf

# (f1, f2) pairs from the 3GPP LTE QPP table for block sizes used here.
_QPP_TABLE = {40: (3, 10), 1024: (31, 64), 6144: (263, 480)}


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def qpp_coefficients(length: int) -> tuple[int, int]:
    """QPP coefficients for ``length``.

    Table sizes use the LTE values. Other sizes use the smallest ``f1 >=
    sqrt(L)`` coprime to ``L`` and ``f2`` = the radical of ``L`` scaled to the
    nearest multiple of ``sqrt(L)``, which satisfies the permutation criterion
    (``gcd(f1, L) = 1`` and every prime of ``L`` divides ``f2``).
    """
    if length < 1:
        raise ConfigurationError("interleaver length must be >= 1")
    if length in _QPP_TABLE:
        return _QPP_TABLE[length]
    if length == 1:
        return 1, 0
    rad = math.prod(_prime_factors(length))
    f2 = rad * max(1, round(math.sqrt(length) / rad))
    f1 = max(1, math.isqrt(length))
    while math.gcd(f1, length) != 1:
        f1 += 1
    return f1, f2 % length


def qpp_interleaver(length: int) -> np.ndarray:
    f1, f2 = qpp_coefficients(length)
    i = np.arange(length, dtype=np.int64)
    perm = (f1 * i + f2 * ((i * i) % length)) % length
    if not np.array_equal(np.sort(perm), i):
        raise ConfigurationError(f"QPP ({f1}, {f2}) is not a permutation of length {length}")
    return perm


def _taps(octal: int, memory: int) -> list[int]:
    bits = bin(octal)[2:].zfill(memory + 1)
    if len(bits) != memory + 1:
        raise ConfigurationError(f"generator {oct(octal)} does not fit memory {memory}")
    return [int(b) for b in bits]  # index i is the D^i coefficient


@dataclass(frozen=True, eq=False)
class Trellis:
    """State tables of a recursive systematic convolutional encoder.

    State bit ``i`` (MSB first) holds ``a_{k-1-i}``, the feedback register.
    """

    memory: int
    next_state: np.ndarray  # (S, 2)
    parity: np.ndarray  # (S, 2)
    prev_state: np.ndarray  # (S, 2) the two (state, input) pairs entering each state
    prev_input: np.ndarray
    tail_input: np.ndarray  # (S,) input that zeroes the feedback

    @property
    def n_states(self) -> int:
        return self.next_state.shape[0]


@lru_cache(maxsize=None)
def rsc_trellis(feedback: int = 0o13, feedforward: int = 0o15, memory: int = 3) -> Trellis:
    g0 = _taps(feedback, memory)
    g1 = _taps(feedforward, memory)
    if g0[0] != 1:
        raise ConfigurationError("feedback polynomial must have a D^0 term")
    n_states = 1 << memory
    nxt = np.zeros((n_states, 2), dtype=np.int64)
    par = np.zeros((n_states, 2), dtype=np.int64)
    tail = np.zeros(n_states, dtype=np.int64)
    for s in range(n_states):
        regs = [(s >> (memory - 1 - i)) & 1 for i in range(memory)]  # a_{k-1} .. a_{k-m}
        fb = 0
        for i in range(1, memory + 1):
            fb ^= g0[i] & regs[i - 1]
        tail[s] = fb
        for u in (0, 1):
            a = u ^ fb
            p = g1[0] & a
            for i in range(1, memory + 1):
                p ^= g1[i] & regs[i - 1]
            nxt[s, u] = (a << (memory - 1)) | (s >> 1)
            par[s, u] = p
    prev_s = np.zeros((n_states, 2), dtype=np.int64)
    prev_u = np.zeros((n_states, 2), dtype=np.int64)
    fill = np.zeros(n_states, dtype=np.int64)
    for s in range(n_states):
        for u in (0, 1):
            t = nxt[s, u]
            prev_s[t, fill[t]] = s
            prev_u[t, fill[t]] = u
            fill[t] += 1
    if not np.all(fill == 2):
        raise ConfigurationError("generator pair does not define a valid RSC trellis")
    for arr in (nxt, par, prev_s, prev_u, tail):
        arr.flags.writeable = False
    return Trellis(memory, nxt, par, prev_s, prev_u, tail)


@dataclass(frozen=True, eq=False)
class TurboCodeSpec:
    length: int
    feedback: int = 0o13
    feedforward: int = 0o15
    memory: int = 3
    decode_iterations: int = 8
    algorithm: str = "maxlog"  # or "exact" (log-MAP), used as a test oracle
    extrinsic_scale: float = 1.0
    interleaver: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.length < 1:
            raise ConfigurationError("turbo block length must be >= 1")
        if self.decode_iterations < 1:
            raise ConfigurationError("decode_iterations must be >= 1")
        if self.algorithm not in ("maxlog", "exact"):
            raise ConfigurationError(f"unknown turbo algorithm {self.algorithm!r}")
        perm = qpp_interleaver(self.length) if self.interleaver is None else np.asarray(self.interleaver, dtype=np.int64)
        if perm.shape != (self.length,) or not np.array_equal(np.sort(perm), np.arange(self.length)):
            raise ConfigurationError("interleaver must be a permutation of range(length)")
        perm = perm.copy()
        perm.flags.writeable = False
        object.__setattr__(self, "interleaver", perm)
        deint = np.empty_like(perm)
        deint[perm] = np.arange(self.length)
        deint.flags.writeable = False
        object.__setattr__(self, "_deinterleaver", deint)
        object.__setattr__(self, "_trellis", rsc_trellis(self.feedback, self.feedforward, self.memory))

    @property
    def trellis(self) -> Trellis:
        return self._trellis

    @property
    def deinterleaver(self) -> np.ndarray:
        return self._deinterleaver

    @property
    def tail_bits(self) -> int:
        return 4 * self.memory

    @property
    def codeword_length(self) -> int:
        return 3 * self.length + self.tail_bits

    @property
    def rate(self) -> float:
        return self.length / self.codeword_length


def _rsc_encode(bits: np.ndarray, trellis: Trellis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (parity, x_tail, p_tail) for a (B, L) batch, trellis terminated."""
    b, n = bits.shape
    state = np.zeros(b, dtype=np.int64)
    parity = np.empty((b, n), dtype=np.uint8)
    for t in range(n):
        u = bits[:, t]
        parity[:, t] = trellis.parity[state, u]
        state = trellis.next_state[state, u]
    m = trellis.memory
    x_tail = np.empty((b, m), dtype=np.uint8)
    p_tail = np.empty((b, m), dtype=np.uint8)
    for t in range(m):
        u = trellis.tail_input[state]
        x_tail[:, t] = u
        p_tail[:, t] = trellis.parity[state, u]
        state = trellis.next_state[state, u]
    assert not state.any()
    return parity, x_tail, p_tail


def turbo_encode(message, spec: TurboCodeSpec) -> np.ndarray:
    msg = np.asarray(message, dtype=np.uint8)
    single = msg.ndim == 1
    msg = np.atleast_2d(msg)
    if msg.shape[1] != spec.length:
        raise ConfigurationError(f"message length {msg.shape[1]} != interleaver length {spec.length}")
    p1, x1t, p1t = _rsc_encode(msg, spec.trellis)
    p2, x2t, p2t = _rsc_encode(msg[:, spec.interleaver], spec.trellis)
    out = np.concatenate([msg, p1, p2, x1t, p1t, x2t, p2t], axis=1)
    return out[0] if single else out


def split_codeword(llrs: np.ndarray, spec: TurboCodeSpec) -> dict[str, np.ndarray]:
    n, m = spec.length, spec.memory
    parts = {}
    edges = [("sys", n), ("p1", n), ("p2", n), ("x1t", m), ("p1t", m), ("x2t", m), ("p2t", m)]
    pos = 0
    for name, size in edges:
        parts[name] = llrs[:, pos : pos + size]
        pos += size
    return parts


def siso_decode(
    sys_llr: np.ndarray,
    par_llr: np.ndarray,
    apriori: np.ndarray,
    trellis: Trellis,
    algorithm: str = "maxlog",
) -> np.ndarray:
    """A-posteriori LLRs of the message bits of one terminated RSC code.

    ``sys_llr`` and ``par_llr`` cover the ``L + m`` trellis steps including the
    tail; ``apriori`` covers the ``L`` message steps. Shapes are (B, steps).
    """
    exact = algorithm == "exact"
    bsz, steps = sys_llr.shape
    n = apriori.shape[1]
    n_states = trellis.n_states
    la = np.zeros((bsz, steps))
    la[:, :n] = apriori
    lx = 0.5 * (sys_llr + la)
    lp = 0.5 * par_llr
    u_sign = np.array([1.0, -1.0])
    p_sign = 1.0 - 2.0 * trellis.parity  # (S, 2)
    prev_s, prev_u = trellis.prev_state, trellis.prev_input
    nxt = trellis.next_state

    def branch(t):
        return lx[:, t, None, None] * u_sign + lp[:, t, None, None] * p_sign  # (B, S, 2)

    alpha = np.empty((steps + 1, bsz, n_states))
    alpha[0] = NEG_INF
    alpha[0, :, 0] = 0.0
    for t in range(steps):
        cand = (alpha[t][:, :, None] + branch(t))[:, prev_s, prev_u]  # (B, S, 2)
        a = np.logaddexp(cand[..., 0], cand[..., 1]) if exact else cand.max(axis=-1)
        alpha[t + 1] = a - a.max(axis=1, keepdims=True)

    out = np.empty((bsz, n))
    beta = np.full((bsz, n_states), NEG_INF)
    beta[:, 0] = 0.0
    for t in range(steps - 1, -1, -1):
        metric = branch(t) + beta[:, nxt]  # (B, S, 2)
        if t < n:
            joint = alpha[t][:, :, None] + metric
            if exact:
                out[:, t] = logsumexp(joint[:, :, 0], axis=1) - logsumexp(joint[:, :, 1], axis=1)
            else:
                out[:, t] = joint[:, :, 0].max(axis=1) - joint[:, :, 1].max(axis=1)
        b = np.logaddexp(metric[..., 0], metric[..., 1]) if exact else metric.max(axis=-1)
        beta = b - b.max(axis=1, keepdims=True)
    return out


def turbo_decode(llrs, spec: TurboCodeSpec, clip: float = 50.0):
    """Iterative decoding with early exit.

    Stops a block as soon as the hard decisions of both constituent decoders
    agree at the end of a full iteration. Returns ``(message, iterations_used)``;
    for a ``(B, n)`` input both are batched.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    llrs = np.atleast_2d(llrs)
    if llrs.shape[1] != spec.codeword_length:
        raise FramingError(f"expected {spec.codeword_length} LLRs per block, got {llrs.shape[1]}")
    llrs = np.clip(llrs, -clip, clip)
    parts = split_codeword(llrs, spec)
    sys1 = np.concatenate([parts["sys"], parts["x1t"]], axis=1)
    par1 = np.concatenate([parts["p1"], parts["p1t"]], axis=1)
    sys2 = np.concatenate([parts["sys"][:, spec.interleaver], parts["x2t"]], axis=1)
    par2 = np.concatenate([parts["p2"], parts["p2t"]], axis=1)
    n = spec.length
    perm, deint = spec.interleaver, spec.deinterleaver
    trellis, algo, scale = spec.trellis, spec.algorithm, spec.extrinsic_scale

    bsz = llrs.shape[0]
    decided = np.zeros((bsz, n), dtype=np.uint8)
    used = np.full(bsz, spec.decode_iterations, dtype=np.int64)
    active = np.arange(bsz)
    la1 = np.zeros((bsz, n))
    for it in range(1, spec.decode_iterations + 1):
        s1, p1, s2, p2 = sys1[active], par1[active], sys2[active], par2[active]
        a1 = la1[active]
        app1 = siso_decode(s1, p1, a1, trellis, algo)
        ext1 = scale * (app1 - s1[:, :n] - a1)
        la2 = ext1[:, perm]
        app2 = siso_decode(s2, p2, la2, trellis, algo)
        ext2 = scale * (app2 - s2[:, :n] - la2)
        la1[active] = ext2[:, deint]
        hard1 = (app1 < 0).astype(np.uint8)
        hard2 = (app2[:, deint] < 0).astype(np.uint8)
        decided[active] = hard2
        done = np.all(hard1 == hard2, axis=1)
        used[active[done]] = it
        active = active[~done]
        if active.size == 0:
            break
    if single:
        return decided[0], int(used[0])
    return decided, used
