"""Independent reference implementations used as test oracles.

Written for clarity, not speed, and deliberately sharing no code with the
package under test.
"""

import math
from fractions import Fraction

import numpy as np
from scipy.stats import norm

# --- modulation --------------------------------------------------------------

# per-axis (label bits -> level) written out by hand from the documented rule:
# first bit is the sign, the rest Gray-coded magnitude counted outward
PAM_LEVELS = {
    1: {(0,): 1, (1,): -1},
    2: {(0, 0): 1, (0, 1): 3, (1, 0): -1, (1, 1): -3},
}


def qam_point(bits):
    m = len(bits)
    half = m // 2
    table = PAM_LEVELS[half]
    scale = math.sqrt(2.0) if m == 2 else math.sqrt(10.0)
    return complex(table[tuple(bits[:half])], table[tuple(bits[half:])]) / scale


def all_labels(m):
    return [tuple((i >> (m - 1 - j)) & 1 for j in range(m)) for i in range(2**m)]


def exact_llrs(y, sigma2, m):
    """Brute-force enumeration of log P(b=0|y)/P(b=1|y) for each label bit."""
    out = []
    for i in range(m):
        num = den = 0.0
        for lab in all_labels(m):
            p = math.exp(-abs(y - qam_point(lab)) ** 2 / sigma2)
            if lab[i] == 0:
                num += p
            else:
                den += p
        out.append(math.log(num) - math.log(den))
    return out


def uncoded_ber_oracle(m, snr_db):
    """Closed-form Gray square-QAM BER from per-axis decision regions (scipy.stats)."""
    sigma = math.sqrt(10 ** (-snr_db / 10) / 2)
    half = m // 2
    table = PAM_LEVELS[half]
    scale = math.sqrt(2.0) if m == 2 else math.sqrt(10.0)
    items = sorted((lvl / scale, lab) for lab, lvl in table.items())
    levels = [lv for lv, _ in items]
    edges = [-math.inf] + [(a + b) / 2 for a, b in zip(levels, levels[1:])] + [math.inf]
    errors = 0.0
    for lv, lab in items:
        for j, (_, lab_j) in enumerate(items):
            p = norm.cdf((edges[j + 1] - lv) / sigma) - norm.cdf((edges[j] - lv) / sigma)
            errors += p * sum(a != b for a, b in zip(lab, lab_j))
    return errors / (len(items) * half)


# --- turbo -------------------------------------------------------------------


def rsc_encode_naive(bits, feedback=0o13, feedforward=0o15, memory=3):
    """Shift-register RSC encoder with termination; returns (parity, tail_sys, tail_par)."""
    fb = [(feedback >> (memory - i)) & 1 for i in range(memory + 1)]
    ff = [(feedforward >> (memory - i)) & 1 for i in range(memory + 1)]
    reg = [0] * memory  # reg[0] is the most recent
    parity = []

    def step(u):
        w = u
        for i in range(memory):
            w ^= fb[i + 1] & reg[i]
        p = ff[0] & w
        for i in range(memory):
            p ^= ff[i + 1] & reg[i]
        reg.insert(0, w)
        reg.pop()
        return p

    for u in bits:
        parity.append(step(int(u)))
    tail_sys, tail_par = [], []
    for _ in range(memory):
        # input that drives the feedback sum to zero
        u = 0
        for i in range(memory):
            u ^= fb[i + 1] & reg[i]
        tail_sys.append(u)
        tail_par.append(step(u))
    assert reg == [0] * memory
    return parity, tail_sys, tail_par


def qpp_naive(length, f1, f2):
    return [(f1 * i + f2 * i * i) % length for i in range(length)]


# --- transforms --------------------------------------------------------------


def dct_matrix(n):
    c = np.zeros((n, n))
    for k in range(n):
        a = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        for i in range(n):
            c[k, i] = a * math.cos(math.pi * (2 * i + 1) * k / (2 * n))
    return c


def linear_projection(image, n_symbols):
    """Orthogonal projection of an H x W x C image onto its lowest 2*n DCT coefficients."""
    h, w, c = image.shape
    ch, cw = dct_matrix(h), dct_matrix(w)
    coefs = np.stack([ch @ image[:, :, k] @ cw.T for k in range(c)], axis=-1)
    keys = sorted((u + v, u, k, u, v) for u in range(h) for v in range(w) for k in range(c))
    keep = np.zeros_like(coefs)
    for _, _, k, u, v in keys[: 2 * n_symbols]:
        keep[u, v, k] = coefs[u, v, k]
    return np.stack([ch.T @ keep[:, :, k] @ cw for k in range(c)], axis=-1)


# --- metrics -----------------------------------------------------------------


def mse_naive(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    flat_a, flat_b = a.reshape(a.shape[0], -1), b.reshape(b.shape[0], -1)
    total = 0.0
    for i in range(flat_a.shape[0]):
        for j in range(flat_a.shape[1]):
            d = flat_a[i, j] - flat_b[i, j]
            total += d * d
    return total / a.size


def ssim_naive(x, y, peak=1.0, size=11, sigma=1.5):
    """Direct windowed SSIM of two 2-D images, mean over fully contained windows."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r = size // 2
    win = np.array(
        [[math.exp(-((i - r) ** 2 + (j - r) ** 2) / (2 * sigma**2)) for j in range(size)] for i in range(size)]
    )
    win /= win.sum()
    c1, c2 = (0.01 * peak) ** 2, (0.03 * peak) ** 2
    vals = []
    for i in range(x.shape[0] - size + 1):
        for j in range(x.shape[1] - size + 1):
            px, py = x[i : i + size, j : j + size], y[i : i + size, j : j + size]
            mx, my = (win * px).sum(), (win * py).sum()
            vx = (win * (px - mx) ** 2).sum()
            vy = (win * (py - my) ** 2).sum()
            cxy = (win * (px - mx) * (py - my)).sum()
            vals.append(((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx**2 + my**2 + c1) * (vx + vy + c2)))
    return float(np.mean(vals))


# --- budget ------------------------------------------------------------------


def budget_chain():
    """Exact rational version of the description/sketch budget arithmetic."""
    tokens = Fraction("95.63")
    n_d = tokens * 8
    k_d = n_d / (2 * Fraction(1, 3))
    k_sketch = k_d + 32 * 32 * 2 // 2
    denom = 3 * 256 * 256 * 8
    return {
        "n_d": n_d,
        "k_d": k_d,
        "k_sketch": k_sketch,
        "cbr_desc": k_d / denom,
        "cbr_sketch": k_sketch / denom,
        "cbr_first_frame": (k_d + 3728) / denom,
    }


# --- seeds -------------------------------------------------------------------

# first output of the reference SplitMix64 generator seeded with 0
SPLITMIX64_FIRST = 0xE220A8397B1DCDAF
