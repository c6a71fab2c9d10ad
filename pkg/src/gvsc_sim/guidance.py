"""Guidance fusion and a deterministic sampling loop over a pluggable denoiser.

The solver is a first-order Euler step on a variance-exploding noise schedule::

    z_next = z + (sigma_next - sigma_cur) * eps

so it is the identity whenever the predictor returns zero. Sigmas follow the
Karras spacing from ``sigma_max`` down to ``sigma_min`` followed by a final 0.
The initial latent is ``sigma_max * N(0, I)`` drawn from the seed with the
package's counter-based generator, so a run is a pure function of its inputs.
"""

from __future__ import annotations

import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .channel import standard_normal
from .corefmt import read_gvt, write_gvt
from .errors import ConfigurationError, ContractError, DomainError, ShapeError

DEFAULT_SEED = 7777
DEFAULT_STEPS = 50


def as_latent(x) -> np.ndarray:
    z = np.asarray(x, dtype=np.float64)
    if z.ndim == 0 or 0 in z.shape:
        raise ShapeError(f"latent must have positive dimensions, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise DomainError("latent contains non-finite values")
    return z


@dataclass(frozen=True)
class Conditioning:
    visual: np.ndarray | None = None
    text: np.ndarray | None = None

    def __post_init__(self):
        if self.visual is None and self.text is None:
            raise ConfigurationError("conditioning needs a visual or a text embedding")


@dataclass(frozen=True)
class GuidanceParams:
    omega: float = 1.0
    steps: int = DEFAULT_STEPS
    seed: int = DEFAULT_SEED
    sigma_min: float = 0.002
    sigma_max: float = 80.0
    rho: float = 7.0

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError("steps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must fit in 64 bits")
        if not 0 < self.sigma_min < self.sigma_max:
            raise ConfigurationError("need 0 < sigma_min < sigma_max")


class EpsilonPredictor(Protocol):
    def __call__(self, z_t: np.ndarray, cond: np.ndarray, t: int) -> np.ndarray: ...


def guided_epsilon(eps_v, eps_t, omega: float) -> np.ndarray:
    """``eps_v + omega * (eps_t - eps_v)``, evaluated in the convex form so
    that omega 0 and 1 return the inputs bit for bit."""
    eps_v = np.asarray(eps_v, dtype=np.float64)
    eps_t = np.asarray(eps_t, dtype=np.float64)
    if eps_v.shape != eps_t.shape:
        raise ShapeError(f"epsilon shapes differ: {eps_v.shape} vs {eps_t.shape}")
    return (1.0 - omega) * eps_v + omega * eps_t


def _predict(predictor, z, cond, t) -> np.ndarray:
    out = np.asarray(predictor(z, cond, t), dtype=np.float64)
    if out.shape != z.shape:
        raise ContractError(f"predictor returned shape {out.shape} for latent {z.shape}")
    if not np.all(np.isfinite(out)):
        raise ContractError("predictor returned non-finite values")
    return out


def text_only_epsilon(predictor, z_t, c_text, t: int) -> np.ndarray:
    return _predict(predictor, as_latent(z_t), c_text, t)


def sigma_schedule(params: GuidanceParams) -> np.ndarray:
    """``steps + 1`` noise levels, decreasing, ending in 0."""
    n = params.steps
    ramp = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    lo, hi = params.sigma_min ** (1 / params.rho), params.sigma_max ** (1 / params.rho)
    sigmas = (hi + ramp * (lo - hi)) ** params.rho
    return np.append(sigmas, 0.0)


def initial_latent(shape, params: GuidanceParams) -> np.ndarray:
    return params.sigma_max * standard_normal(params.seed, tuple(shape))


def sample(predictor, conditioning: Conditioning, params: GuidanceParams, shape, workers: int = 1) -> np.ndarray:
    """Run the guided sampler from seeded noise of ``shape``.

    With both embeddings the two predictor branches are fused by
    :func:`guided_epsilon`; with only one, that branch is used as is. With
    ``workers > 1`` the two branches are evaluated concurrently; the fusion
    order is fixed, so the output does not depend on ``workers``.
    """
    z = initial_latent(shape, params)
    sigmas = sigma_schedule(params)
    branches = [c for c in (conditioning.visual, conditioning.text) if c is not None]
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 and len(branches) > 1 else None
    try:
        for t in range(params.steps):
            if pool is None:
                eps = [_predict(predictor, z, c, t) for c in branches]
            else:
                futures = [pool.submit(_predict, predictor, z, c, t) for c in branches]
                eps = [f.result() for f in futures]
            e = guided_epsilon(eps[0], eps[1], params.omega) if len(eps) == 2 else eps[0]
            z = z + (sigmas[t + 1] - sigmas[t]) * e
    finally:
        if pool is not None:
            pool.shutdown()
    return z


class ExternalPredictor:
    """Predictor backed by an external program exchanging GVT files.

    Each call writes ``latent.gvt`` and ``cond.gvt`` (flattened to
    1 x 1 x N x 1) into ``workdir``, runs ``command <workdir> <t>`` and reads
    ``eps.gvt`` back, reshaped to the latent's shape.
    """

    def __init__(self, command, workdir):
        self.command = tuple(command)
        self.workdir = Path(workdir)

    def __call__(self, z_t, cond, t):
        self.workdir.mkdir(parents=True, exist_ok=True)
        write_gvt(np.asarray(z_t, dtype=np.float32).reshape(1, 1, -1, 1), self.workdir / "latent.gvt")
        write_gvt(np.asarray(cond, dtype=np.float32).reshape(1, 1, -1, 1), self.workdir / "cond.gvt")
        proc = subprocess.run([*self.command, str(self.workdir), str(t)], capture_output=True, text=True)
        if proc.returncode:
            raise ContractError(f"external predictor failed: {proc.stderr.strip()}")
        eps = read_gvt(self.workdir / "eps.gvt")
        if eps.size != np.size(z_t):
            raise ContractError(f"external predictor returned {eps.size} values for {np.size(z_t)}")
        return eps.reshape(np.shape(z_t))
