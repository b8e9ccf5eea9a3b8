"""Annealed Importance Sampling over an annealing path.

States are node indices of the path's support, so every path density is
evaluated exactly at the sampled states and the initial draw is an exact
categorical sample with probabilities proportional to weight * value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .density import Density, GridSupport
from .paths import AnnealingPath

DEFAULT_BLOCK = 4096


class DegenerateWeightsError(ArithmeticError):
    """Every importance weight is zero."""


@dataclass(frozen=True)
class Schedule:
    """Strictly increasing betas from 0 to 1."""

    betas: tuple

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("a schedule needs at least two betas")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError("a schedule must start at 0 and end at 1")
        if np.any(np.diff(b) <= 0):
            raise ValueError("schedule betas must be strictly increasing")
        object.__setattr__(self, "betas", tuple(float(v) for v in b))

    @classmethod
    def linear(cls, T: int) -> "Schedule":
        if int(T) != T or T < 1:
            raise ValueError("T must be a positive integer")
        return cls(tuple(np.linspace(0.0, 1.0, int(T) + 1)))

    @property
    def T(self) -> int:
        return len(self.betas) - 1


@dataclass(frozen=True)
class RandomWalkMH:
    """Symmetric random-walk Metropolis kernel.

    On a grid the proposal is a Gaussian increment of scale ``step`` in x,
    snapped to the nearest node (proposals off the grid are rejected).  On a
    discrete support it moves to a uniformly chosen cyclic neighbour.
    """

    step: float = 1.0
    sweeps: int = 1

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if int(self.sweeps) != self.sweeps or self.sweeps < 1:
            raise ValueError("sweeps must be a positive integer")


@dataclass(frozen=True)
class ExactResample:
    """Independent exact draw from the current target (perfect mixing)."""


Kernel = Union[RandomWalkMH, ExactResample]


@dataclass(frozen=True)
class AisConfig:
    path: AnnealingPath
    schedule: Schedule
    kernel: Kernel = field(default_factory=ExactResample)
    chains: int = 1000
    seed: int = 0
    block_size: int = DEFAULT_BLOCK
    record_trace: bool = False

    def __post_init__(self):
        if int(self.chains) != self.chains or self.chains < 1:
            raise ValueError("chains must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")


@dataclass(frozen=True)
class AisResult:
    log_weights: np.ndarray = field(repr=False)
    ratio_estimate: float
    log_ratio_estimate: float
    ess: float
    acceptance_rates: np.ndarray
    chains: int
    T: int
    seed: int
    trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def stderr(self) -> float:
        """Sample standard error of the mean of the weights."""
        w = np.exp(self.log_weights - self.log_ratio_estimate)
        return float(self.ratio_estimate * np.std(w, ddof=1) / math.sqrt(w.size)) if w.size > 1 else math.nan

    def to_dict(self) -> dict:
        return {
            "ratio_estimate": self.ratio_estimate,
            "log_ratio_estimate": self.log_ratio_estimate,
            "ess": self.ess,
            "K": self.chains,
            "T": self.T,
            "acceptance_rates": [float(a) for a in self.acceptance_rates],
            "seed": self.seed,
        }


def log_sum_exp_mean(log_weights) -> float:
    """log of the mean of exp(log_weights), stabilized by the maximum."""
    lw = np.asarray(log_weights, dtype=float)
    if lw.size == 0:
        raise ValueError("log_sum_exp_mean needs at least one value")
    return float(logsumexp(lw) - math.log(lw.size))


def effective_sample_size(log_weights) -> float:
    lw = np.asarray(log_weights, dtype=float)
    return float(math.exp(2.0 * logsumexp(lw) - logsumexp(2.0 * lw)))


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for a block of chains."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _categorical(log_values: np.ndarray, log_nodeweights: np.ndarray, size: int, rng) -> np.ndarray:
    lm = log_values + log_nodeweights
    p = np.exp(lm - np.max(lm))
    cdf = np.cumsum(p)
    u = rng.random(size) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def sample_density(d: Density, size: int, rng: np.random.Generator) -> np.ndarray:
    """Node indices drawn with probability proportional to weight * value."""
    with np.errstate(divide="ignore"):
        return _categorical(np.log(d.values), np.log(d.weights), size, rng)


def _propose(support, x: np.ndarray, step: float, rng) -> tuple[np.ndarray, np.ndarray]:
    n = int(support.n)
    if isinstance(support, GridSupport):
        jump = np.rint(step * rng.standard_normal(x.size) / support.h).astype(np.int64)
        prop = x + jump
        inside = (prop >= 0) & (prop < n)
        return np.where(inside, prop, x), inside
    direction = np.where(rng.random(x.size) < 0.5, -1, 1)
    return (x + direction) % n, np.ones(x.size, dtype=bool)


def _mh_sweep(support, log_target: np.ndarray, x: np.ndarray, step: float, rng) -> tuple[np.ndarray, int]:
    prop, inside = _propose(support, x, step, rng)
    log_ratio = log_target[prop] - log_target[x]
    u = rng.random(x.size)
    with np.errstate(invalid="ignore"):
        accept = inside & (np.log(u) < log_ratio)
    return np.where(accept, prop, x), int(np.count_nonzero(accept))


def mh_kernel_step(target: Density, x, step: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One Metropolis update of each state in ``x`` (node indices) for ``target``.

    Returns the new states and a mask of accepted moves.  The acceptance
    probability is min(1, p(x') w(x') / (p(x) w(x))), where w are the node
    weights, so the chain targets the discretized normalized density.
    """
    x = np.asarray(x, dtype=np.int64)
    with np.errstate(divide="ignore"):
        lt = np.log(target.values) + np.log(target.weights)
    if np.any(~np.isfinite(lt[x])):
        raise ValueError("target density is zero at a current state")
    new, _ = _mh_sweep(target.support, lt, x, step, rng)
    return new, new != x


def _run_block(path: AnnealingPath, log_path: list[np.ndarray], log_nw: np.ndarray, kernel: Kernel,
               size: int, rng, record: bool):
    T = len(log_path) - 1
    x = _categorical(log_path[0], log_nw, size, rng)
    lw = np.zeros(size)
    accepted = np.zeros(T, dtype=np.int64)
    proposals = np.zeros(T, dtype=np.int64)
    trace = np.empty((size, T)) if record else None
    for t in range(1, T + 1):
        if t > 1:
            # move with a kernel that leaves the beta_{t-1} density invariant
            if isinstance(kernel, ExactResample):
                x = _categorical(log_path[t - 1], log_nw, size, rng)
            else:
                target = log_path[t - 1] + log_nw
                for _ in range(int(kernel.sweeps)):
                    x, acc = _mh_sweep(path.p0.support, target, x, kernel.step, rng)
                    accepted[t - 1] += acc
                    proposals[t - 1] += size
        lw = lw + (log_path[t][x] - log_path[t - 1][x])
        if record:
            trace[:, t - 1] = lw
    return lw, accepted, proposals, trace


def run_ais(cfg: AisConfig, workers: int = 1) -> AisResult:
    """Annealed importance sampling estimate of Z(1)/Z(0) along ``cfg.path``.

    Chains are split into fixed-size blocks, each with its own counter-based
    random stream, so the result does not depend on ``workers``.  The first
    step uses the exact initial draw directly, so its acceptance rate is
    reported as 1.
    """
    betas = cfg.schedule.betas
    log_path = [cfg.path.log_values(b) for b in betas]
    with np.errstate(divide="ignore"):
        log_nw = np.log(cfg.path.p0.weights)
    K = int(cfg.chains)
    sizes = [min(cfg.block_size, K - s) for s in range(0, K, cfg.block_size)]

    def job(b):
        return _run_block(cfg.path, log_path, log_nw, cfg.kernel, sizes[b], block_rng(cfg.seed, b),
                          cfg.record_trace)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]

    lw = np.concatenate([p[0] for p in parts])
    accepted = np.sum([p[1] for p in parts], axis=0)
    proposals = np.sum([p[2] for p in parts], axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = np.where(proposals > 0, accepted / np.maximum(proposals, 1), 1.0)
    if not np.any(np.isfinite(lw)):
        raise DegenerateWeightsError("all importance weights are zero")
    log_ratio = log_sum_exp_mean(lw)
    trace = np.concatenate([p[3] for p in parts]) if cfg.record_trace else None
    return AisResult(lw, float(math.exp(log_ratio)), log_ratio, effective_sample_size(lw), rates, K,
                     cfg.schedule.T, int(cfg.seed), trace)
