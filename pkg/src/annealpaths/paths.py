"""Quasi-arithmetic means of densities and two-endpoint annealing paths."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .deformed_math import EPS_Q, DomainError, RangeError, RepresentationFn
from .density import Density, DensityError, integral, normalize

UNNORMALIZED = "unnormalized"
NORMALIZE_OUTPUT = "normalize_output"


def check_weights(weights: Sequence[float], n: int | None = None) -> np.ndarray:
    """Validate mixing weights: nonnegative, summing to 1 within 1e-12."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty vector")
    if n is not None and w.size != n:
        raise ValueError(f"expected {n} weights, got {w.size}")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def _check_shared(inputs: Sequence[Density]) -> None:
    first = inputs[0]
    for d in inputs[1:]:
        if not first.same_support(d):
            raise DensityError("densities do not share a support")


def representation_mean(inputs: Sequence[Density], weights, rho: RepresentationFn) -> np.ndarray:
    """Pointwise weighted mean of the rho-representations (the rho-affine combination)."""
    w = check_weights(weights, len(inputs))
    _check_shared(inputs)
    reps = []
    for i, d in enumerate(inputs):
        if w[i] == 0.0:
            continue
        ok = rho.in_domain(d.values)
        if not np.all(ok):
            j = int(np.argmin(ok))
            raise DomainError(
                f"input {i} value {float(d.values[j])!r} at x={float(d.nodes[j])!r} is outside the domain of {rho.label()}")
        reps.append(w[i] * np.asarray(rho.apply(d.values), dtype=float))
    return np.sum(reps, axis=0)


def quasi_arithmetic_mean_values(inputs: Sequence[Density], weights, rho: RepresentationFn,
                                 clip: bool = False) -> np.ndarray:
    """Values of ``rho^-1(sum_i w_i rho(inputs_i))``.

    With ``clip=False`` a mean that leaves the open range of ``rho`` raises a
    RangeError; with ``clip=True`` the inverse (which clips via exp_q) is
    applied as is, producing zeros on the clipped side.
    """
    w = check_weights(weights, len(inputs))
    _check_shared(inputs)
    nz = np.flatnonzero(w)
    if nz.size == 1:
        return np.array(inputs[int(nz[0])].values, dtype=float)
    y = representation_mean(inputs, w, rho)
    if not clip:
        bad = ~rho.in_range(y)
        if np.any(bad):
            j = int(np.argmax(bad))
            raise RangeError(
                f"mean representation {y[j]!r} at x={float(inputs[0].nodes[j])!r} leaves the range of {rho.label()}")
    with np.errstate(over="ignore"):
        out = np.asarray(rho.inverse(y), dtype=float)
    if np.any(~np.isfinite(out)):
        raise RangeError("quasi-arithmetic mean overflowed")
    # idempotence: where all weighted inputs agree the mean is that value exactly
    first = inputs[int(nz[0])].values
    same = np.all([inputs[int(i)].values == first for i in nz], axis=0)
    return np.where(same, first, out)


def quasi_arithmetic_mean(inputs: Sequence[Density], weights, rho: RepresentationFn,
                          clip: bool = False) -> Density:
    """The quasi-arithmetic mean of densities on a shared support."""
    values = quasi_arithmetic_mean_values(inputs, weights, rho, clip=clip)
    return inputs[0].with_values(values)


@dataclass(frozen=True)
class AnnealingPath:
    """Two-endpoint path ``beta -> rho^-1((1-beta) rho(p0) + beta rho(p1))``.

    Evaluation applies exp_q clipping, so a deformed path may contain zeros
    where the endpoints are strongly mismatched.
    """

    p0: Density
    p1: Density
    rho: RepresentationFn
    normalization: str = UNNORMALIZED

    def __post_init__(self):
        if not self.p0.same_support(self.p1):
            raise DensityError("path endpoints do not share a support")
        if self.normalization not in (UNNORMALIZED, NORMALIZE_OUTPUT):
            raise ValueError(f"unknown normalization policy {self.normalization!r}")
        for name, d in (("p0", self.p0), ("p1", self.p1)):
            ok = self.rho.in_domain(d.values)
            if not np.all(ok):
                j = int(np.argmin(ok))
                raise DomainError(
                    f"endpoint {name} value {float(d.values[j])!r} at x={float(d.nodes[j])!r} "
                    f"is outside the domain of {self.rho.label()}")

    @property
    def endpoints(self) -> tuple[Density, Density]:
        return (self.p0, self.p1)

    def values(self, beta: float) -> np.ndarray:
        """Unnormalized path values at ``beta`` (no output normalization)."""
        beta = float(beta)
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta!r}")
        return quasi_arithmetic_mean_values((self.p0, self.p1), (1.0 - beta, beta), self.rho, clip=True)

    def evaluate(self, beta: float) -> Density:
        try:
            d = self.p0.with_values(self.values(beta))
        except DensityError as exc:
            raise RangeError(f"path vanishes identically at beta={beta!r}") from exc
        if self.normalization == NORMALIZE_OUTPUT:
            d = normalize(d)
        return d

    def log_values(self, beta: float) -> np.ndarray:
        """Natural log of the unnormalized values (``-inf`` at clipped zeros)."""
        with np.errstate(divide="ignore"):
            return np.log(self.values(beta))


def make_path(p0: Density, p1: Density, rho: RepresentationFn,
              normalization: str = UNNORMALIZED) -> AnnealingPath:
    return AnnealingPath(p0, p1, rho, normalization)


def evaluate(path: AnnealingPath, beta: float) -> Density:
    return path.evaluate(beta)


# ---------------------------------------------------------------------------
# Normalized q-mixtures
# ---------------------------------------------------------------------------


def _masses(p0: Density, p1: Density) -> tuple[float, float]:
    z0, z1 = integral(p0), integral(p1)
    if not (z0 > 0 and z1 > 0 and math.isfinite(z0) and math.isfinite(z1)):
        raise DensityError("endpoint masses must be finite and positive")
    return z0, z1


def reparameterize_normalized_q_mixture(p0: Density, p1: Density, beta: float, q: float) -> float:
    """Weight beta' at which the unnormalized q-mixture matches the normalized one.

    beta' = beta Z1^(q-1) / ((1-beta) Z0^(q-1) + beta Z1^(q-1)).
    """
    z0, z1 = _masses(p0, p1)
    return reparameterize_from_masses(z0, z1, beta, q)


def reparameterize_from_masses(z0: float, z1: float, beta: float, q: float) -> float:
    if not (z0 > 0 and z1 > 0):
        raise DensityError("masses must be positive")
    if abs(1.0 - q) < EPS_Q or beta in (0.0, 1.0):
        return float(beta)
    # work in logs so large mass ratios do not overflow
    a = math.log1p(-beta) + (q - 1.0) * math.log(z0)
    b = math.log(beta) + (q - 1.0) * math.log(z1)
    m = max(a, b)
    return float(math.exp(b - m) / (math.exp(a - m) + math.exp(b - m)))


def normalized_mixture_constant(p0: Density, p1: Density, beta: float, q: float) -> float:
    """c = [(1-beta) Z0^-(1-q) + beta Z1^-(1-q)]^(-1/(1-q)), geometric limit at q = 1."""
    z0, z1 = _masses(p0, p1)
    k = 1.0 - q
    if abs(k) < EPS_Q:
        return float(z0 ** (1.0 - beta) * z1 ** beta)
    return float(((1.0 - beta) * z0 ** (-k) + beta * z1 ** (-k)) ** (-1.0 / k))


# ---------------------------------------------------------------------------
# Moment averaging within exponential families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianFamily:
    """1-D Gaussian with natural parameters (mu/var, -1/(2 var)) and moments (E x, E x^2)."""

    name: str = "gaussian"

    @staticmethod
    def natural(mean: float, var: float) -> np.ndarray:
        if not var > 0:
            raise DomainError("variance must be positive")
        return np.array([mean / var, -0.5 / var])

    @staticmethod
    def mean_var(theta) -> tuple[float, float]:
        t1, t2 = (float(v) for v in theta)
        if not t2 < 0:
            raise DomainError("second natural parameter must be negative")
        var = -0.5 / t2
        return t1 * var, var

    def eta(self, theta) -> np.ndarray:
        m, v = self.mean_var(theta)
        return np.array([m, m * m + v])

    def eta_inv(self, eta) -> np.ndarray:
        m, s = (float(v) for v in eta)
        var = s - m * m
        if not var > 0:
            raise DomainError("moment vector has nonpositive variance")
        return self.natural(m, var)


@dataclass(frozen=True)
class BernoulliFamily:
    """Bernoulli with natural parameter logit(p) and moment p."""

    name: str = "bernoulli"

    def eta(self, theta) -> np.ndarray:
        t = np.asarray(theta, dtype=float).reshape(-1)
        return 1.0 / (1.0 + np.exp(-t))

    def eta_inv(self, eta) -> np.ndarray:
        p = np.asarray(eta, dtype=float).reshape(-1)
        if np.any((p <= 0) | (p >= 1)):
            raise DomainError("Bernoulli mean must lie in (0, 1)")
        return np.log(p) - np.log1p(-p)


def moment_average_path(family, theta0, theta1, beta: float) -> np.ndarray:
    """theta_beta = eta^-1((1-beta) eta(theta0) + beta eta(theta1))."""
    theta0 = np.asarray(theta0, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    if beta == 0.0:
        return theta0.copy()
    if beta == 1.0:
        return theta1.copy()
    eta = (1.0 - beta) * family.eta(theta0) + beta * family.eta(theta1)
    return np.asarray(family.eta_inv(eta), dtype=float)
