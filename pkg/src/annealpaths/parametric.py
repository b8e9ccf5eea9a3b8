"""q-exponential families with tabulated sufficient statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .deformed_math import EPS_Q, DomainError, NumericOverflowError, q_exp, q_log
from .density import Density, DensityError, integrate

SCALED_ZQ = "scaled_zq"
LOG_Z = "log_z"


class ParameterError(ValueError):
    """A natural parameter lies outside the family's box domain."""


@dataclass(frozen=True, eq=False)
class QExpFamily:
    """Densities ``g(x) exp_q(<theta, T(x)>)`` on the support of ``base``.

    ``suffstats`` has shape (d, n): one tabulated statistic per row.
    ``lower``/``upper`` give the box domain of theta (infinite by default).
    """

    q: float
    base: Density
    suffstats: np.ndarray = field(repr=False)
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        T = np.array(self.suffstats, dtype=float)
        if T.ndim == 1:
            T = T[None, :]
        if T.ndim != 2 or T.shape[1] != self.base.values.size:
            raise DensityError("sufficient statistics must have shape (d, n) matching the base support")
        if not np.all(np.isfinite(T)):
            raise DensityError("sufficient statistics must be finite")
        T.setflags(write=False)
        object.__setattr__(self, "suffstats", T)
        d = T.shape[0]
        lo = np.full(d, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        hi = np.full(d, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if lo.shape != (d,) or hi.shape != (d,) or np.any(lo > hi):
            raise ParameterError("invalid theta box")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.suffstats.shape[0]

    def check_theta(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float).reshape(-1)
        if th.shape != (self.dim,):
            raise ParameterError(f"theta must have {self.dim} entries, got {th.size}")
        if np.any(~np.isfinite(th)) or np.any(th < self.lower) or np.any(th > self.upper):
            raise ParameterError(f"theta {th.tolist()} outside the parameter box")
        return th

    def natural_statistic(self, theta) -> np.ndarray:
        return self.check_theta(theta) @ self.suffstats

    def ratio(self, theta) -> np.ndarray:
        """exp_q(<theta, T>), the density relative to the base."""
        with np.errstate(over="ignore"):
            u = np.asarray(q_exp(self.natural_statistic(theta), self.q), dtype=float)
        if np.any(~np.isfinite(u)):
            raise NumericOverflowError("exp_q overflowed for this theta")
        return u

    def values(self, theta) -> np.ndarray:
        return self.base.values * self.ratio(theta)


def unnormalized_density(fam: QExpFamily, theta) -> Density:
    try:
        return fam.base.with_values(fam.values(theta))
    except DensityError as exc:
        raise DomainError("family member vanishes identically") from exc


def z_q(fam: QExpFamily, theta) -> float:
    z = integrate(fam.base, fam.values(theta))
    if not (math.isfinite(z) and z > 0):
        raise NumericOverflowError(f"normalizer is not finite and positive ({z!r})")
    return z


def log_z(fam: QExpFamily, theta) -> float:
    return math.log(z_q(fam, theta))


def grad_z_q(fam: QExpFamily, theta) -> np.ndarray:
    """dZ_q/dtheta_j = integral of g^(1-q) p^q T_j, with p = g exp_q(<theta, T>)."""
    u = fam.ratio(theta)
    # g^(1-q) (g u)^q = g u^q, zero where exp_q clipped
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        kernel = np.where(u > 0, fam.base.values * np.power(u, fam.q), 0.0)
    grad = np.array([integrate(fam.base, kernel * t) for t in fam.suffstats])
    if np.any(~np.isfinite(grad)):
        raise NumericOverflowError("normalizer gradient is not finite")
    return grad


def grad_log_z(fam: QExpFamily, theta) -> np.ndarray:
    return grad_z_q(fam, theta) / z_q(fam, theta)


def generator_value(fam: QExpFamily, theta, generator: str) -> float:
    if generator == SCALED_ZQ:
        return z_q(fam, theta) / fam.q
    if generator == LOG_Z:
        return log_z(fam, theta)
    raise ValueError(f"unknown generator {generator!r}")


def generator_grad(fam: QExpFamily, theta, generator: str) -> np.ndarray:
    if generator == SCALED_ZQ:
        return grad_z_q(fam, theta) / fam.q
    if generator == LOG_Z:
        return grad_log_z(fam, theta)
    raise ValueError(f"unknown generator {generator!r}")


def parametric_bregman(fam: QExpFamily, theta_a, theta_b, generator: str = SCALED_ZQ) -> float:
    """Bregman divergence of Z_q/q or log Z_q between natural parameters."""
    if generator == SCALED_ZQ and abs(fam.q) < EPS_Q:
        raise ParameterError("Z_q/q is undefined at q = 0")
    ta = fam.check_theta(theta_a)
    tb = fam.check_theta(theta_b)
    fa = generator_value(fam, ta, generator)
    fb = generator_value(fam, tb, generator)
    gb = generator_grad(fam, tb, generator)
    return float(fa - fb - np.dot(ta - tb, gb))


# ---------------------------------------------------------------------------
# Likelihood-ratio families
# ---------------------------------------------------------------------------


def make_lr_family(p0: Density, p1: Density, q: float) -> QExpFamily:
    """One-parameter family with base p0 and statistic log_q(p1/p0).

    Members at beta in [0, 1] coincide with the LogQ(q) annealing path.
    """
    if not p0.same_support(p1):
        raise DensityError("endpoints do not share a support")
    x0, x1 = p0.values, p1.values
    bad = (x0 == 0) & (x1 > 0)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise DomainError(f"p1 is not absolutely continuous w.r.t. p0 at x={float(p0.nodes[j])!r}")
    T = np.zeros_like(x0)
    pos = x0 > 0
    both = pos & (x1 > 0)
    T[both] = q_log(x1[both] / x0[both], q)
    lost = pos & (x1 == 0)
    if np.any(lost):
        # log_q(0) is finite only for q < 1
        if q >= 1.0:
            raise DomainError("p1 vanishes where p0 is positive; log_q(0) is unbounded for q >= 1")
        T[lost] = -1.0 / (1.0 - q)
    return QExpFamily(q, p0, T[None, :])


def lr_normalizer(fam: QExpFamily, beta: float) -> float:
    return z_q(fam, [beta])


def renyi_from_normalizers(fam: QExpFamily, beta: float) -> float:
    """Scaled Jensen gap of log Z_1 over beta, the Renyi divergence of the normalized endpoints."""
    if abs(fam.q - 1.0) > EPS_Q:
        raise ParameterError("the Renyi identity uses the q = 1 family")
    psi0, psi1, psib = log_z(fam, [0.0]), log_z(fam, [1.0]), log_z(fam, [beta])
    return ((1.0 - beta) * psi0 + beta * psi1 - psib) / (beta * (1.0 - beta))


def zhang_from_normalizers(fam: QExpFamily, beta: float) -> float:
    """(1/(beta(1-beta) q)) [(1-beta) Z_q(0) + beta Z_q(1) - Z_q(beta)]."""
    q = fam.q
    z0, z1, zb = z_q(fam, [0.0]), z_q(fam, [1.0]), z_q(fam, [beta])
    return ((1.0 - beta) * z0 + beta * z1 - zb) / (beta * (1.0 - beta) * q)


def polynomial_family(q: float, base: Density, degree: int = 2, **box) -> QExpFamily:
    """Family with statistics (x, x^2, ..., x^degree) on a grid support."""
    x = base.nodes
    T = np.vstack([x ** k for k in range(1, degree + 1)])
    return QExpFamily(q, base, T, **box)
