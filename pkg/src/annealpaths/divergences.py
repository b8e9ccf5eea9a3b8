"""Rho-tau Bregman divergences, Bregman Information and named divergences.

All integrals are quadratures with the weights of the input densities, so on
discrete supports they are exact sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .deformed_math import (
    DomainError,
    NumericOverflowError,
    RepresentationFn,
    RhoTauPair,
    alpha_pair,
    cichocki_pair,
)
from .density import Density, DensityError, GridSupport, integral, normalize
from .paths import check_weights, quasi_arithmetic_mean

# Below this distance from 0 or 1 scaled quantities switch to their limit forms.
LIMIT_EPS = 1e-7


def _finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise NumericOverflowError(f"{what} is not finite ({value!r})")
    return float(value)


def _shared(a: Density, b: Density) -> None:
    if not a.same_support(b):
        raise DensityError("densities do not share a support")


def _reps(pair: RhoTauPair, d: Density, which: str = "rho") -> np.ndarray:
    rep: RepresentationFn = getattr(pair, which)
    ok = rep.in_domain(d.values)
    if not np.all(ok):
        j = int(np.argmin(ok))
        raise DomainError(f"value {float(d.values[j])!r} at x={float(d.nodes[j])!r} is outside the domain of {rep.label()}")
    return np.asarray(rep.apply(d.values), dtype=float)


def bregman_pointwise(pair: RhoTauPair, ya, yb) -> np.ndarray:
    """Scalar Bregman divergence d_f(ya : yb) on representation values."""
    ya = np.asarray(ya, dtype=float)
    yb = np.asarray(yb, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = (np.asarray(pair.f(ya)) - np.asarray(pair.f(yb))
               - (ya - yb) * np.asarray(pair.f_prime(yb)))
    return np.asarray(out, dtype=float)


def rho_tau_bregman(pair: RhoTauPair, a: Density, b: Density) -> float:
    """Integral of f(rho(a)) - f(rho(b)) - (rho(a) - rho(b)) f'(rho(b))."""
    _shared(a, b)
    terms = bregman_pointwise(pair, _reps(pair, a), _reps(pair, b))
    return _finite(float(np.dot(a.weights, terms)), "rho-tau Bregman divergence")


def dual_rho_tau_bregman(pair: RhoTauPair, a: Density, b: Density) -> float:
    """Divergence generated by f* on the tau-representations of ``a`` and ``b``."""
    return rho_tau_bregman(pair.dual(), a, b)


@dataclass(frozen=True)
class BregmanInfoResult:
    value: float
    minimizer: Density
    per_point_objective: np.ndarray = field(repr=False)


def bregman_information(pair: RhoTauPair, inputs: Sequence[Density], weights) -> BregmanInfoResult:
    """Jensen gap sum_i w_i Psi(rho_i) - Psi(rho(mu*)) at the quasi-arithmetic mean mu*."""
    w = check_weights(weights, len(inputs))
    mu = quasi_arithmetic_mean(inputs, w, pair.rho)
    with np.errstate(over="ignore", invalid="ignore"):
        acc = -np.asarray(pair.f(_reps(pair, mu)), dtype=float)
        for wi, d in zip(w, inputs):
            if wi > 0:
                acc = acc + wi * np.asarray(pair.f(_reps(pair, d)), dtype=float)
    value = _finite(float(np.dot(mu.weights, acc)), "Bregman Information")
    return BregmanInfoResult(value, mu, acc)


def expected_divergence(pair: RhoTauPair, inputs: Sequence[Density], weights, mu: Density) -> float:
    """sum_i w_i D_f[rho(inputs_i) : rho(mu)]."""
    w = check_weights(weights, len(inputs))
    return float(sum(wi * rho_tau_bregman(pair, d, mu) for wi, d in zip(w, inputs) if wi > 0))


def suboptimality_gap(pair: RhoTauPair, inputs: Sequence[Density], weights, mu: Density) -> float:
    """Excess expected divergence of a representative ``mu`` over the optimum."""
    return expected_divergence(pair, inputs, weights, mu) - bregman_information(pair, inputs, weights).value


def scaled_divergence(pair: RhoTauPair, p0: Density, p1: Density, beta: float) -> float:
    """Bregman Information of (p0, p1) with weights (1-beta, beta), divided by beta(1-beta).

    The endpoints are the limits D_f[rho(p1) : rho(p0)] at beta = 0 and
    D_f[rho(p0) : rho(p1)] at beta = 1.
    """
    beta = float(beta)
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta!r}")
    if beta < LIMIT_EPS:
        return rho_tau_bregman(pair, p1, p0)
    if 1.0 - beta < LIMIT_EPS:
        return rho_tau_bregman(pair, p0, p1)
    bi = bregman_information(pair, (p0, p1), (1.0 - beta, beta)).value
    return bi / (beta * (1.0 - beta))


# ---------------------------------------------------------------------------
# Named divergences
# ---------------------------------------------------------------------------

KL_UNNORMALIZED = "kl_unnormalized"
KL_NORMALIZED = "kl_normalized"
AMARI_ALPHA = "amari_alpha"
RENYI = "renyi"
JENSEN_SHANNON = "jensen_shannon"
BETA = "beta"
CICHOCKI_AMARI = "cichocki_amari"
ZHANG_AB = "zhang_ab"
RHO_TAU = "rho_tau"

KIND_NAMES = (KL_UNNORMALIZED, KL_NORMALIZED, AMARI_ALPHA, RENYI, JENSEN_SHANNON,
              BETA, CICHOCKI_AMARI, ZHANG_AB, RHO_TAU)


@dataclass(frozen=True)
class DivergenceKind:
    """A named divergence with its parameters.

    ``params`` holds the positional parameters of the family: alpha for
    Amari and Renyi, (beta, scaled) for Jensen-Shannon, the order for Beta,
    (q, lam) for Cichocki-Amari and (beta, q) for Zhang.
    """

    name: str
    params: tuple = ()
    pair: RhoTauPair | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.name not in KIND_NAMES:
            raise ValueError(f"unknown divergence kind {self.name!r}")
        p = self.params
        if self.name == JENSEN_SHANNON and not 0.0 < p[0] < 1.0:
            raise ValueError("Jensen-Shannon weight must lie in (0, 1)")
        if self.name == BETA and not 0.0 <= p[0] <= 2.0:
            raise ValueError("Beta divergence order must lie in [0, 2]")
        if self.name == ZHANG_AB and not 0.0 <= p[0] <= 1.0:
            raise ValueError("Zhang divergence weight must lie in [0, 1]")
        if self.name == RENYI and not 0.0 <= p[0] <= 1.0:
            raise ValueError("Renyi order must lie in [0, 1]")
        if self.name == RHO_TAU and self.pair is None:
            raise ValueError("rho_tau kind needs a pair")

    @classmethod
    def kl_unnormalized(cls):
        return cls(KL_UNNORMALIZED)

    @classmethod
    def kl_normalized(cls):
        return cls(KL_NORMALIZED)

    @classmethod
    def amari_alpha(cls, alpha: float):
        return cls(AMARI_ALPHA, (float(alpha),))

    @classmethod
    def renyi(cls, alpha: float):
        return cls(RENYI, (float(alpha),))

    @classmethod
    def jensen_shannon(cls, beta: float, scaled: bool = False):
        return cls(JENSEN_SHANNON, (float(beta), bool(scaled)))

    @classmethod
    def beta(cls, order: float):
        return cls(BETA, (float(order),))

    @classmethod
    def cichocki_amari(cls, q: float, lam: float):
        return cls(CICHOCKI_AMARI, (float(q), float(lam)))

    @classmethod
    def zhang_ab(cls, beta: float, q: float):
        return cls(ZHANG_AB, (float(beta), float(q)))

    @classmethod
    def rho_tau(cls, pair: RhoTauPair):
        return cls(RHO_TAU, (), pair)


def _xlogy_ratio(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """x log(x/y) with 0 log 0 = 0; infinite where x > 0 = y."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, x * (np.log(x) - np.log(y)), 0.0)
    return out


def kl_unnormalized(a: Density, b: Density) -> float:
    """Integral of a log(a/b) - a + b."""
    _shared(a, b)
    x, y = a.values, b.values
    terms = _xlogy_ratio(x, y) - x + y
    return _finite(float(np.dot(a.weights, terms)), "KL divergence")


def kl_normalized(a: Density, b: Density) -> float:
    return kl_unnormalized(normalize(a), normalize(b))


def _amari_terms(x: np.ndarray, y: np.ndarray, alpha: float) -> np.ndarray:
    # integrand of ((1-alpha) x + alpha y - x^(1-alpha) y^alpha) / (alpha (1-alpha))
    if alpha > 0.5:
        return _amari_terms(y, x, 1.0 - alpha)
    pos = (x > 0) & (y > 0)
    out = np.empty_like(x)
    if abs(alpha) < 1e-8:
        out[pos] = x[pos] * np.log(x[pos] / y[pos]) - x[pos] + y[pos]
    else:
        xp, yp = x[pos], y[pos]
        la = np.log(yp / xp)
        # x[(1-alpha) + alpha r - r^alpha] with r = y/x, written to avoid cancellation
        out[pos] = xp * (alpha * (yp / xp - 1.0) - np.expm1(alpha * la)) / (alpha * (1.0 - alpha))
    rest = ~pos
    if np.any(rest):
        xr, yr = x[rest], y[rest]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if abs(alpha) < 1e-8:
                val = np.where(xr > 0, np.inf, yr)
            else:
                cross = np.where((xr == 0) & (yr == 0), 0.0, np.power(xr, 1.0 - alpha) * np.power(yr, alpha))
                val = ((1.0 - alpha) * xr + alpha * yr - cross) / (alpha * (1.0 - alpha))
        out[rest] = val
    return out


def amari_alpha(a: Density, b: Density, alpha: float) -> float:
    """Amari alpha-divergence; alpha -> 0 gives KL[a:b], alpha -> 1 gives KL[b:a]."""
    _shared(a, b)
    terms = _amari_terms(np.array(a.values), np.array(b.values), float(alpha))
    if np.any(~np.isfinite(terms)):
        raise DomainError("Amari alpha-divergence needs positive values where powers are negative")
    return _finite(float(np.dot(a.weights, terms)), "Amari alpha-divergence")


def renyi(a: Density, b: Density, alpha: float) -> float:
    """-log(integral of a^(1-alpha) b^alpha) / (alpha (1-alpha)) between normalized inputs."""
    pa, pb = normalize(a), normalize(b)
    alpha = float(alpha)
    if alpha < LIMIT_EPS:
        return kl_unnormalized(pa, pb)
    if 1.0 - alpha < LIMIT_EPS:
        return kl_unnormalized(pb, pa)
    x, y = pa.values, pb.values
    with np.errstate(divide="ignore"):
        cross = np.exp((1.0 - alpha) * np.log(x) + alpha * np.log(y))
    s = float(np.dot(pa.weights, cross))
    if not s > 0:
        raise DomainError("Renyi divergence is infinite for disjoint supports")
    return _finite(-math.log(s) / (alpha * (1.0 - alpha)), "Renyi divergence")


def jensen_shannon(a: Density, b: Density, beta: float, scaled: bool = False) -> float:
    """(1-beta) KL[a:m] + beta KL[b:m] with m the arithmetic mixture; optionally / (beta(1-beta))."""
    _shared(a, b)
    beta = float(beta)
    x, y = a.values, b.values
    m = (1.0 - beta) * x + beta * y
    terms = (1.0 - beta) * _xlogy_ratio(x, m) + beta * _xlogy_ratio(y, m)
    value = _finite(float(np.dot(a.weights, terms)), "Jensen-Shannon divergence")
    if scaled:
        value /= beta * (1.0 - beta)
    return value


def _beta_terms(x: np.ndarray, y: np.ndarray, o: float) -> np.ndarray:
    if o == 2.0:
        d = x - y
        return 0.5 * d * d
    pos = (x > 0) & (y > 0)
    out = np.empty_like(x)
    xp, yp = x[pos], y[pos]
    lx, ly = np.log(xp), np.log(yp)
    if o == 0.0:
        out[pos] = xp / yp - (lx - ly) - 1.0
    elif o == 1.0:
        out[pos] = xp * (lx - ly) - xp + yp
    elif o < 0.5:
        # x^o/((o-1)o) + y^o/o, expanded around o = 0
        head = -1.0 / (1.0 - o) + (np.expm1(o * ly) - np.expm1(o * lx) / (1.0 - o)) / o
        out[pos] = head - xp * np.exp((o - 1.0) * ly) / (o - 1.0)
    else:
        # x^o/((o-1)o) - x y^(o-1)/(o-1), expanded around o = 1
        k = o - 1.0
        head = -xp / o + xp * (np.expm1(k * lx) / o - np.expm1(k * ly)) / k
        out[pos] = head + np.exp(o * ly) / o
    rest = ~pos
    if np.any(rest):
        xr, yr = x[rest], y[rest]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if o <= 1.0:
                val = np.full(xr.shape, np.inf)
                if 0.0 < o < 1.0:
                    # y = 0 < x still diverges; x = 0 leaves y^o / o
                    val = np.where(xr == 0, np.power(yr, o) / o, np.inf)
                elif o == 1.0:
                    val = np.where(xr == 0, yr, np.inf)
            else:
                val = (np.power(xr, o) / ((o - 1.0) * o) + np.power(yr, o) / o
                       - xr * np.power(yr, o - 1.0) / (o - 1.0))
        out[rest] = val
    return out


def beta_divergence(a: Density, b: Density, order: float) -> float:
    """Beta divergence of the given order in [0, 2].

    Order 2 is half the squared Euclidean distance, order 1 the unnormalized
    KL divergence and order 0 the Itakura-Saito divergence.
    """
    _shared(a, b)
    terms = _beta_terms(np.array(a.values), np.array(b.values), float(order))
    if np.any(~np.isfinite(terms)):
        raise DomainError("Beta divergence of this order needs positive values")
    return _finite(float(np.dot(a.weights, terms)), "Beta divergence")


def itakura_saito(a: Density, b: Density) -> float:
    return beta_divergence(a, b, 0.0)


def cichocki_amari(a: Density, b: Density, q: float, lam: float) -> float:
    """Alpha-beta divergence with L = lam + 1 - q:

    (1/(lam (1-q) L)) * integral[(1-q) a^L + lam b^L - L a^(1-q) b^lam].
    Degenerate parameter values are evaluated through the matching pair.
    """
    _shared(a, b)
    q, lam = float(q), float(lam)
    L = lam + 1.0 - q
    if min(abs(lam), abs(1.0 - q), abs(L)) < 1e-8:
        return rho_tau_bregman(cichocki_pair(q, lam), a, b)
    x, y = a.values, b.values
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("Cichocki-Amari divergence needs positive values")
    lx, ly = np.log(x), np.log(y)
    with np.errstate(over="ignore"):
        terms = ((1.0 - q) * np.exp(L * lx) + lam * np.exp(L * ly)
                 - L * np.exp((1.0 - q) * lx + lam * ly)) / (lam * (1.0 - q) * L)
    return _finite(float(np.dot(a.weights, terms)), "Cichocki-Amari divergence")


def zhang_f(u, beta: float, q: float):
    """Convex generator whose f-divergence integral of a f(b/a) is the Zhang (beta, q) divergence."""
    u = np.asarray(u, dtype=float)
    k = 1.0 - q
    with np.errstate(divide="ignore"):
        if abs(k) < 1e-8:
            mean = np.exp(beta * np.log(u))
        else:
            mean = np.power((1.0 - beta) + beta * np.power(u, k), 1.0 / k)
    return ((1.0 - beta) + beta * u - mean) / (beta * (1.0 - beta) * q)


def zhang_ab(a: Density, b: Density, beta: float, q: float) -> float:
    """(1/(beta(1-beta) q)) integral[(1-beta) a + beta b - m], m the q-power mean of a and b."""
    _shared(a, b)
    beta, q = float(beta), float(q)
    if beta < LIMIT_EPS or 1.0 - beta < LIMIT_EPS or abs(q) < 1e-8:
        return scaled_divergence(alpha_pair(q), a, b, beta)
    m = quasi_arithmetic_mean((a, b), (1.0 - beta, beta), RepresentationFn.logq(q), clip=True).values
    terms = ((1.0 - beta) * a.values + beta * b.values - m) / (beta * (1.0 - beta) * q)
    return _finite(float(np.dot(a.weights, terms)), "Zhang divergence")


def named_divergence(kind: DivergenceKind, a: Density, b: Density) -> float:
    return divergence_report(kind, a, b)[0]


def divergence_report(kind: DivergenceKind, a: Density, b: Density) -> tuple[float, dict]:
    """Value of a named divergence plus diagnostics (input masses, grid)."""
    p = kind.params
    if kind.name == KL_UNNORMALIZED:
        v = kl_unnormalized(a, b)
    elif kind.name == KL_NORMALIZED:
        v = kl_normalized(a, b)
    elif kind.name == AMARI_ALPHA:
        v = amari_alpha(a, b, p[0])
    elif kind.name == RENYI:
        v = renyi(a, b, p[0])
    elif kind.name == JENSEN_SHANNON:
        v = jensen_shannon(a, b, p[0], bool(p[1]) if len(p) > 1 else False)
    elif kind.name == BETA:
        v = beta_divergence(a, b, p[0])
    elif kind.name == CICHOCKI_AMARI:
        v = cichocki_amari(a, b, p[0], p[1])
    elif kind.name == ZHANG_AB:
        v = zhang_ab(a, b, p[0], p[1])
    else:
        v = rho_tau_bregman(kind.pair, a, b)
    diag = {
        "masses": [integral(a), integral(b)],
        "grid": a.support.to_dict(),
        "normalized_inputs": kind.name in (KL_NORMALIZED, RENYI),
    }
    if isinstance(a.support, GridSupport):
        diag["grid"]["h"] = a.support.h
    return v, diag
