"""Deformed logarithms, representation functions and conjugate generator triples.

Everything here is elementwise over numpy arrays (scalars are accepted and
returned as 0-d results converted back to float).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# Below this distance from q = 1 the deformed pair collapses to log/exp.
EPS_Q = 1e-8


class DomainError(ValueError):
    """An argument lies outside the domain of a representation function."""


class RangeError(ValueError):
    """A value lies outside the range of a representation function."""


class NumericOverflowError(ArithmeticError):
    """A computation saturated to a non-finite value."""


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def q_log(u, q: float):
    """Deformed logarithm ``(u**(1-q) - 1) / (1-q)``, natural log at q = 1."""
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError(f"q_log requires u > 0 (q={q}); got min {np.min(u)!r}")
    k = 1.0 - q
    if abs(k) < EPS_Q:
        return _out(np.log(u))
    # expm1 keeps full relative accuracy when k*log(u) is small
    return _out(np.expm1(k * np.log(u)) / k)


def q_exp(t, q: float):
    """Deformed exponential ``[1 + (1-q) t]_+ ** (1/(1-q))``.

    Where the bracket is clipped to zero the result is 0 for every q,
    including q > 1 where the exponent is negative.  Overflow saturates to inf.
    """
    t = np.asarray(t, dtype=float)
    k = 1.0 - q
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if abs(k) < EPS_Q:
            return _out(np.exp(t))
        base = k * t
        valid = base > -1.0
        safe = np.where(valid, base, 0.0)
        out = np.where(valid, np.exp(np.log1p(safe) / k), 0.0)
    return _out(out)


def q_log_range(q: float) -> tuple[float, float]:
    """Open interval of values taken by ``q_log(., q)`` on u > 0."""
    k = 1.0 - q
    if abs(k) < EPS_Q:
        return (-math.inf, math.inf)
    if k > 0:
        return (-1.0 / k, math.inf)
    return (-math.inf, -1.0 / k)


# ---------------------------------------------------------------------------
# Representation functions
# ---------------------------------------------------------------------------

IDENTITY = "identity"
LOG = "log"
LOGQ = "logq"
LOG_ONE_MINUS_LAMBDA = "log_one_minus_lambda"

_KINDS = (IDENTITY, LOG, LOGQ, LOG_ONE_MINUS_LAMBDA)


@dataclass(frozen=True)
class RepresentationFn:
    """A strictly increasing scalar embedding ``u -> scale * base(u) + offset``.

    ``kind`` selects the base: identity, natural log, ``q_log(., param)`` or
    ``q_log(., 1 - param)`` (the lambda-parameterised dual family).  The
    affine part exists so that invariance of quasi-arithmetic means under
    ``c * rho + a`` can be exercised; all catalog constructors use the
    identity affine map.
    """

    kind: str
    param: float = 0.0
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown representation kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("affine scale must be positive")

    # -- constructors -------------------------------------------------------
    @classmethod
    def identity(cls) -> "RepresentationFn":
        return cls(IDENTITY)

    @classmethod
    def log(cls) -> "RepresentationFn":
        return cls(LOG)

    @classmethod
    def logq(cls, q: float) -> "RepresentationFn":
        return cls(LOGQ, float(q))

    @classmethod
    def log_one_minus_lambda(cls, lam: float) -> "RepresentationFn":
        return cls(LOG_ONE_MINUS_LAMBDA, float(lam))

    def affine(self, c: float, a: float) -> "RepresentationFn":
        """The representation ``c * self + a``."""
        return RepresentationFn(self.kind, self.param, self.scale * c, self.offset * c + a)

    # -- structure ----------------------------------------------------------
    @property
    def order(self) -> float | None:
        """Deformation order q of the underlying deformed log, None for identity."""
        if self.kind == LOG:
            return 1.0
        if self.kind == LOGQ:
            return self.param
        if self.kind == LOG_ONE_MINUS_LAMBDA:
            return 1.0 - self.param
        return None

    @property
    def is_plain(self) -> bool:
        return self.scale == 1.0 and self.offset == 0.0

    def label(self) -> str:
        base = {
            IDENTITY: "identity",
            LOG: "log",
            LOGQ: f"log_q(q={self.param:g})",
            LOG_ONE_MINUS_LAMBDA: f"log_(1-lambda)(lambda={self.param:g})",
        }[self.kind]
        if self.is_plain:
            return base
        return f"{self.scale:g}*{base}+{self.offset:g}"

    def _base_apply(self, u):
        if self.kind == IDENTITY:
            return np.asarray(u, dtype=float)
        return np.asarray(q_log(u, self.order), dtype=float)

    def _base_inverse(self, y):
        if self.kind == IDENTITY:
            return np.asarray(y, dtype=float)
        return np.asarray(q_exp(y, self.order), dtype=float)

    def apply(self, u):
        return _out(self.scale * self._base_apply(u) + self.offset)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        return _out(self._base_inverse((y - self.offset) / self.scale))

    def d1(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == IDENTITY:
            return _out(self.scale * np.ones_like(u))
        self._check_domain(u)
        return _out(self.scale * u ** (-self.order))

    def d2(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == IDENTITY:
            return _out(np.zeros_like(u))
        self._check_domain(u)
        q = self.order
        return _out(-self.scale * q * u ** (-q - 1.0))

    def _check_domain(self, u):
        if self.kind != IDENTITY and np.any(~(u > 0)):
            raise DomainError(f"{self.label()} requires positive arguments")

    def in_domain(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.kind == IDENTITY:
            return np.isfinite(u)
        return np.isfinite(u) & (u > 0)

    def range(self) -> tuple[float, float]:
        if self.kind == IDENTITY:
            lo, hi = -math.inf, math.inf
        else:
            lo, hi = q_log_range(self.order)
        return (self.scale * lo + self.offset, self.scale * hi + self.offset)

    def in_range(self, y) -> np.ndarray:
        """True where ``y`` lies strictly inside the range (the interior)."""
        lo, hi = self.range()
        y = np.asarray(y, dtype=float)
        return (y > lo) & (y < hi)


# ---------------------------------------------------------------------------
# Conjugate triples
# ---------------------------------------------------------------------------


def adaptive_simpson(fn: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-12, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature of a scalar function on [a, b]."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    if a == b:
        return 0.0
    fa, fb, fm = fn(a), fn(b), fn(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


@dataclass(frozen=True)
class RhoTauPair:
    """Conjugate representations (rho, tau) with the convex f where f' = tau o rho^-1.

    ``f`` and ``f_prime`` act on rho-values; ``f_conj`` is the convex conjugate
    acting on tau-values.  ``source`` records how f was obtained
    ("catalog" or "numerical").
    """

    rho: RepresentationFn
    tau: RepresentationFn
    f: Callable = field(repr=False, compare=False)
    f_prime: Callable = field(repr=False, compare=False)
    f_conj: Callable = field(repr=False, compare=False)
    source: str = "catalog"

    def f_second(self, y):
        """f''(y) = tau'(u) / rho'(u) at u = rho^-1(y)."""
        u = np.asarray(self.rho.inverse(y), dtype=float)
        return _out(np.asarray(self.tau.d1(u)) / np.asarray(self.rho.d1(u)))

    def dual(self) -> "RhoTauPair":
        """The pair (tau, rho) generated by the conjugate f*."""

        def conj_prime(t):
            return self.rho.apply(self.tau.inverse(t))

        return RhoTauPair(self.tau, self.rho, self.f_conj, conj_prime, self.f,
                          source=self.source)

    def label(self) -> str:
        return f"({self.rho.label()}, {self.tau.label()})"


def _legendre_from(rho: RepresentationFn, tau: RepresentationFn, f: Callable) -> Callable:
    # f*(t) = rho(u) t - f(rho(u)) at u = tau^-1(t); exact whenever f' = tau o rho^-1.
    def f_conj(t):
        t = np.asarray(t, dtype=float)
        u = np.asarray(tau.inverse(t), dtype=float)
        if np.any(~rho.in_domain(u)):
            raise RangeError(f"tau-value outside the image of {tau.label()}")
        r = np.asarray(rho.apply(u), dtype=float)
        return _out(r * t - np.asarray(f(r), dtype=float))

    return f_conj


def _deformed_generator(q: float, shift_rho: float, lam: float, shift_tau: float):
    """Closed-form f for rho = log_q(u) + shift_rho, tau = log_(1-lam)(u) + shift_tau.

    f is written in terms of u = exp_q(y - shift_rho) as the antiderivative
    of tau(u) rho'(u) plus ``shift_tau * y``; with L = lam + 1 - q the generic
    case is  u**L / (lam L) - (y - shift_rho)/lam - 1/(lam L).  The limits
    lam -> 0 and L -> 0 have their own forms.
    """
    L = lam + 1.0 - q
    lam0 = abs(lam) < EPS_Q
    L0 = abs(L) < EPS_Q

    def log_u(r):
        if abs(1.0 - q) < EPS_Q:
            return r
        return np.log1p((1.0 - q) * r) / (1.0 - q)

    def f(y):
        y = np.asarray(y, dtype=float)
        r = y - shift_rho
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            lu = log_u(r)
            if lam0 and L0:
                core = 0.5 * lu * lu
            elif lam0:
                uL = np.exp(L * lu)
                core = uL * lu / L - np.expm1(L * lu) / (L * L)
            elif L0:
                core = (lu + np.expm1(-lam * lu) / lam) / lam
            else:
                core = np.exp(L * lu) / (lam * L) - r / lam - 1.0 / (lam * L)
        return _out(core + shift_tau * y)

    def f_prime(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            lu = log_u(y - shift_rho)
            val = lu if lam0 else np.expm1(lam * lu) / lam
        return _out(val + shift_tau)

    return f, f_prime


def _numerical_generator(rho: RepresentationFn, tau: RepresentationFn):
    anchor = float(rho.apply(1.0))

    def integrand(s):
        return float(tau.apply(float(rho.inverse(s))))

    def f_scalar(y):
        return adaptive_simpson(integrand, anchor, float(y), tol=1e-12)

    def f(y):
        y = np.asarray(y, dtype=float)
        if np.any(~rho.in_range(y) & ~(y == anchor)):
            raise RangeError(f"value outside the range of {rho.label()}")
        return _out(np.vectorize(f_scalar, otypes=[float])(y))

    def f_prime(y):
        return _out(np.asarray(tau.apply(rho.inverse(y)), dtype=float))

    return f, f_prime


def _catalog_params(rep: RepresentationFn):
    """(order, shift) with rep(u) = log_order(u) + shift, or None if not catalogued."""
    if not rep.is_plain:
        return None
    if rep.kind == IDENTITY:
        return (0.0, 1.0)  # u = log_0(u) + 1
    return (rep.order, 0.0)


def make_pair(rho: RepresentationFn, tau: RepresentationFn) -> RhoTauPair:
    """Build the conjugate triple for representations ``rho`` and ``tau``.

    Catalogued combinations (identity or deformed-log rho and tau without an
    affine transform) get closed-form generators; anything else integrates
    f' = tau o rho^-1 numerically from rho(1), where f is anchored at 0.
    The closed forms satisfy f'(rho(u)) = tau(u) exactly, which fixes the
    affine gauge of f (divergences do not depend on it).
    """
    # domain compatibility: tau must accept what rho accepts on u > 0
    probe = np.array([0.25, 1.0, 4.0])
    for rep in (rho, tau):
        if not np.all(rep.in_domain(probe)):
            raise DomainError(f"{rep.label()} is not defined on positive reals")

    if rho.kind == IDENTITY and tau.kind == IDENTITY and rho.is_plain and tau.is_plain:
        def f(y):
            y = np.asarray(y, dtype=float)
            return _out(0.5 * y * y)

        def fp(y):
            return _out(np.asarray(y, dtype=float))

        return RhoTauPair(rho, tau, f, fp, f, source="catalog")

    rp, tp = _catalog_params(rho), _catalog_params(tau)
    if rp is not None and tp is not None:
        q, shift_rho = rp
        t_order, shift_tau = tp
        lam = 1.0 - t_order
        if tau.kind == IDENTITY:
            lam, shift_tau = 1.0, 1.0
        f, fp = _deformed_generator(q, shift_rho, lam, shift_tau)
        return RhoTauPair(rho, tau, f, fp, _legendre_from(rho, tau, f), source="catalog")

    f, fp = _numerical_generator(rho, tau)
    return RhoTauPair(rho, tau, f, fp, _legendre_from(rho, tau, f), source="numerical")


def kl_pair() -> RhoTauPair:
    """(log, identity): primal divergence is reverse KL, dual is forward KL."""
    return make_pair(RepresentationFn.log(), RepresentationFn.identity())


def alpha_pair(q: float) -> RhoTauPair:
    """(log_q, log_(1-q)): primal divergence is Amari alpha of order q."""
    return make_pair(RepresentationFn.logq(q), RepresentationFn.log_one_minus_lambda(q))


def beta_pair(q: float) -> RhoTauPair:
    """(log_q, identity): primal divergence is the Beta divergence of order 2 - q."""
    return make_pair(RepresentationFn.logq(q), RepresentationFn.identity())


def cichocki_pair(q: float, lam: float) -> RhoTauPair:
    """(log_q, log_(1-lam)): primal divergence is the Cichocki-Amari (q, lam) family."""
    return make_pair(RepresentationFn.logq(q), RepresentationFn.log_one_minus_lambda(lam))


def euclidean_pair() -> RhoTauPair:
    return make_pair(RepresentationFn.identity(), RepresentationFn.identity())
