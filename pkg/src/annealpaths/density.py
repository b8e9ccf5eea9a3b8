"""Unnormalized densities on 1-D uniform grids or finite discrete spaces."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy import stats

from .deformed_math import DomainError

DEFAULT_GRID = (-10.0, 10.0, 2001)


class DensityError(ValueError):
    """Invalid density values, weights or specification parameters."""


@dataclass(frozen=True)
class GridSupport:
    """Uniform grid of ``n`` nodes on ``[a, b]`` with trapezoid weights."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.b > self.a):
            raise DensityError(f"grid needs finite a < b, got [{self.a}, {self.b}]")
        if int(self.n) != self.n or self.n < 2:
            raise DensityError(f"grid needs at least 2 nodes, got {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, int(self.n))

    def weights(self) -> np.ndarray:
        w = np.full(int(self.n), self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def to_dict(self) -> dict:
        return {"kind": "grid", "a": self.a, "b": self.b, "n": int(self.n)}


@dataclass(frozen=True)
class DiscreteSupport:
    """The finite space {0, ..., n-1} with counting weights."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DensityError(f"discrete support needs n >= 1, got {self.n}")

    def nodes(self) -> np.ndarray:
        return np.arange(int(self.n), dtype=float)

    def weights(self) -> np.ndarray:
        return np.ones(int(self.n))

    def to_dict(self) -> dict:
        return {"kind": "discrete", "n": int(self.n)}


Support = Union[GridSupport, DiscreteSupport]


def support_from_dict(d: dict) -> Support:
    kind = d.get("kind")
    if kind == "grid":
        return GridSupport(float(d["a"]), float(d["b"]), int(d["n"]))
    if kind == "discrete":
        return DiscreteSupport(int(d["n"]))
    raise DensityError(f"unknown support kind {kind!r}")


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative values on a support, integrated with positive weights.

    The arrays are copied and made read-only on construction.
    """

    support: Support
    values: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        weights = np.array(self.weights, dtype=float)
        n = int(self.support.n)
        if values.shape != (n,) or weights.shape != (n,):
            raise DensityError(f"expected arrays of length {n}, got {values.shape} and {weights.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DensityError("density values must be finite and nonnegative")
        if not np.any(values > 0):
            raise DensityError("density has no positive value")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise DensityError("weights must be finite and positive")
        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def on(cls, support: Support, values) -> "Density":
        """Density on ``support`` with its canonical weights."""
        return cls(support, values, support.weights())

    @property
    def nodes(self) -> np.ndarray:
        return self.support.nodes()

    def with_values(self, values) -> "Density":
        return Density(self.support, values, self.weights)

    def scaled(self, c: float) -> "Density":
        return self.with_values(c * self.values)

    def same_support(self, other: "Density") -> bool:
        return self.support == other.support and np.array_equal(self.weights, other.weights)


def integral(d: Density) -> float:
    """Sum of weights times values."""
    return float(np.dot(d.weights, d.values))


def integrate(d: Density, arr) -> float:
    """Quadrature of an arbitrary array on the support of ``d``."""
    return float(np.dot(d.weights, np.asarray(arr, dtype=float)))


def normalize(d: Density) -> Density:
    z = integral(d)
    if not (math.isfinite(z) and z > 0):
        raise DensityError(f"cannot normalize a density with mass {z!r}")
    return d.with_values(d.values / z)


def map_values(d: Density, g: Callable) -> np.ndarray:
    """Elementwise image ``g(values)``; domain errors from ``g`` propagate."""
    with np.errstate(divide="raise", invalid="raise"):
        try:
            out = np.asarray(g(d.values), dtype=float)
        except FloatingPointError as exc:
            raise DomainError(f"map_values: {exc}") from exc
    if out.shape != d.values.shape:
        out = np.broadcast_to(out, d.values.shape).copy()
    return out


# ---------------------------------------------------------------------------
# Endpoint specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    mean: float
    stddev: float

    def validate(self):
        if not self.stddev > 0:
            raise DensityError("stddev must be positive")

    def pdf(self, x):
        return stats.norm.pdf(x, loc=self.mean, scale=self.stddev)


@dataclass(frozen=True)
class GaussianMixture:
    components: tuple  # of (weight, mean, stddev)

    def validate(self):
        if not self.components:
            raise DensityError("mixture needs at least one component")
        for w, _, s in self.components:
            if not w > 0:
                raise DensityError("mixture weights must be positive")
            if not s > 0:
                raise DensityError("stddev must be positive")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return sum(w * stats.norm.pdf(x, loc=m, scale=s) for w, m, s in self.components)


@dataclass(frozen=True)
class StudentT:
    dof: float
    loc: float = 0.0
    scale: float = 1.0

    def validate(self):
        if not self.dof > 0:
            raise DensityError("dof must be positive")
        if not self.scale > 0:
            raise DensityError("scale must be positive")

    def pdf(self, x):
        return stats.t.pdf(x, df=self.dof, loc=self.loc, scale=self.scale)


@dataclass(frozen=True)
class DiscreteTable:
    values: tuple

    def validate(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0 or np.any(~np.isfinite(v)) or np.any(v < 0):
            raise DensityError("table values must be a nonempty array of finite nonnegative reals")


Family = Union[Gaussian, GaussianMixture, StudentT, DiscreteTable]


@dataclass(frozen=True)
class DensitySpec:
    family: Family
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DensityError("scale must be positive")
        self.family.validate()


def materialize(spec: DensitySpec, support: Support | None = None) -> Density:
    """Evaluate ``scale * pdf`` at the support nodes.

    Discrete tables ignore ``support`` unless it is a matching DiscreteSupport.
    """
    fam = spec.family
    if isinstance(fam, DiscreteTable):
        v = np.asarray(fam.values, dtype=float)
        sup = DiscreteSupport(v.size)
        if support is not None and support != sup:
            raise DensityError("discrete table does not match the requested support")
        return Density.on(sup, spec.scale * v)
    if support is None:
        support = GridSupport(*DEFAULT_GRID)
    if not isinstance(support, GridSupport):
        raise DensityError("continuous families need a grid support")
    return Density.on(support, spec.scale * np.asarray(fam.pdf(support.nodes()), dtype=float))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_csv(d: Density) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(d.support, GridSupport):
        w.writerow(["x", "value", "weight"])
        for x, v, wt in zip(d.nodes, d.values, d.weights):
            w.writerow([repr(float(x)), repr(float(v)), repr(float(wt))])
    else:
        w.writerow(["index", "value"])
        for i, v in enumerate(d.values):
            w.writerow([i, repr(float(v))])
    return buf.getvalue()


def from_csv(text: str) -> Density:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DensityError("empty CSV")
    header, body = rows[0], [r for r in rows[1:] if r]
    if header == ["index", "value"]:
        values = [float(r[1]) for r in body]
        return Density.on(DiscreteSupport(len(values)), values)
    if header == ["x", "value", "weight"]:
        arr = np.array([[float(c) for c in r] for r in body])
        if arr.shape[0] < 2:
            raise DensityError("grid CSV needs at least two rows")
        sup = GridSupport(float(arr[0, 0]), float(arr[-1, 0]), arr.shape[0])
        return Density(sup, arr[:, 1], arr[:, 2])
    raise DensityError(f"unrecognized CSV header {header!r}")


def to_json_dict(d: Density) -> dict:
    return {
        "support": d.support.to_dict(),
        "values": [float(v) for v in d.values],
        "weights": [float(w) for w in d.weights],
    }


def from_json_dict(obj: dict) -> Density:
    sup = support_from_dict(obj["support"])
    weights = obj.get("weights")
    if weights is None:
        weights = sup.weights()
    return Density(sup, obj["values"], weights)


def to_json(d: Density) -> str:
    return json.dumps(to_json_dict(d))


def from_json(text: str) -> Density:
    return from_json_dict(json.loads(text))


def gaussian(mean: float = 0.0, stddev: float = 1.0, scale: float = 1.0,
             support: Support | None = None) -> Density:
    """Shorthand for materializing a scaled Gaussian."""
    return materialize(DensitySpec(Gaussian(mean, stddev), scale), support)


def table(values: Sequence[float]) -> Density:
    """Shorthand for a discrete table density."""
    return materialize(DensitySpec(DiscreteTable(tuple(float(v) for v in values))))
