"""Command-line interface: ``annealpaths {path,divergence,family,ais,verify}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numeric or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import divergences as dv
from . import parametric as pm
from .deformed_math import DomainError, NumericOverflowError, RangeError, RepresentationFn, make_pair
from .density import (
    DEFAULT_GRID,
    DensityError,
    DensitySpec,
    DiscreteSupport,
    DiscreteTable,
    Gaussian,
    GaussianMixture,
    GridSupport,
    StudentT,
    materialize,
)
from .paths import NORMALIZE_OUTPUT, UNNORMALIZED, make_path
from .sampler import AisConfig, DegenerateWeightsError, ExactResample, RandomWalkMH, Schedule, run_ais
from .verify import SUITES, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class NumericError(Exception):
    pass


# ---------------------------------------------------------------------------
# Configuration schemas
# ---------------------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GaussianCfg(_Strict):
    kind: Literal["gaussian"]
    mean: float = 0.0
    stddev: float = Field(1.0, gt=0)


class ComponentCfg(_Strict):
    weight: float = Field(gt=0)
    mean: float
    stddev: float = Field(gt=0)


class MixtureCfg(_Strict):
    kind: Literal["mixture"]
    components: list[ComponentCfg] = Field(min_length=1)


class StudentTCfg(_Strict):
    kind: Literal["student_t"]
    dof: float = Field(gt=0)
    loc: float = 0.0
    scale: float = Field(1.0, gt=0)


class TableCfg(_Strict):
    kind: Literal["table"]
    values: list[Annotated[float, Field(ge=0)]] = Field(min_length=1)


FamilyCfg = Annotated[Union[GaussianCfg, MixtureCfg, StudentTCfg, TableCfg], Field(discriminator="kind")]


class DensityCfg(_Strict):
    family: FamilyCfg
    scale: float = Field(1.0, gt=0)

    def to_spec(self) -> DensitySpec:
        f = self.family
        if isinstance(f, GaussianCfg):
            fam = Gaussian(f.mean, f.stddev)
        elif isinstance(f, MixtureCfg):
            fam = GaussianMixture(tuple((c.weight, c.mean, c.stddev) for c in f.components))
        elif isinstance(f, StudentTCfg):
            fam = StudentT(f.dof, f.loc, f.scale)
        else:
            fam = DiscreteTable(tuple(f.values))
        return DensitySpec(fam, self.scale)


class GridCfg(_Strict):
    a: float = DEFAULT_GRID[0]
    b: float = DEFAULT_GRID[1]
    n: int = Field(DEFAULT_GRID[2], ge=2)


class RepCfg(_Strict):
    kind: Literal["identity", "log", "logq", "log_one_minus_lambda"]
    q: Optional[float] = None
    lam: Optional[float] = None

    def build(self) -> RepresentationFn:
        if self.kind == "identity":
            return RepresentationFn.identity()
        if self.kind == "log":
            return RepresentationFn.log()
        if self.kind == "logq":
            if self.q is None:
                raise ConfigError("representation 'logq' needs q")
            return RepresentationFn.logq(self.q)
        if self.lam is None:
            raise ConfigError("representation 'log_one_minus_lambda' needs lam")
        return RepresentationFn.log_one_minus_lambda(self.lam)


class EndpointsCfg(_Strict):
    p0: DensityCfg
    p1: DensityCfg
    grid: GridCfg = Field(default_factory=GridCfg)

    def densities(self):
        specs = [self.p0.to_spec(), self.p1.to_spec()]
        discrete = [isinstance(s.family, DiscreteTable) for s in specs]
        if any(discrete) and not all(discrete):
            raise ConfigError("cannot mix discrete tables with continuous families")
        try:
            support = None if all(discrete) else GridSupport(self.grid.a, self.grid.b, self.grid.n)
            return tuple(materialize(s, support) for s in specs)
        except DensityError as exc:
            raise ConfigError(str(exc)) from exc


class PathCfg(EndpointsCfg):
    rho: RepCfg
    betas: list[Annotated[float, Field(ge=0, le=1)]] = Field(default_factory=lambda: [0.0, 0.5, 1.0], min_length=1)
    normalize: bool = False


class DivergenceEntry(_Strict):
    kind: Literal[dv.KL_UNNORMALIZED, dv.KL_NORMALIZED, dv.AMARI_ALPHA, dv.RENYI, dv.JENSEN_SHANNON,
                  dv.BETA, dv.CICHOCKI_AMARI, dv.ZHANG_AB, dv.RHO_TAU]
    params: dict[str, Union[float, bool, RepCfg]] = Field(default_factory=dict)
    sweep: dict[str, list[float]] = Field(default_factory=dict)


class DivergenceCfg(EndpointsCfg):
    divergences: list[DivergenceEntry] = Field(min_length=1)


class FamilyRunCfg(_Strict):
    kind: Literal["lr", "polynomial"]
    q: float
    theta: list[float] = Field(min_length=1)
    p0: Optional[DensityCfg] = None
    p1: Optional[DensityCfg] = None
    base: Optional[DensityCfg] = None
    degree: int = Field(2, ge=1, le=6)
    grid: GridCfg = Field(default_factory=GridCfg)


class KernelCfg(_Strict):
    kind: Literal["exact", "mh"]
    step: float = Field(1.0, gt=0)
    sweeps: int = Field(1, ge=1)


class AisCfg(EndpointsCfg):
    rho: RepCfg = Field(default_factory=lambda: RepCfg(kind="log"))
    T: Optional[int] = Field(None, ge=1)
    betas: Optional[list[float]] = None
    kernel: KernelCfg = Field(default_factory=lambda: KernelCfg(kind="exact"))
    chains: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    workers: int = Field(1, ge=1)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _load(path: Optional[str], model: type[BaseModel]):
    if path is None:
        raise ConfigError("--config is required for this command")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in config: {exc}") from exc
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped to head); silence the interpreter's flush at exit
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_path(args) -> int:
    cfg = _load(args.config, PathCfg)
    p0, p1 = cfg.densities()
    policy = NORMALIZE_OUTPUT if cfg.normalize else UNNORMALIZED
    try:
        path = make_path(p0, p1, cfg.rho.build(), policy)
    except (DomainError, RangeError) as exc:
        raise NumericError(f"path construction failed: {exc}") from exc
    x = p0.nodes
    discrete = isinstance(p0.support, DiscreteSupport)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "x", "value"] + (["normalized"] if cfg.normalize else []))
    rows = []
    for beta in cfg.betas:
        try:
            raw = path.values(beta)
            d = path.evaluate(beta)
        except (DomainError, RangeError, DensityError) as exc:
            raise NumericError(f"beta={beta!r}: {exc}") from exc
        rows.append(raw)
        for i in range(x.size):
            xi = int(x[i]) if discrete else repr(float(x[i]))
            rec = [repr(float(beta)), xi, repr(float(raw[i]))]
            if cfg.normalize:
                rec.append(repr(float(d.values[i])))
            w.writerow(rec)
    _emit(buf.getvalue(), args.out)
    if args.figure:
        from .plotting import plot_path

        plot_path(x, cfg.betas, rows, args.figure, title=f"rho = {path.rho.label()}", discrete=discrete)
    return EXIT_OK


def _kind_from(name: str, params: dict) -> dv.DivergenceKind:
    def need(key):
        if key not in params:
            raise ConfigError(f"divergence {name!r} needs parameter {key!r}")
        return params[key]

    if name == dv.KL_UNNORMALIZED:
        return dv.DivergenceKind.kl_unnormalized()
    if name == dv.KL_NORMALIZED:
        return dv.DivergenceKind.kl_normalized()
    if name == dv.AMARI_ALPHA:
        return dv.DivergenceKind.amari_alpha(need("alpha"))
    if name == dv.RENYI:
        return dv.DivergenceKind.renyi(need("alpha"))
    if name == dv.JENSEN_SHANNON:
        return dv.DivergenceKind.jensen_shannon(need("beta"), bool(params.get("scaled", False)))
    if name == dv.BETA:
        return dv.DivergenceKind.beta(need("order"))
    if name == dv.CICHOCKI_AMARI:
        return dv.DivergenceKind.cichocki_amari(need("q"), need("lam"))
    if name == dv.ZHANG_AB:
        return dv.DivergenceKind.zhang_ab(need("beta"), need("q"))
    rho, tau = need("rho"), need("tau")
    if not isinstance(rho, RepCfg) or not isinstance(tau, RepCfg):
        raise ConfigError("rho_tau needs representation objects for rho and tau")
    return dv.DivergenceKind.rho_tau(make_pair(rho.build(), tau.build()))


def _params_json(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        out[k] = v.model_dump(exclude_none=True) if isinstance(v, RepCfg) else v
    return out


def cmd_divergence(args) -> int:
    cfg = _load(args.config, DivergenceCfg)
    a, b = cfg.densities()
    tol = 1e-8 if args.tol is None else args.tol
    records, ok = [], True
    for entry in cfg.divergences:
        keys = sorted(entry.sweep)
        combos = itertools.product(*(entry.sweep[k] for k in keys)) if keys else [()]
        for combo in combos:
            params = dict(entry.params)
            params.update(zip(keys, combo))
            try:
                kind = _kind_from(entry.kind, params)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            try:
                value, diag = dv.divergence_report(kind, a, b)
            except (DomainError, RangeError, NumericOverflowError, DensityError) as exc:
                raise NumericError(f"{entry.kind} {_params_json(params)}: {exc}") from exc
            rec = {"kind": entry.kind, "params": _params_json(params), "value": value, "diagnostics": diag}
            if args.crosscheck and entry.kind == dv.ZHANG_AB:
                beta, q = kind.params
                if not (0.0 < beta < 1.0 and q != 0.0):
                    raise ConfigError("crosscheck needs 0 < beta < 1 and q != 0")
                try:
                    fam = pm.make_lr_family(a, b, q)
                    other = pm.zhang_from_normalizers(fam, beta)
                except (DomainError, NumericOverflowError) as exc:
                    raise NumericError(f"crosscheck: {exc}") from exc
                diff = abs(other - value)
                passed = diff <= tol
                ok = ok and passed
                rec["crosscheck"] = {"normalizer_formula": other, "abs_diff": diff, "tolerance": tol,
                                     "passed": passed}
            records.append(rec)
    _emit(_dumps(records), args.out)
    if args.figure:
        from .plotting import plot_divergences

        plot_divergences(records, args.figure)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_family(args) -> int:
    cfg = _load(args.config, FamilyRunCfg)
    try:
        support = GridSupport(cfg.grid.a, cfg.grid.b, cfg.grid.n)
    except DensityError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        if cfg.kind == "lr":
            if cfg.p0 is None or cfg.p1 is None:
                raise ConfigError("lr family needs p0 and p1")
            p0, p1 = EndpointsCfg(p0=cfg.p0, p1=cfg.p1, grid=cfg.grid).densities()
            fam = pm.make_lr_family(p0, p1, cfg.q)
        else:
            if cfg.base is None:
                raise ConfigError("polynomial family needs a base density")
            try:
                base = materialize(cfg.base.to_spec(), support)
            except DensityError as exc:
                raise ConfigError(f"polynomial family needs a continuous base: {exc}") from exc
            if not isinstance(base.support, GridSupport):
                raise ConfigError("polynomial family needs a continuous base")
            fam = pm.polynomial_family(cfg.q, base, cfg.degree)
        z = pm.z_q(fam, cfg.theta)
    except pm.ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    except (DomainError, NumericOverflowError, RangeError) as exc:
        raise NumericError(str(exc)) from exc
    _emit(_dumps({"q": cfg.q, "theta": list(cfg.theta), "Z_q": z, "logZ": float(np.log(z))}), args.out)
    return EXIT_OK


def cmd_ais(args) -> int:
    cfg = _load(args.config, AisCfg)
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    p0, p1 = cfg.densities()
    try:
        path = make_path(p0, p1, cfg.rho.build())
    except (DomainError, RangeError) as exc:
        raise NumericError(f"path construction failed: {exc}") from exc
    try:
        if cfg.betas is not None:
            schedule = Schedule(tuple(cfg.betas))
        else:
            schedule = Schedule.linear(cfg.T if cfg.T is not None else 10)
        kernel = ExactResample() if cfg.kernel.kind == "exact" else RandomWalkMH(cfg.kernel.step, cfg.kernel.sweeps)
        ais_cfg = AisConfig(path, schedule, kernel, cfg.chains, cfg.seed, record_trace=bool(args.trace))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        res = run_ais(ais_cfg, workers=cfg.workers)
    except (DegenerateWeightsError, DomainError, RangeError) as exc:
        raise NumericError(str(exc)) from exc
    out = res.to_dict()
    out["stderr"] = res.stderr
    _emit(_dumps(out), args.out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            fh.write("chain,t,log_w\n")
            for k in range(res.trace.shape[0]):
                fh.write("".join(f"{k},{t + 1},{float(res.trace[k, t])!r}\n" for t in range(res.trace.shape[1])))
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = args.suite or "all"
    if suite not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    seed = 0 if args.seed is None else args.seed
    results = run_suite(suite, tol=args.tol, seed=seed)
    passed = all(r.passed for r in results)
    report = {"suite": suite, "seed": seed, "passed": passed, "checks": [r.to_dict() for r in results]}
    _emit(_dumps(report), args.out)
    return EXIT_OK if passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annealpaths", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, figure=False):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
        p.add_argument("--tol", type=float, help="tolerance override")
        if figure:
            p.add_argument("--figure", help="also render a PNG figure to this path")
        return p

    common(sub.add_parser("path", help="sweep an annealing path to CSV"), figure=True).set_defaults(func=cmd_path)
    pd = common(sub.add_parser("divergence", help="evaluate named divergences to JSON"), figure=True)
    pd.add_argument("--crosscheck", action="store_true", help="compare Zhang values with the normalizer formula")
    pd.set_defaults(func=cmd_divergence)
    common(sub.add_parser("family", help="normalizer of a q-exponential family member")).set_defaults(func=cmd_family)
    pa = common(sub.add_parser("ais", help="annealed importance sampling"))
    pa.add_argument("--trace", help="write per-chain cumulative log weights as CSV")
    pa.set_defaults(func=cmd_ais)
    pv = common(sub.add_parser("verify", help="run verification suites"))
    pv.add_argument("--suite", help="theorem1, theorem2, theorem3, zoo, limits or all")
    pv.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, RangeError, NumericOverflowError, DegenerateWeightsError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
