"""Command-line front end.

Verbs: ``value`` (single-number queries in exact / quadrature / asym / mc
mode), ``reproduce`` (table and figure CSVs), ``classify`` (LRD/SRD report)
and ``simulate`` (Monte Carlo estimates with standard errors).

Configuration comes from a JSON file (``--config``) with flag overrides;
unknown keys are rejected.  Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field

from .classify import classify, correlation_decay, table_cell
from .engine import (
    CustomDelay,
    DelayDistribution,
    ExponentialDelay,
    ModelConfig,
    ParetoDelay,
    correlation,
    covariance,
    mean_ibnr,
    variance,
)
from .errors import ConfigError, DomainError, FracIbnrError
from .expo import (
    expo_cov_asym,
    expo_cov_exact,
    expo_mean_asym,
    expo_mean_exact,
    expo_variance_asym,
    expo_variance_exact,
)
from .montecarlo import (
    ClaimLaw,
    ExponentialClaims,
    LogNormalClaims,
    ParetoClaims,
    PointMassClaims,
    Target,
    estimate,
)
from .pareto import (
    pareto_cov_asym,
    pareto_mean_asym,
    pareto_mean_exact,
    pareto_variance_asym,
)
from .renewal import RenewalModel
from .reproduce import TARGETS, write_csv

_CONFIG_KEYS = {
    "alpha", "lambda", "delta", "delay", "mu1", "mu2", "claim_moments",
    "claim_law", "query", "mode", "s", "t", "paths", "seed", "out",
    "target", "definition",
}

_DELAY_KEYS = {
    "exponential": {"kind", "beta"},
    "pareto": {"kind", "theta", "eta"},
    "custom": {"kind", "xs", "survival", "density"},
}

_CLAIM_KEYS = {
    "point_mass": {"kind", "value"},
    "exponential": {"kind", "mean"},
    "pareto": {"kind", "theta", "eta"},
    "lognormal": {"kind", "mu", "sigma"},
}


@dataclass
class RunConfig:
    """Validated run configuration: model, optional claim law, command knobs."""

    alpha: float = 0.6
    lam: float = 1.5
    delta: float = 0.0
    delay: dict = field(default_factory=lambda: {"kind": "exponential", "beta": 1.0})
    claim_moments: tuple = (1.0, 4.0)
    claim_law: dict | None = None
    s: float | None = None
    t: float | None = None
    paths: int = 100_000
    seed: int = 1
    out: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        if "alpha" in raw:
            kw["alpha"] = float(raw["alpha"])
        if "lambda" in raw:
            kw["lam"] = float(raw["lambda"])
        if "delta" in raw:
            kw["delta"] = float(raw["delta"])
        if "delay" in raw:
            kw["delay"] = _check_delay_dict(raw["delay"])
        if "claim_moments" in raw:
            kw["claim_moments"] = tuple(float(m) for m in raw["claim_moments"])
        elif "mu1" in raw or "mu2" in raw:
            kw["claim_moments"] = (float(raw.get("mu1", 1.0)), float(raw.get("mu2", 4.0)))
        if raw.get("claim_law") is not None:
            kw["claim_law"] = _check_claim_dict(raw["claim_law"])
        for k in ("s", "t"):
            if raw.get(k) is not None:
                kw[k] = float(raw[k])
        if "paths" in raw:
            kw["paths"] = int(raw["paths"])
        if "seed" in raw:
            kw["seed"] = int(raw["seed"])
        if raw.get("out") is not None:
            kw["out"] = str(raw["out"])
        return cls(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["claim_moments"] = list(self.claim_moments)
        return d

    def model(self) -> ModelConfig:
        return ModelConfig(
            RenewalModel(self.alpha, self.lam),
            self.delta,
            _build_delay(self.delay),
            self.claim_moments,
        )

    def claims(self) -> ClaimLaw:
        if self.claim_law is not None:
            return _build_claim(self.claim_law)
        # derive a law matching the configured first two moments
        mu1 = self.claim_moments[0]
        mu2 = self.claim_moments[1] if len(self.claim_moments) > 1 else mu1**2
        if abs(mu2 - mu1**2) <= 1e-12:
            return PointMassClaims(mu1)
        if mu2 / mu1**2 > 2.0 + 1e-12:
            return ParetoClaims.from_moments(mu1, mu2)
        if abs(mu2 - 2.0 * mu1**2) <= 1e-12:
            return ExponentialClaims(mu1)
        return LogNormalClaims.from_moments(mu1, mu2)


def _check_delay_dict(d: dict) -> dict:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("delay must be an object with a 'kind' key")
    kind = d["kind"]
    if kind not in _DELAY_KEYS:
        raise ConfigError(f"unknown delay kind {kind!r}")
    unknown = set(d) - _DELAY_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown delay keys for {kind}: {sorted(unknown)}")
    return dict(d)


def _check_claim_dict(d: dict) -> dict:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("claim_law must be an object with a 'kind' key")
    kind = d["kind"]
    if kind not in _CLAIM_KEYS:
        raise ConfigError(f"unknown claim kind {kind!r}")
    unknown = set(d) - _CLAIM_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown claim keys for {kind}: {sorted(unknown)}")
    return dict(d)


def _build_delay(d: dict) -> DelayDistribution:
    kind = d["kind"]
    if kind == "exponential":
        return ExponentialDelay(float(d["beta"]))
    if kind == "pareto":
        return ParetoDelay(float(d["theta"]), float(d["eta"]))
    return CustomDelay(tuple(d["xs"]), tuple(d["survival"]), tuple(d["density"]))


def _build_claim(d: dict) -> ClaimLaw:
    kind = d["kind"]
    if kind == "point_mass":
        return PointMassClaims(float(d.get("value", 1.0)))
    if kind == "exponential":
        return ExponentialClaims(float(d["mean"]))
    if kind == "pareto":
        return ParetoClaims(float(d["theta"]), float(d["eta"]))
    return LogNormalClaims(float(d["mu"]), float(d["sigma"]))


def _parse_delay_flag(text: str) -> dict:
    try:
        kind, _, params = text.partition(":")
        if kind == "exp":
            return {"kind": "exponential", "beta": float(params)}
        if kind == "pareto":
            theta, eta = (float(p) for p in params.split(","))
            return {"kind": "pareto", "theta": theta, "eta": eta}
    except (ValueError, TypeError):
        pass
    raise ConfigError(f"cannot parse --delay {text!r}; use exp:<beta> or pareto:<theta>,<eta>")


def _load_run_config(args) -> RunConfig:
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    overrides = {
        "alpha": args.alpha,
        "lambda": getattr(args, "lam", None),
        "delta": args.delta,
        "mu1": args.mu1,
        "mu2": args.mu2,
        "s": getattr(args, "s", None),
        "t": getattr(args, "t", None),
        "paths": getattr(args, "paths", None),
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
    }
    if getattr(args, "delay", None):
        overrides["delay"] = _parse_delay_flag(args.delay)
    for k, v in overrides.items():
        if v is not None:
            raw[k] = v
    if "mu1" in raw or "mu2" in raw:
        base = list(raw.get("claim_moments", [1.0, 4.0]))
        if "mu1" in raw:
            base[0] = raw.pop("mu1")
        if "mu2" in raw:
            base[1] = raw.pop("mu2")
        raw["claim_moments"] = base
    return RunConfig.from_dict(raw)


def _need(value, name: str) -> float:
    if value is None:
        raise ConfigError(f"--{name} is required for this query")
    return value


def _reject(query, mode, hint):
    raise ConfigError(f"({query}, {mode}) unsupported for this delay; {hint}")


def compute_value(rc: RunConfig, query: str, mode: str):
    """Dispatch a (query, mode) pair; returns (value, source, decay_law|None,
    std_error|None)."""
    cfg = rc.model()
    is_expo = isinstance(cfg.delay, ExponentialDelay)
    is_pareto = isinstance(cfg.delay, ParetoDelay)
    s, t = rc.s, rc.t

    if mode == "mc":
        t = _need(t, "t")
        claim = rc.claims()
        if query == "mean":
            est = estimate(cfg, claim, [Target("mean", t)], rc.paths, rc.seed)[0]
        elif query == "var":
            est = estimate(cfg, claim, [Target("variance", t)], rc.paths, rc.seed)[0]
        elif query == "cov":
            est = estimate(cfg, claim, [Target("covariance", t, _need(s, "s"))],
                           rc.paths, rc.seed)[0]
        elif query == "corr":
            s = _need(s, "s")
            cov_e, var_s, var_t = estimate(
                cfg, claim,
                [Target("covariance", t, s), Target("variance", s), Target("variance", t)],
                rc.paths, rc.seed,
            )
            denom = math.sqrt(var_s.value * var_t.value)
            est = type(cov_e)(cov_e.value / denom, cov_e.std_error / denom, cov_e.n_paths)
        else:
            raise ConfigError(f"unknown query {query!r}")
        return est.value, f"monte carlo ({est.n_paths} paths, seed {rc.seed})", None, est.std_error

    if query == "mean":
        t = _need(t, "t")
        if mode == "exact":
            if is_expo:
                return expo_mean_exact(cfg, t), "exponential-delay Kummer closed form", None, None
            if is_pareto and cfg.delta == 0.0:
                return pareto_mean_exact(cfg, t), "pareto-delay incomplete-beta closed form", None, None
            _reject(query, mode, "use --mode quadrature")
        if mode == "quadrature":
            return mean_ibnr(cfg, t), "renewal quadrature", None, None
        if mode == "asym":
            law = expo_mean_asym(cfg) if is_expo else pareto_mean_asym(cfg)
            return law.evaluate(t), "asymptotic decay law", law, None
    elif query == "var":
        t = _need(t, "t")
        if mode == "exact":
            if is_expo:
                return expo_variance_exact(cfg, t), "exponential-delay coefficient-series closed form", None, None
            _reject(query, mode, "no exact Pareto variance closed form; use --mode quadrature")
        if mode == "quadrature":
            return variance(cfg, t), "renewal quadrature", None, None
        if mode == "asym":
            law = expo_variance_asym(cfg) if is_expo else pareto_variance_asym(cfg)
            return law.evaluate(t), "asymptotic decay law", law, None
    elif query == "cov":
        s, t = _need(s, "s"), _need(t, "t")
        if mode == "exact":
            if is_expo:
                return expo_cov_exact(cfg, s, t), "exponential-delay coefficient-series closed form", None, None
            _reject(query, mode, "no exact Pareto covariance closed form; use --mode quadrature")
        if mode == "quadrature":
            return covariance(cfg, s, t), "renewal quadrature", None, None
        if mode == "asym":
            law = expo_cov_asym(cfg, s) if is_expo else pareto_cov_asym(cfg, s)
            return law.evaluate(t), "asymptotic decay law", law, None
    elif query == "corr":
        s, t = _need(s, "s"), _need(t, "t")
        if mode == "exact":
            if is_expo:
                val = expo_cov_exact(cfg, s, t) / math.sqrt(
                    expo_variance_exact(cfg, s) * expo_variance_exact(cfg, t)
                )
                return val, "exponential-delay coefficient-series closed form", None, None
            _reject(query, mode, "use --mode quadrature")
        if mode == "quadrature":
            return correlation(cfg, s, t), "renewal quadrature", None, None
        if mode == "asym":
            if is_expo:
                cov_law, var_law = expo_cov_asym(cfg, s), expo_variance_asym(cfg)
            else:
                cov_law, var_law = pareto_cov_asym(cfg, s), pareto_variance_asym(cfg)
            val = cov_law.evaluate(t) / math.sqrt(var_law.evaluate(s) * var_law.evaluate(t))
            return val, "asymptotic covariance over sqrt of asymptotic variance product", None, None
    else:
        raise ConfigError(f"unknown query {query!r}; use mean|var|cov|corr")
    raise ConfigError(f"unknown mode {mode!r}; use exact|quadrature|asym|mc")


def _cmd_value(args) -> int:
    rc = _load_run_config(args)
    value, source, law, se = compute_value(rc, args.query, args.mode)
    print(f"value = {value:.12g}")
    if se is not None:
        print(f"std_error = {se:.6g}")
    if law is not None:
        print(f"decay_law = {law}")
    print(f"source = {source}")
    return 0


def _cmd_reproduce(args) -> int:
    rc = _load_run_config(args)
    out = args.out or rc.out or f"{args.target}.csv"
    n = write_csv(args.target, out, full_precision=args.full_precision)
    print(f"wrote {n} rows to {out}")
    return 0


def _cmd_classify(args) -> int:
    rc = _load_run_config(args)
    cfg = rc.model()
    s = rc.s if rc.s is not None else 2.0
    law = correlation_decay(cfg, s)
    print(f"correlation decay = {law}")
    print(f"table cell = {table_cell(cfg)}")
    definitions = ["def1", "def2"] if args.definition == "both" else [args.definition]
    for d in definitions:
        res = classify(law, d)
        extra = f" ({res.note})" if res.note else ""
        print(f"{d}: {res.kind}{extra}")
    return 0


def _cmd_simulate(args) -> int:
    rc = _load_run_config(args)
    cfg = rc.model()
    t = _need(rc.t, "t")
    targets = [Target("mean", t), Target("variance", t)]
    labels = [f"mean@{t:g}", f"variance@{t:g}"]
    if rc.s is not None:
        targets.append(Target("covariance", t, rc.s))
        labels.append(f"covariance@({rc.s:g},{t:g})")
    ests = estimate(cfg, rc.claims(), targets, rc.paths, rc.seed)
    rows = []
    for label, est in zip(labels, ests):
        print(f"{label}: {est.value:.10g} (se {est.std_error:.4g}, {est.n_paths} paths)")
        rows.append((label, est.value, est.std_error, est.n_paths))
    if rc.out:
        import csv as _csv

        with open(rc.out, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["statistic", "value", "std_error", "n_paths"])
            w.writerows(rows)
        print(f"wrote {rc.out}")
    return 0


def _add_model_flags(p: argparse.ArgumentParser, with_times=True):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--alpha", type=float, help="fractional index in (0,1]")
    p.add_argument("--lambda", dest="lam", type=float, help="arrival rate")
    p.add_argument("--delta", type=float, help="force of interest")
    p.add_argument("--delay", help="exp:<beta> or pareto:<theta>,<eta>")
    p.add_argument("--mu1", type=float, help="first claim moment")
    p.add_argument("--mu2", type=float, help="second claim moment")
    if with_times:
        p.add_argument("--s", type=float, help="earlier time point")
        p.add_argument("--t", type=float, help="later time point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracibnr",
        description="Discounted IBNR moments under fractional Poisson arrivals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", help="single-value query")
    p.add_argument("query", choices=["mean", "var", "cov", "corr"])
    p.add_argument("--mode", default="exact", choices=["exact", "quadrature", "asym", "mc"])
    _add_model_flags(p)
    p.add_argument("--paths", type=int, help="MC paths")
    p.add_argument("--seed", type=int, help="MC seed")
    p.set_defaults(fn=_cmd_value)

    p = sub.add_parser("reproduce", help="emit a reference table/figure CSV")
    p.add_argument("target", choices=sorted(TARGETS))
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--full-precision", action="store_true")
    _add_model_flags(p, with_times=False)
    p.set_defaults(fn=_cmd_reproduce)

    p = sub.add_parser("classify", help="LRD/SRD classification report")
    _add_model_flags(p)
    p.add_argument("--definition", default="both", choices=["def1", "def2", "both"])
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    _add_model_flags(p)
    p.add_argument("--paths", type=int, help="MC paths")
    p.add_argument("--seed", type=int, help="MC seed")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(fn=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FracIbnrError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
