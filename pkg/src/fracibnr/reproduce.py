"""Reproduction of the reference numerical study: four tables and six
figure data sets over the standard parameter grid (mu1=1, mu2=4, lam=1.5).

Each builder returns (header, rows); every table cell carries a source
column naming the formula family that produced it.  Values are written
with 6 significant figures by default to be diffable against the printed
tables.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .engine import ExponentialDelay, ModelConfig, ParetoDelay
from .errors import ConfigError
from .expo import (
    expo_cov_asym,
    expo_mean_asym,
    expo_mean_exact,
    expo_variance_asym,
    expo_variance_exact,
)
from .pareto import (
    pareto_cov_asym,
    pareto_mean_asym,
    pareto_mean_exact,
    pareto_variance_asym,
)
from .renewal import RenewalModel

__all__ = ["TARGETS", "build_target", "write_csv"]

MU1, MU2, LAM = 1.0, 4.0, 1.5
ALPHA_STUDY = 0.6
T_STUDY = 1e5
BETAS = (0.1, 0.2, 0.5, 1.0, 2.0)
ETAS = (0.2, 0.4, 1.0, 1.2, 1.4)
THETAS = (0.5, 1.0, 2.0)
CASES = ((1, 1e4, 1e5), (2, 2e4, 1.1e5))

SRC_EXPO_EXACT = "exponential-delay Kummer closed form"
SRC_EXPO_ASYM = "exponential-delay asymptotic decay law"
SRC_EXPO_SERIES = "exponential-delay coefficient-series closed form"
SRC_PARETO_EXACT = "pareto-delay incomplete-beta closed form"
SRC_PARETO_ASYM = "pareto-delay asymptotic decay law"
SRC_CORR = "asymptotic covariance over sqrt of asymptotic variance product"


def _expo_cfg(beta: float, alpha: float = ALPHA_STUDY, delta: float = 0.0) -> ModelConfig:
    return ModelConfig(RenewalModel(alpha, LAM), delta, ExponentialDelay(beta), (MU1, MU2))


def _pareto_cfg(theta: float, eta: float, alpha: float = ALPHA_STUDY) -> ModelConfig:
    return ModelConfig(RenewalModel(alpha, LAM), 0.0, ParetoDelay(theta, eta), (MU1, MU2))


def table1():
    header = ["delay", "beta", "eta", "theta", "t", "asym_mean", "exact_mean", "source"]
    rows = []
    for beta in BETAS:
        cfg = _expo_cfg(beta)
        rows.append(
            ["exponential", beta, "", "", T_STUDY,
             expo_mean_asym(cfg).evaluate(T_STUDY), expo_mean_exact(cfg, T_STUDY),
             f"{SRC_EXPO_ASYM}; {SRC_EXPO_EXACT}"]
        )
    for eta in ETAS:
        for theta in THETAS:
            cfg = _pareto_cfg(theta, eta)
            rows.append(
                ["pareto", "", eta, theta, T_STUDY,
                 pareto_mean_asym(cfg).evaluate(T_STUDY), pareto_mean_exact(cfg, T_STUDY),
                 f"{SRC_PARETO_ASYM}; {SRC_PARETO_EXACT}"]
            )
    return header, rows


def table2():
    header = ["delay", "beta", "eta", "theta", "t", "asym_variance", "exact_variance", "source"]
    rows = []
    for beta in BETAS:
        cfg = _expo_cfg(beta)
        rows.append(
            ["exponential", beta, "", "", T_STUDY,
             expo_variance_asym(cfg).evaluate(T_STUDY), expo_variance_exact(cfg, T_STUDY),
             f"{SRC_EXPO_ASYM}; {SRC_EXPO_SERIES}"]
        )
    for eta in ETAS:
        for theta in THETAS:
            cfg = _pareto_cfg(theta, eta)
            rows.append(
                ["pareto", "", eta, theta, T_STUDY,
                 pareto_variance_asym(cfg).evaluate(T_STUDY), "",
                 SRC_PARETO_ASYM]
            )
    return header, rows


def table3():
    header = ["delay", "beta", "eta", "theta", "case", "s", "t", "asym_covariance", "source"]
    rows = []
    for case, s, t in CASES:
        for beta in BETAS:
            cfg = _expo_cfg(beta)
            rows.append(
                ["exponential", beta, "", "", case, s, t,
                 expo_cov_asym(cfg, s).evaluate(t), SRC_EXPO_ASYM]
            )
        for eta in ETAS:
            for theta in THETAS:
                cfg = _pareto_cfg(theta, eta)
                rows.append(
                    ["pareto", "", eta, theta, case, s, t,
                     pareto_cov_asym(cfg, s).evaluate(t), SRC_PARETO_ASYM]
                )
    return header, rows


def _corr_asym(cfg, s, t) -> float:
    if isinstance(cfg.delay, ExponentialDelay):
        cov = expo_cov_asym(cfg, s)
        var = expo_variance_asym(cfg)
    else:
        cov = pareto_cov_asym(cfg, s)
        var = pareto_variance_asym(cfg)
    return cov.evaluate(t) / math.sqrt(var.evaluate(s) * var.evaluate(t))


def table4():
    header = ["delay", "beta", "eta", "theta", "case", "s", "t", "asym_correlation", "source"]
    rows = []
    for case, s, t in CASES:
        for beta in BETAS:
            rows.append(
                ["exponential", beta, "", "", case, s, t,
                 _corr_asym(_expo_cfg(beta), s, t), SRC_CORR]
            )
        for eta in ETAS:
            for theta in THETAS:
                rows.append(
                    ["pareto", "", eta, theta, case, s, t,
                     _corr_asym(_pareto_cfg(theta, eta), s, t), SRC_CORR]
                )
    return header, rows


# alpha sweep for the figure targets; includes eta values so branch
# boundaries (alpha = eta) are sampled exactly
_ALPHAS = np.round(np.arange(0.12, 0.89, 0.02), 10)
_FIG_ETAS = (0.4, 1.0, 1.4)
_FIG_S = 1e4


def _fig_alpha_sweep(value_fn):
    rows = []
    for eta in _FIG_ETAS:
        for a in _ALPHAS:
            cfg = _pareto_cfg(1.0, eta, alpha=float(a))
            rows.append([float(a), value_fn(cfg), f"eta={eta}"])
    return ["x", "y", "series"], rows


def fig1():
    return _fig_alpha_sweep(lambda cfg: pareto_mean_asym(cfg).evaluate(T_STUDY))


def fig2():
    return _fig_alpha_sweep(lambda cfg: pareto_variance_asym(cfg).evaluate(T_STUDY))


def fig3():
    return _fig_alpha_sweep(lambda cfg: pareto_cov_asym(cfg, _FIG_S).evaluate(T_STUDY))


def fig4():
    return _fig_alpha_sweep(lambda cfg: _corr_asym(cfg, _FIG_S, T_STUDY))


def fig5():
    header = ["x", "y", "series"]
    rows = []
    ts = np.linspace(1e5, 2e5, 21)
    for a in (0.3, 0.5, 0.8):
        expo_cfg = _expo_cfg(1.0, alpha=a)
        par_cfg = _pareto_cfg(1.0, 1.0, alpha=a)
        for t in ts:
            rows.append([float(t), _corr_asym(expo_cfg, _FIG_S, float(t)),
                         f"exponential beta=1.0 alpha={a}"])
        for t in ts:
            rows.append([float(t), _corr_asym(par_cfg, _FIG_S, float(t)),
                         f"pareto theta=1.0 eta=1.0 alpha={a}"])
    return header, rows


def fig6():
    header = ["x", "y", "series"]
    rows = []
    deltas = np.linspace(0.0, 0.1, 21)
    for t in (20.0, 50.0, 100.0, 200.0):
        for d in deltas:
            cfg = _expo_cfg(1.0, delta=float(d))
            rows.append([float(d), expo_mean_exact(cfg, t), f"mean t={t:g}"])
            rows.append([float(d), expo_variance_exact(cfg, t), f"variance t={t:g}"])
    return header, rows


TARGETS = {
    "table1": table1,
    "table2": table2,
    "table3": table3,
    "table4": table4,
    "fig1": fig1,
    "fig2": fig2,
    "fig3": fig3,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
}


def build_target(name: str):
    if name not in TARGETS:
        raise ConfigError(f"unknown target {name!r}; choose from {sorted(TARGETS)}")
    return TARGETS[name]()


def _fmt(x, full_precision: bool) -> str:
    if isinstance(x, float):
        if full_precision:
            return repr(x)
        # 6 significant figures, expanded decimals (no scientific notation)
        # so small covariance/correlation cells stay directly diffable
        return np.format_float_positional(
            x, precision=6, unique=False, fractional=False, trim="-"
        )
    return str(x)


def write_csv(name: str, path: str, full_precision: bool = False) -> int:
    """Write one target's CSV; returns the number of data rows."""
    header, rows = build_target(name)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x, full_precision) for x in row])
    return len(rows)
