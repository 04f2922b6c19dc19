"""Long-range / short-range dependence classification.

A process is LRD under the power-law definition when
Corr[Z(s), Z(t)] ~ c(s) t^(-d) with d in (0, 1], SRD for d in (1, 2); under
the general (integral) definition it is LRD when the correlation is not
integrable in t.  Correlation decay laws are composed from the asymptotic
covariance and variance laws of the exponential and Pareto modules; the
exponential discount factors cancel in the ratio, so the correlation is a
pure power law (possibly with a log factor) in every supported case except
Poisson arrivals with exponential delay, where it is exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .engine import ExponentialDelay, ModelConfig, ParetoDelay
from .errors import DomainError
from .expo import DecayLaw, expo_cov_asym, expo_variance_asym
from .pareto import (
    ParetoQuantity,
    pareto_branch,
    pareto_cov_asym,
    pareto_variance_asym,
)

__all__ = [
    "PowerLawCriterion",
    "IntegralCriterion",
    "DependenceClass",
    "correlation_decay",
    "classify",
    "empirical_exponent",
    "SlopeFit",
    "table_cell",
]

LRD = "LRD"
SRD = "SRD"


@dataclass(frozen=True)
class PowerLawCriterion:
    """Power-law definition: decay exponent d of Corr ~ c(s) t^(-d)."""

    d: float


@dataclass(frozen=True)
class IntegralCriterion:
    """General definition: is int |Corr(s, t)| dt finite?"""

    integrable: bool


@dataclass(frozen=True)
class DependenceClass:
    kind: str  # "LRD" | "SRD"
    criterion: PowerLawCriterion | IntegralCriterion
    decay: DecayLaw
    definition_applied: str  # "def1" | "def2"
    note: str = ""


def _poisson_pareto_variance_law(cfg: ModelConfig) -> DecayLaw:
    """Var[Z(t)] growth for Poisson arrivals, Pareto delay, delta = 0."""
    delay = cfg.delay
    c = cfg.lam * cfg.mu(2) * delay.theta**delay.eta
    if delay.eta < 1.0 - 1e-9:
        return DecayLaw(c / (1.0 - delay.eta), 1.0 - delay.eta)
    if abs(delay.eta - 1.0) <= 1e-9:
        return DecayLaw(cfg.lam * cfg.mu(2) * delay.theta, 0.0, Fraction(1))
    return DecayLaw(cfg.lam * cfg.mu(2) * delay.theta / (delay.eta - 1.0), 0.0)


def correlation_decay(cfg: ModelConfig, s: float) -> DecayLaw:
    """Decay law of Corr[Z_delta(s), Z_delta(t)] in t at fixed s.

    Composed as cov_law / sqrt(Var(s) * var_law); the constant follows the
    large-s convention of dividing by the asymptotic variance at s.
    """
    if s <= 0:
        raise DomainError(f"s must be > 0, got {s}")
    alpha = cfg.alpha
    if isinstance(cfg.delay, ExponentialDelay):
        if cfg.renewal.is_poisson:
            if cfg.delta != 0.0:
                raise DomainError(
                    "unsupported configuration: Poisson arrivals with exponential "
                    "delay and discounting has no tabulated correlation law"
                )
            beta = cfg.delay.beta
            var_const = cfg.lam * cfg.mu(2) / beta  # limit of the exact variance
            var_s = cfg.lam * cfg.mu(2) * cfg.delay.survival_integral(0.0, s)
            cov_c = cfg.lam * cfg.mu(2) * (math.exp(beta * s) - 1.0) / beta
            return DecayLaw(cov_c / math.sqrt(var_s * var_const), 0.0, Fraction(0), beta)
        cov_law = expo_cov_asym(cfg, s)
        var_law = expo_variance_asym(cfg)
    elif isinstance(cfg.delay, ParetoDelay):
        if cfg.delta != 0.0:
            raise DomainError("Pareto correlation laws require delta = 0")
        if cfg.renewal.is_poisson:
            delay = cfg.delay
            cov_law = DecayLaw(cfg.lam * cfg.mu(2) * delay.theta**delay.eta * s, -delay.eta)
            var_law = _poisson_pareto_variance_law(cfg)
            var_s = cfg.lam * cfg.mu(2) * delay.survival_integral(0.0, s)
            return DecayLaw(
                cov_law.constant / math.sqrt(var_s * var_law.constant),
                cov_law.power - var_law.power / 2.0,
                cov_law.log_power - var_law.log_power / 2,
                0.0,
            )
        cov_law = pareto_cov_asym(cfg, s)
        var_law = pareto_variance_asym(cfg)
    else:
        raise DomainError(
            "unsupported configuration: analytic classification needs an "
            "exponential or Pareto delay"
        )
    var_s = var_law.evaluate(s) if s > 1.0 else var_law.constant * s**var_law.power
    return DecayLaw(
        cov_law.constant / math.sqrt(var_s * var_law.constant),
        cov_law.power - var_law.power / 2.0,
        cov_law.log_power - var_law.log_power / 2,
        cov_law.exp_rate - var_law.exp_rate / 2.0,
    )


def _def2_integrable(decay: DecayLaw) -> bool:
    if decay.exp_rate > 0.0:
        return True
    d = -decay.power
    if d > 1.0:
        return True
    if d == 1.0:
        return decay.log_power < -1
    return False


def classify(decay: DecayLaw, definition: str = "def2") -> DependenceClass:
    """Classify a correlation decay law as LRD or SRD.

    ``def1`` (power-law) applies only to pure power laws with exponent in
    (0, 2); anything else falls through to the general integral test with
    a note marking definition 1 inapplicable.
    """
    definition = str(definition).lower().replace("definition", "def").replace(" ", "")
    if definition in ("1", "def1"):
        d = -decay.power
        if decay.log_power == 0 and decay.exp_rate == 0.0 and 0.0 < d < 2.0:
            kind = LRD if d <= 1.0 else SRD
            return DependenceClass(kind, PowerLawCriterion(d), decay, "def1")
        fallback = classify(decay, "def2")
        return DependenceClass(
            fallback.kind,
            fallback.criterion,
            decay,
            "def2",
            note="definition-1 inapplicable (not a pure power law with exponent in (0,2))",
        )
    if definition in ("2", "def2"):
        integrable = _def2_integrable(decay)
        return DependenceClass(
            SRD if integrable else LRD, IntegralCriterion(integrable), decay, "def2"
        )
    raise DomainError(f"unknown definition {definition!r}; use 'def1' or 'def2'")


class SlopeFit(NamedTuple):
    slope: float
    r_squared: float


def empirical_exponent(samples: Sequence[tuple[float, float]]) -> SlopeFit:
    """OLS slope of ln(corr) against ln(t), with R^2.

    Requires at least 5 samples spanning two decades in t, all with
    positive correlation values.
    """
    if len(samples) < 5:
        raise DomainError(f"need at least 5 samples, got {len(samples)}")
    ts = np.array([p[0] for p in samples], dtype=float)
    cs = np.array([p[1] for p in samples], dtype=float)
    if np.any(cs <= 0.0):
        raise DomainError("all correlation samples must be positive")
    if ts.max() / ts.min() < 100.0:
        raise DomainError("t values must span at least two decades")
    x = np.log(ts)
    y = np.log(cs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), r2)


def table_cell(cfg: ModelConfig) -> str:
    """Name of the correlation-table column the configuration falls in."""
    if isinstance(cfg.delay, ExponentialDelay):
        return "exponential"
    if isinstance(cfg.delay, ParetoDelay):
        if cfg.renewal.is_poisson:
            eta = cfg.delay.eta
            if abs(eta - 1.0) <= 1e-9:
                return "poisson: eta=1"
            return "poisson: eta<1" if eta < 1.0 else "poisson: eta>1"
        return pareto_branch(ParetoQuantity.CORRELATION, cfg.alpha, cfg.delay.eta).branch
    return "custom"
