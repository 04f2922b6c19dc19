"""Fractional Poisson counting-process primitives.

The claim-arrival process is a renewal process with Mittag-Leffler
interarrival times, index ``alpha`` in (0, 1].  Its renewal function and
density have the closed forms

    m(t)  = lambda t^alpha / Gamma(1 + alpha)
    m'(t) = lambda t^(alpha-1) / Gamma(alpha)

and ``alpha = 1`` reduces to the ordinary Poisson process, reproduced
exactly (not merely to rounding) by dedicated branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as sc

from .errors import DomainError
from .specfun import SeriesControl, DEFAULT_SERIES_CONTROL, beta_fn, mittag_leffler

__all__ = [
    "RenewalModel",
    "renewal_function",
    "renewal_density",
    "count_variance",
    "interarrival_survival",
]


@dataclass(frozen=True)
class RenewalModel:
    """Fractional Poisson model: index ``alpha`` in (0,1], rate ``lam`` > 0.

    ``lam`` carries units time^(-alpha); at alpha=1 it is the ordinary
    Poisson intensity.
    """

    alpha: float
    lam: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must be in (0,1], got {self.alpha}")
        if self.lam <= 0.0:
            raise DomainError(f"lam must be > 0, got {self.lam}")

    @property
    def is_poisson(self) -> bool:
        return self.alpha == 1.0


def renewal_function(model: RenewalModel, t: float) -> float:
    """m(t) = E[N(t)] = lam t^alpha / Gamma(1+alpha); m(0) = 0."""
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    if model.is_poisson:
        return model.lam * t
    return model.lam * t**model.alpha / math.exp(sc.gammaln(1.0 + model.alpha))


def renewal_density(model: RenewalModel, t: float) -> float:
    """m'(t) = lam t^(alpha-1) / Gamma(alpha); diverges at t=0 for alpha < 1."""
    if model.is_poisson:
        return model.lam
    if t <= 0.0:
        raise DomainError(f"renewal density requires t > 0 for alpha < 1, got t={t}")
    return model.lam * t ** (model.alpha - 1.0) / math.exp(sc.gammaln(model.alpha))


def count_variance(model: RenewalModel, t: float) -> float:
    """Var[N(t)] = m(t) + m(t)^2 [alpha B(alpha, 1/2) / 2^(2 alpha - 1) - 1]."""
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    m = renewal_function(model, t)
    if model.is_poisson:
        return m
    a = model.alpha
    bracket = a * beta_fn(a, 0.5) / 2.0 ** (2.0 * a - 1.0) - 1.0
    return m + m * m * bracket


def interarrival_survival(
    model: RenewalModel, t: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """P(tau > t) = E_alpha(-lam t^alpha), in [0, 1] and nonincreasing."""
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 1.0
    if model.is_poisson:
        return math.exp(-model.lam * t)
    return mittag_leffler(model.alpha, -model.lam * t**model.alpha, control)
