"""Pareto-delay moments under fractional Poisson arrivals (no discounting).

Heavy-tailed reporting delays change the decay class of every moment, with
branch structure in the shape parameter eta relative to alpha, 1, 2-alpha,
(3-alpha)/2 and (alpha+1)/2.  The one exact closed form is the mean,

    E[Z(t)] = mu_1 lam theta^eta / (Gamma(alpha) (theta+t)^(eta-alpha))
              * G*(t/(theta+t)),

where G*(y) = int_0^y (1-x)^(-eta) x^(alpha-1) dx is exactly the incomplete
Beta integral with second parameter 1 - eta (possibly <= 0); everything
else is asymptotic, returned as :class:`DecayLaw`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._chebyshev import ChebyshevInterpolant, cheb_nodes
from .engine import (
    DEFAULT_QUADRATURE_CONTROL,
    ModelConfig,
    ParetoDelay,
    QuadratureControl,
    _quad,
)
from .errors import DomainError
from .expo import DecayLaw
from .specfun import (
    DEFAULT_SERIES_CONTROL,
    SeriesControl,
    gamma_signed,
    incomplete_beta,
    ln_gamma,
)

__all__ = [
    "ParetoQuantity",
    "ParetoRegime",
    "pareto_branch",
    "g_star",
    "gstar_weighted_integral",
    "pareto_mean_exact",
    "pareto_mean_asym",
    "lemma2_j_asym",
    "pareto_variance_asym",
    "pareto_cov_asym",
]

# Boundary branches are selected within this tolerance of the threshold.
_BOUNDARY_TOL = 1e-9


class ParetoQuantity(enum.Enum):
    MEAN = "mean"
    VARIANCE = "variance"
    COVARIANCE = "covariance"
    CORRELATION = "correlation"


@dataclass(frozen=True)
class ParetoRegime:
    """Resolved asymptotic branch for one quantity at given (alpha, eta)."""

    quantity: ParetoQuantity
    branch: str


def _near(x: float, y: float) -> bool:
    return abs(x - y) < _BOUNDARY_TOL


def pareto_branch(quantity: ParetoQuantity, alpha: float, eta: float) -> ParetoRegime:
    """Total, mutually exclusive branch selection over eta > 0."""
    if not (0 < alpha < 1):
        raise DomainError(f"branch tables require 0 < alpha < 1, got {alpha}")
    if eta <= 0:
        raise DomainError(f"eta must be > 0, got {eta}")
    if quantity is ParetoQuantity.MEAN:
        if _near(eta, 1.0):
            branch = "eta=1"
        elif eta < 1.0:
            branch = "eta<1"
        else:
            branch = "eta>1"
    elif quantity is ParetoQuantity.VARIANCE:
        if _near(eta, alpha):
            branch = "eta=alpha"
        elif eta < alpha:
            branch = "eta<alpha"
        elif _near(eta, 1.0):
            branch = "eta=1"
        elif eta < 1.0:
            branch = "alpha<eta<1"
        else:
            branch = "eta>1"
    elif quantity is ParetoQuantity.COVARIANCE:
        if _near(eta, 2.0 - alpha):
            branch = "eta=2-alpha"
        elif eta < 2.0 - alpha:
            branch = "eta<2-alpha"
        else:
            branch = "eta>2-alpha"
    else:  # correlation: the six-column table
        if _near(eta, 1.0):
            branch = "eta=1"
        elif eta < alpha:
            branch = "eta<alpha"
        elif eta < 1.0:
            branch = "alpha<=eta<1"
        elif eta <= (3.0 - alpha) / 2.0 + _BOUNDARY_TOL:
            branch = "1<eta<=(3-alpha)/2"
        elif eta < 2.0 - alpha:
            branch = "(3-alpha)/2<eta<2-alpha"
        else:
            branch = "eta>=2-alpha"
    return ParetoRegime(quantity, branch)


def _pareto(cfg: ModelConfig) -> ParetoDelay:
    if not isinstance(cfg.delay, ParetoDelay):
        raise DomainError("this operation requires a Pareto reporting delay")
    if cfg.delta != 0.0:
        raise DomainError("Pareto closed/asymptotic forms require delta = 0")
    return cfg.delay


def g_star(
    eta: float, alpha: float, y: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """G*(y) = int_0^y (1-x)^(-eta) x^(alpha-1) dx = B(alpha, 1-eta, y).

    Defined for 0 <= y < 1 at any eta > 0; y = 1 requires eta < 1.
    """
    if not (0 < alpha < 1):
        raise DomainError(f"g_star requires alpha in (0,1), got {alpha}")
    if eta <= 0:
        raise DomainError(f"g_star requires eta > 0, got {eta}")
    return incomplete_beta(alpha, 1.0 - eta, y, control)


def gstar_weighted_integral(eta: float, alpha: float) -> float:
    """int_0^1 (1-y)^(2 eta - alpha - 2) G*(y) dy for eta > 1.

    Integration by parts against the polynomial weight collapses this to
    the closed form B(alpha, eta - alpha) / (2 eta - alpha - 1); the direct
    split-with-analytic-tail quadrature is kept in the test suite as the
    cross-check.
    """
    if eta <= 1.0:
        raise DomainError(f"weighted G* integral requires eta > 1, got {eta}")
    if not (0 < alpha < 1):
        raise DomainError(f"requires alpha in (0,1), got {alpha}")
    return math.exp(
        ln_gamma(alpha) + ln_gamma(eta - alpha) - ln_gamma(eta)
    ) / (2.0 * eta - alpha - 1.0)


def pareto_mean_exact(
    cfg: ModelConfig, t: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """E[Z(t)] in closed form (delta = 0)."""
    delay = _pareto(cfg)
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    a, eta, th = cfg.alpha, delay.eta, delay.theta
    if cfg.renewal.is_poisson:
        # ordinary Poisson: mu_1 lam int_0^t survival
        return cfg.mu(1) * cfg.lam * delay.survival_integral(0.0, t)
    y0 = t / (th + t)
    ln_pref = (
        math.log(cfg.mu(1) * cfg.lam)
        + eta * math.log(th)
        - ln_gamma(a)
        - (eta - a) * math.log(th + t)
    )
    return math.exp(ln_pref) * g_star(eta, a, y0, control)


def pareto_mean_asym(cfg: ModelConfig) -> DecayLaw:
    """Asymptotic mean: three branches in eta (power, power*log, power)."""
    delay = _pareto(cfg)
    a, eta, th = cfg.alpha, delay.eta, delay.theta
    if not (0 < a < 1):
        raise DomainError("asymptotic law requires 0 < alpha < 1")
    mu1, lam = cfg.mu(1), cfg.lam
    branch = pareto_branch(ParetoQuantity.MEAN, a, eta).branch
    if branch == "eta=1":
        return DecayLaw(mu1 * lam * th / math.exp(ln_gamma(a)), a - 1.0, Fraction(1))
    if branch == "eta<1":
        C = mu1 * lam * th**eta * gamma_signed(1.0 - eta) / math.exp(ln_gamma(a + 1.0 - eta))
        return DecayLaw(C, a - eta)
    C = mu1 * lam * th / ((eta - 1.0) * math.exp(ln_gamma(a)))
    return DecayLaw(C, a - 1.0)


def lemma2_j_asym(gamma: float, xi: float, v: float, G) -> DecayLaw:
    """Asymptotic law of J(s) = int_0^s (v+s-x)^(-gamma) x^(-xi)
    G((s-x)/(v+s-x)) dx as s -> infinity:

        gamma > 1: C = v^(1-gamma) int_0^1 (1-z)^(gamma-2) G(z) dz, power -xi
        gamma = 1: C = G(1), power -xi with a ln factor.
    """
    if gamma < 1.0:
        raise DomainError(f"requires gamma >= 1, got {gamma}")
    if xi >= 1.0:
        raise DomainError(f"requires xi < 1, got {xi}")
    if v <= 0:
        raise DomainError(f"requires v > 0, got {v}")
    if _near(gamma, 1.0):
        return DecayLaw(float(G(1.0)), -xi, Fraction(1))
    inner = _quad(lambda z: (1.0 - z) ** (gamma - 2.0) * float(G(z)), 0.0, 1.0,
                  DEFAULT_QUADRATURE_CONTROL)
    return DecayLaw(v ** (1.0 - gamma) * inner, -xi)


def pareto_variance_asym(cfg: ModelConfig) -> DecayLaw:
    """Asymptotic variance: five branches in eta."""
    delay = _pareto(cfg)
    a, eta, th = cfg.alpha, delay.eta, delay.theta
    if not (0 < a < 1):
        raise DomainError("asymptotic law requires 0 < alpha < 1")
    mu1, mu2, lam = cfg.mu(1), cfg.mu(2), cfg.lam
    ga = math.exp(ln_gamma(a))
    branch = pareto_branch(ParetoQuantity.VARIANCE, a, eta).branch
    if branch == "eta=alpha":
        g1a = gamma_signed(1.0 - a)
        return DecayLaw(mu1**2 * lam**2 * th ** (2 * a) * g1a**2 + mu2 * lam * th**a * g1a, 0.0)
    if branch == "eta<alpha":
        C = (
            2.0 * mu1**2 * lam**2 * th ** (2 * eta)
            * gamma_signed(a + 1.0 - 2.0 * eta) * gamma_signed(1.0 - eta)
            / (gamma_signed(2.0 * a + 1.0 - 2.0 * eta) * gamma_signed(a + 1.0 - eta))
            - mu1**2 * lam**2 * th ** (2 * eta)
            * gamma_signed(1.0 - eta) ** 2 / gamma_signed(a + 1.0 - eta) ** 2
        )
        return DecayLaw(C, 2.0 * (a - eta))
    if branch == "alpha<eta<1":
        C = mu2 * lam * th**eta * gamma_signed(1.0 - eta) / gamma_signed(a + 1.0 - eta)
        return DecayLaw(C, a - eta)
    if branch == "eta=1":
        return DecayLaw(mu2 * lam * th / ga, a - 1.0, Fraction(1))
    C = (
        2.0 * mu1**2 * lam**2 * th ** (a + 1.0) / ga**2 * gstar_weighted_integral(eta, a)
        + mu2 * lam * th / ((eta - 1.0) * ga)
    )
    return DecayLaw(C, a - 1.0)


@lru_cache(maxsize=32)
def _mean_exact_interp(cfg: ModelConfig, S: float, n_nodes: int) -> ChebyshevInterpolant:
    """Chebyshev interpolant of E[Z(u)]/u^alpha on [0, S] (smooth through 0)."""
    nodes = cheb_nodes(n_nodes, 0.0, S)
    a = cfg.alpha
    vals = np.empty_like(nodes)
    vals[0] = cfg.mu(1) * cfg.lam / math.exp(ln_gamma(1.0 + a))
    for i, u in enumerate(nodes[1:], start=1):
        vals[i] = pareto_mean_exact(cfg, float(u)) / u**a
    return ChebyshevInterpolant(nodes, vals)


def _int_mean_xalpha(cfg: ModelConfig, s: float, ctrl: QuadratureControl) -> float:
    """int_0^s E[Z(s-x)] x^(alpha-1) dx via the memoized exact-mean grid.

    Split at s/2 with a power substitution at each end: u = x^alpha absorbs
    the renewal-density singularity at x = 0, v = (s-x)^alpha the kink of
    E[Z(s-x)] ~ (s-x)^alpha at x = s.
    """
    a = cfg.alpha
    interp = _mean_exact_interp(cfg, s, ctrl.grid_points)
    inv_a = 1.0 / a
    mid = 0.5 * s

    def f_left(u):
        lag = s - u**inv_a
        return lag**a * float(interp(lag))

    def f_right(v):
        w = v**inv_a
        return float(interp(w)) * (s - w) ** (a - 1.0) * w

    left = _quad(f_left, 0.0, mid**a, ctrl) / a
    right = _quad(f_right, 0.0, mid**a, ctrl) / a
    return left + right


def _int_survival_x_dm(cfg: ModelConfig, s: float, ctrl: QuadratureControl) -> float:
    """int_0^s survival(s-x) x dm(x) = lam/Gamma(alpha) int_0^s survival(s-x) x^alpha dx."""
    a = cfg.alpha
    val = _quad(lambda x: float(cfg.delay.survival(s - x)) * x**a, 0.0, s, ctrl)
    return cfg.lam / math.exp(ln_gamma(a)) * val


def pareto_cov_asym(
    cfg: ModelConfig, s: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL
) -> DecayLaw:
    """Asymptotic covariance Cov[Z(s), Z(t)] as t -> infinity at fixed s:

        eta < 2-alpha : D1 t^(-eta)
        eta = 2-alpha : D2 t^(alpha-2)
        eta > 2-alpha : D3 t^(alpha-2)

    with constants built from int_0^s E[Z(s-x)] x^(alpha-1) dx and
    int_0^s survival(s-x) x dm(x).
    """
    delay = _pareto(cfg)
    a, eta, th = cfg.alpha, delay.eta, delay.theta
    if not (0 < a < 1):
        raise DomainError("asymptotic law requires 0 < alpha < 1")
    if s <= 0:
        raise DomainError(f"s must be > 0, got {s}")
    mu1, mu2, lam = cfg.mu(1), cfg.mu(2), cfg.lam
    ga = math.exp(ln_gamma(a))
    branch = pareto_branch(ParetoQuantity.COVARIANCE, a, eta).branch
    if branch == "eta<2-alpha":
        D1 = (
            mu2 * lam * th**eta * s**a / math.exp(ln_gamma(a + 1.0))
            + mu1 * lam * th**eta / ga * _int_mean_xalpha(cfg, s, ctrl)
        )
        return DecayLaw(D1, -eta)
    if branch == "eta=2-alpha":
        D2 = (
            mu2 * lam * th ** (2.0 - a) * s**a / math.exp(ln_gamma(a + 1.0))
            + mu1 * lam * th ** (2.0 - a) / ga * _int_mean_xalpha(cfg, s, ctrl)
            + mu1**2 * lam * th / ga * _int_survival_x_dm(cfg, s, ctrl)
        )
        return DecayLaw(D2, a - 2.0)
    D3 = (
        mu1**2 * lam * th * (1.0 - a) / ((eta - 1.0) * ga)
        * _int_survival_x_dm(cfg, s, ctrl)
    )
    return DecayLaw(D3, a - 2.0)
