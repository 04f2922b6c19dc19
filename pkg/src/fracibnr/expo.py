"""Closed-form and asymptotic moments for exponential reporting delays.

With an exponential delay the Dickson-Hipp transform is again exponential,
so all discounted moments collapse to Kummer-function expressions.  The
variance and covariance involve the coefficient series

    A_n = alpha beta^n B(alpha, alpha+n+1) / (n! (alpha+n))

paired with 1F1(alpha, 2 alpha + n + 1, 2 beta t)-type factors; every term
is assembled in log space through the exponentially scaled Kummer function
so arguments like beta*t = 2e5 are routine.

Asymptotic results are returned as :class:`DecayLaw` objects, the canonical
form C * t^p * (ln t)^q * e^{-r t} shared with the Pareto and
classification modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import (
    DEFAULT_QUADRATURE_CONTROL,
    ExponentialDelay,
    ModelConfig,
    QuadratureControl,
    _quad,
)
from .errors import DomainError, RangeError, TruncationError
from .specfun import (
    DEFAULT_SERIES_CONTROL,
    SeriesControl,
    kummer_1f1_scaled_ln,
    ln_beta,
    ln_gamma,
)

__all__ = [
    "DecayLaw",
    "a_n_coeff",
    "expo_mean_exact",
    "expo_mean_asym",
    "expo_variance_exact",
    "expo_variance_asym",
    "w_integral",
    "expo_cov_exact",
    "expo_cov_asym",
]

# Beyond this value of 2*beta*max(s,t) the covariance series needs O(beta*t)
# terms; the pre-series integral form is evaluated instead.
_COV_SERIES_MAX = 400.0

# e^{-x} below 1e-18: tail cutoff for boundary-layer integrals.
_LAYER_WIDTH = 41.5


@dataclass(frozen=True)
class DecayLaw:
    """Canonical asymptotic form C * t^power * (ln t)^log_power * e^(-exp_rate t).

    ``log_power`` is kept rational: the correlation of the eta = 1 Pareto
    case carries a genuine 1/sqrt(ln t).
    """

    constant: float
    power: float
    log_power: Fraction = Fraction(0)
    exp_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "log_power", Fraction(self.log_power))
        if self.exp_rate < 0:
            raise DomainError("exp_rate must be >= 0")

    def evaluate(self, t: float) -> float:
        """Value at t; requires t > 1 when a log factor is present."""
        if t <= 0 or (self.log_power != 0 and t <= 1.0):
            raise DomainError(f"DecayLaw defined for t > 1, got {t}")
        out = self.constant * t**self.power * math.exp(-self.exp_rate * t)
        if self.log_power != 0:
            out *= math.log(t) ** float(self.log_power)
        return out

    __call__ = evaluate

    def __truediv__(self, other: "DecayLaw") -> "DecayLaw":
        return DecayLaw(
            self.constant / other.constant,
            self.power - other.power,
            self.log_power - other.log_power,
            self.exp_rate - other.exp_rate,
        )

    def sqrt(self) -> "DecayLaw":
        return DecayLaw(
            math.sqrt(self.constant),
            self.power / 2.0,
            self.log_power / 2,
            self.exp_rate / 2.0,
        )

    def scaled(self, factor: float) -> "DecayLaw":
        return DecayLaw(self.constant * factor, self.power, self.log_power, self.exp_rate)

    def decays_faster_than(self, other: "DecayLaw") -> bool:
        """Dominance order: exp rate first, then power, then log power."""
        if self.exp_rate != other.exp_rate:
            return self.exp_rate > other.exp_rate
        if self.power != other.power:
            return self.power < other.power
        return self.log_power < other.log_power

    def __str__(self):
        parts = [f"{self.constant:.6g}", f"t^{self.power:g}"]
        if self.log_power != 0:
            parts.append(f"(ln t)^{self.log_power}")
        if self.exp_rate != 0:
            parts.append(f"exp(-{self.exp_rate:g} t)")
        return " * ".join(parts)


def _expo(cfg: ModelConfig) -> ExponentialDelay:
    if not isinstance(cfg.delay, ExponentialDelay):
        raise DomainError("this operation requires an exponential reporting delay")
    return cfg.delay


def a_n_coeff_ln(alpha: float, beta: float, n: int) -> float:
    """log A_n = log[ alpha beta^n B(alpha, alpha+n+1) / (n! (alpha+n)) ]."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return (
        math.log(alpha)
        + n * math.log(beta)
        - ln_gamma(n + 1.0)
        - math.log(alpha + n)
        + ln_beta(alpha, alpha + n + 1.0)
    )


def a_n_coeff(alpha: float, beta: float, n: int) -> float:
    """Series coefficient A_n, computed in log space."""
    return math.exp(a_n_coeff_ln(alpha, beta, n))


def _mean_ln(cfg: ModelConfig, t: float, sc: SeriesControl) -> float:
    """log E[Z_delta(t)] for exponential delay (value is positive)."""
    beta = _expo(cfg).beta
    a, lam, d = cfg.alpha, cfg.lam, cfg.delta
    return (
        math.log(cfg.mu(1))
        + math.log(cfg.delay.laplace(d))
        - d * t
        + kummer_1f1_scaled_ln(a, 1.0 + a, beta * t, sc)
        + math.log(lam)
        + a * math.log(t)
        - ln_gamma(1.0 + a)
    )


def expo_mean_exact(
    cfg: ModelConfig, t: float, sc: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """E[Z_delta(t)] = mu_1 E[e^{-delta L}] e^{-(beta+delta) t}
    1F1(alpha, 1+alpha, beta t) m(t)."""
    if t <= 0:
        raise DomainError(f"t must be > 0, got {t}")
    return math.exp(_mean_ln(cfg, t, sc))


def expo_mean_asym(cfg: ModelConfig) -> DecayLaw:
    """E[Z_delta(t)] ~ mu_1 lam E[e^{-delta L}] / (beta Gamma(alpha))
    * e^{-delta t} t^(alpha-1)."""
    beta = _expo(cfg).beta
    a = cfg.alpha
    if not (0 < a < 1):
        raise DomainError("asymptotic law requires 0 < alpha < 1")
    C = cfg.mu(1) * cfg.lam * cfg.delay.laplace(cfg.delta) / (beta * math.exp(ln_gamma(a)))
    return DecayLaw(C, a - 1.0, Fraction(0), cfg.delta)


def _sum_certified(term_fn, what: str) -> float:
    """Sum term_fn(0), term_fn(1), ... under the truncation policy: stop
    once 50 consecutive terms each contribute < 1e-14 of the partial sum
    and a geometric bound from the last 10 term ratios certifies a
    relative tail < 1e-10; hard cap 2000 terms."""
    total = 0.0
    small_run = 0
    recent: list[float] = []
    for n in range(2000):
        term = term_fn(n)
        total += term
        recent.append(abs(term))
        if len(recent) > 11:
            recent.pop(0)
        if abs(term) < 1e-14 * max(abs(total), 1e-300):
            small_run += 1
        else:
            small_run = 0
        if small_run >= 50:
            ratios = [
                recent[i + 1] / recent[i]
                for i in range(len(recent) - 1)
                if recent[i] > 0.0
            ]
            ratio = max(ratios) if ratios else 0.0
            if ratio < 0.9:
                tail = abs(term) * ratio / (1.0 - ratio)
                if tail <= 1e-10 * max(abs(total), 1e-300):
                    return total
    raise TruncationError(
        f"{what} series not certified after 2000 terms",
        tail_estimate=abs(term) / max(abs(total), 1e-300),
    )


def expo_variance_exact(
    cfg: ModelConfig, t: float, sc: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """Var[Z_delta(t)] from the A_n series plus the second-moment term minus
    the squared mean, assembled in log space term by term."""
    if t <= 0:
        raise DomainError(f"t must be > 0, got {t}")
    beta = _expo(cfg).beta
    a, lam, d = cfg.alpha, cfg.lam, cfg.delta
    lap1 = cfg.delay.laplace(d)
    lap2 = cfg.delay.laplace(2.0 * d)
    z2 = 2.0 * beta * t
    ln_t = math.log(t)

    ln_pref1 = (
        math.log(2.0 * cfg.mu(1) ** 2 * lam**2 * a)
        + 2.0 * math.log(lap1)
        - 2.0 * ln_gamma(1.0 + a)
        - 2.0 * d * t
    )

    def term(n):
        return math.exp(
            ln_pref1
            + a_n_coeff_ln(a, beta, n)
            + (2.0 * a + n) * ln_t
            + kummer_1f1_scaled_ln(a, 2.0 * a + n + 1.0, z2, sc)
        )

    series = _sum_certified(term, "exponential-delay variance")
    ln_scaled_bt = kummer_1f1_scaled_ln(a, 1.0 + a, beta * t, sc)
    mu2_term = (
        cfg.mu(2) * lam * lap2 / math.exp(ln_gamma(1.0 + a))
        * math.exp(-2.0 * d * t + a * ln_t + ln_scaled_bt)
    )
    mean_sq = math.exp(2.0 * _mean_ln(cfg, t, sc))
    return series + mu2_term - mean_sq


def expo_variance_asym(cfg: ModelConfig) -> DecayLaw:
    """Var[Z_delta(t)] ~ (mu_1^2 lam^2 E[e^{-dL}]^2 / (beta^(alpha+1) Gamma(alpha))
    + mu_2 lam E[e^{-2dL}] / (beta Gamma(alpha))) e^{-2 delta t} t^(alpha-1)."""
    beta = _expo(cfg).beta
    a = cfg.alpha
    if not (0 < a < 1):
        raise DomainError("asymptotic law requires 0 < alpha < 1")
    g = math.exp(ln_gamma(a))
    C = (
        cfg.mu(1) ** 2 * cfg.lam**2 * cfg.delay.laplace(cfg.delta) ** 2
        / (beta ** (a + 1.0) * g)
        + cfg.mu(2) * cfg.lam * cfg.delay.laplace(2.0 * cfg.delta) / (beta * g)
    )
    return DecayLaw(C, a - 1.0, Fraction(0), 2.0 * cfg.delta)


def w_integral_ln(
    beta: float,
    s: float,
    n: int,
    t: float,
    alpha: float,
    ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL,
) -> float:
    """log W(2 beta s, n, t), with the t^(alpha+n) growth factored out so the
    quadrature never overflows:

        W = t^(alpha+n)/B(alpha, alpha+n+1)
            * int_0^1 e^{2 beta s y} y^(alpha-1) (1 - s y / t)^(alpha+n) dy.
    """
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    two_bs = 2.0 * beta * s
    ratio = s / t
    inv_a = 1.0 / alpha
    apn = alpha + n

    def integrand(u):
        y = u**inv_a
        return math.exp(two_bs * y + apn * math.log1p(-ratio * y)) if ratio * y < 1.0 else 0.0

    J = _quad(integrand, 0.0, 1.0, ctrl) / alpha
    return apn * math.log(t) - ln_beta(alpha, apn + 1.0) + math.log(J)


def w_integral(
    beta: float,
    s: float,
    n: int,
    t: float,
    alpha: float,
    ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL,
) -> float:
    """W(2 beta s, n, t); raises :class:`RangeError` where the plain value
    overflows (the log form stays available)."""
    ln = w_integral_ln(beta, s, n, t, alpha, ctrl)
    if ln > 709.0:
        raise RangeError(f"W(2*{beta}*{s}, {n}, {t}) overflows; use w_integral_ln")
    return math.exp(ln)


def expo_cov_exact(
    cfg: ModelConfig,
    s: float,
    t: float,
    sc: SeriesControl = DEFAULT_SERIES_CONTROL,
    ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL,
) -> float:
    """Cov[Z_delta(s), Z_delta(t)] for exponential delay, 0 < s <= t.

    The A_n series form is used while 2 beta t is moderate; past that the
    series needs O(beta t) terms, so the integral expressions it was
    expanded from are evaluated directly (in log space) instead.
    """
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    beta = _expo(cfg).beta
    a, lam, d = cfg.alpha, cfg.lam, cfg.delta
    lap1 = cfg.delay.laplace(d)
    lap2 = cfg.delay.laplace(2.0 * d)

    ln_pref1 = (
        math.log(cfg.mu(1) ** 2 * lam**2 * a)
        + 2.0 * math.log(lap1)
        - 2.0 * ln_gamma(1.0 + a)
    )
    mu2_term = (
        cfg.mu(2) * lam * lap2 / math.exp(ln_gamma(1.0 + a))
        * math.exp(
            -beta * (t - s) - 2.0 * d * t + a * math.log(s)
            + kummer_1f1_scaled_ln(a, 1.0 + a, beta * s, sc)
        )
    )
    mean_prod = math.exp(_mean_ln(cfg, s, sc) + _mean_ln(cfg, t, sc))

    if 2.0 * beta * t <= _COV_SERIES_MAX:
        ln_s = math.log(s)
        two_bs = 2.0 * beta * s

        def term(n):
            l1 = (
                (2.0 * a + n) * ln_s
                + kummer_1f1_scaled_ln(a, 2.0 * a + n + 1.0, two_bs, sc)
                - beta * (t - s)
            )
            l2 = a * ln_s + w_integral_ln(beta, s, n, t, a, ctrl) - beta * (s + t)
            return math.exp(
                ln_pref1 + a_n_coeff_ln(a, beta, n) - d * (s + t) + np.logaddexp(l1, l2)
            )

        series = _sum_certified(term, "exponential-delay covariance")
        return series + mu2_term - mean_prod

    # integral path: the two renewal integrals the series expands
    i1 = _cov_integral(cfg, s, t, which="t", sc=sc, ctrl=ctrl)
    i3 = _cov_integral(cfg, s, t, which="s", sc=sc, ctrl=ctrl)
    pref = math.exp(ln_pref1)
    return pref * (i1 + i3) + mu2_term - mean_prod


def _cov_integral(cfg, s, t, which, sc, ctrl):
    """e^{-(beta+delta)(s+t)} int_0^s e^{2 beta x} x^(alpha-1) (T-x)^alpha
    1F1(alpha, 1+alpha, beta (T-x)) dx with T = t ("t") or T = s ("s"),
    evaluated with the scaled Kummer form so only bounded exponents remain."""
    beta = _expo(cfg).beta
    a, d = cfg.alpha, cfg.delta
    T = t if which == "t" else s

    def f(x):
        lag = T - x
        if lag <= 0.0:
            return 0.0
        # exponent: 2 beta x - beta(s+t) + beta lag - delta(s+t)
        expo = beta * (2.0 * x - (s + t) + lag) - d * (s + t)
        return math.exp(
            expo + a * math.log(lag) + kummer_1f1_scaled_ln(a, 1.0 + a, beta * lag, sc)
        )

    if beta * s <= _LAYER_WIDTH:
        inv_a = 1.0 / a
        return _quad(lambda u: f(u**inv_a), 0.0, s**a, ctrl) / a
    V = _LAYER_WIDTH / beta
    return _quad(lambda v: f(s - v) * (s - v) ** (a - 1.0), 0.0, V, ctrl)


def expo_cov_asym(
    cfg: ModelConfig, s: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL
) -> DecayLaw:
    """Cov[Z_delta(s), Z_delta(t)] ~ C(s) e^{-delta t} t^(alpha-2) with

        C(s) = mu_1^2 lam (1-alpha) E[e^{-dL}]^2 / (beta Gamma(alpha))
               * e^{-(beta+delta) s} int_0^s e^{beta x} x dm(x).
    """
    beta = _expo(cfg).beta
    a, lam, d = cfg.alpha, cfg.lam, cfg.delta
    if not (0 < a < 1):
        raise DomainError("asymptotic law requires 0 < alpha < 1")
    if s <= 0:
        raise DomainError(f"s must be > 0, got {s}")
    # e^{-beta s} int_0^s e^{beta x} x dm(x) = lam/Gamma(a) int_0^V e^{-beta v}(s-v)^a dv
    V = min(s, _LAYER_WIDTH / beta)
    inner = (
        lam / math.exp(ln_gamma(a))
        * _quad(lambda v: math.exp(-beta * v) * (s - v) ** a, 0.0, V, ctrl)
    )
    C = (
        cfg.mu(1) ** 2 * lam * (1.0 - a) * cfg.delay.laplace(d) ** 2
        / (beta * math.exp(ln_gamma(a)))
        * math.exp(-d * s)
        * inner
    )
    return DecayLaw(C, a - 2.0, Fraction(0), d)
