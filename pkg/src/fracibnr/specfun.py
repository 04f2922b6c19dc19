"""Special-function kernel: Gamma/Beta family, hypergeometrics, Mittag-Leffler.

Everything downstream (closed-form exponential-delay moments, Pareto tail
integrals, renewal survival) reduces to a small set of classical special
functions evaluated in regimes stock libraries do not cover well:

* the Kummer function ``1F1(a, b, z)`` at arguments up to ``z ~ 1e6`` where
  the plain value overflows -- evaluated in log space, with the exponentially
  scaled form ``e^{-z} 1F1`` available for assembling damped products;
* the incomplete Beta function with *non-positive* second parameter (the
  integrand ``(1-t)^{b-1}`` is still integrable on ``[0, x]`` for ``x < 1``),
  which is exactly the Pareto delay tail integral;
* the Mittag-Leffler function ``E_alpha(-x)`` on the negative axis, the
  interarrival survival of the fractional Poisson process.

Gamma and Beta themselves are delegated to :mod:`scipy.special`; all series
evaluators obey a :class:`SeriesControl` and raise :class:`TruncationError`
rather than silently truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc
from scipy.integrate import quad

from .errors import DivergenceError, DomainError, RangeError, TruncationError

__all__ = [
    "SeriesControl",
    "DEFAULT_SERIES_CONTROL",
    "gamma_fn",
    "ln_gamma",
    "beta_fn",
    "ln_beta",
    "incomplete_beta",
    "gauss_2f1",
    "kummer_1f1",
    "kummer_1f1_ln",
    "kummer_1f1_scaled_ln",
    "mittag_leffler",
]

# Overflow threshold of Gamma(x) in double precision.
_GAMMA_OVERFLOW_X = 171.624376956

# Largest |z| at which the alternating Taylor series of 1F1 is summed
# directly; cancellation grows like e^{2|z|}*eps, ~1e-9 relative at |z|=8.
_ALT_TAYLOR_MAX = 8.0

# 1F1 large-argument switch: asymptotic expansion once z exceeds this bound
# (b-dependent; the expansion needs z to dominate b - a).
def _asym_threshold(a: float, b: float) -> float:
    return max(40.0, 30.0 + 2.5 * (b - a))


@dataclass(frozen=True)
class SeriesControl:
    """Convergence policy for series evaluators.

    Attributes:
        rel_tol: target relative tolerance in (0, 1).
        max_terms: hard cap on summed terms; hitting it raises
            :class:`TruncationError` (silent truncation is forbidden).
    """

    rel_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must be in (0,1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_SERIES_CONTROL = SeriesControl()


def gamma_fn(x: float) -> float:
    """Gamma function for positive real argument.

    Raises:
        DomainError: if ``x <= 0``.
        RangeError: if ``Gamma(x)`` overflows double precision (x > ~171.6).
    """
    if x <= 0.0:
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    if x > _GAMMA_OVERFLOW_X:
        raise RangeError(f"gamma_fn({x}) exceeds double-precision range")
    return float(sc.gamma(x))


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return float(sc.gammaln(x))


def beta_fn(a: float, b: float) -> float:
    """Beta function B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), computed in log space."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"beta_fn requires a, b > 0, got ({a}, {b})")
    return math.exp(ln_beta(a, b))


def ln_beta(a: float, b: float) -> float:
    """log B(a, b) for a, b > 0."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"ln_beta requires a, b > 0, got ({a}, {b})")
    return float(sc.gammaln(a) + sc.gammaln(b) - sc.gammaln(a + b))


def _gamma_signed_ln(x: float) -> tuple[float, float]:
    """(sign, log|Gamma(x)|) for real non-pole x, negative arguments allowed."""
    if x > 0.0:
        return 1.0, float(sc.gammaln(x))
    if x == math.floor(x):
        raise DomainError(f"Gamma pole at {x}")
    return float(sc.gammasgn(x)), float(sc.gammaln(x))


def gamma_signed(x: float) -> float:
    """Gamma(x) for real non-pole x, including negative arguments."""
    s, ln = _gamma_signed_ln(x)
    return s * math.exp(ln)


def incomplete_beta(
    a: float, b: float, x: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """Incomplete Beta integral B(a, b, x) = int_0^x t^{a-1} (1-t)^{b-1} dt.

    Unlike the regularized scipy routine this accepts ``b <= 0`` as long as
    ``x < 1`` (the endpoint singularity is then outside the domain), which is
    the form the Pareto-delay tail integral takes.

    The evaluation splits at x = 1/2: a hypergeometric power series below,
    and an exact binomially-expanded tail integral above, so accuracy does
    not degrade as ``x -> 1`` where the integrand blows up.
    """
    if a <= 0.0:
        raise DomainError(f"incomplete_beta requires a > 0, got {a}")
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"incomplete_beta requires x in [0,1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        if b <= 0.0:
            raise DivergenceError(
                f"B(a, b, 1) diverges for b <= 0 (b={b}); the integrand "
                "(1-t)^{b-1} is not integrable at t=1"
            )
        return beta_fn(a, b)

    xs = min(x, 0.5)
    # sum_k (1-b)_k / k! * xs^{a+k} / (a+k); ratio -> xs <= 1/2.
    total = 0.0
    coef = 1.0
    ln_xs = math.log(xs)
    converged = False
    for k in range(control.max_terms):
        term = coef * math.exp((a + k) * ln_xs) / (a + k)
        total += term
        if abs(term) <= control.rel_tol * abs(total) and k >= 2:
            converged = True
            break
        coef *= (1.0 - b + k) / (k + 1.0)
    if not converged:
        raise TruncationError(
            f"incomplete_beta head series hit {control.max_terms} terms",
            tail_estimate=abs(term / max(abs(total), 1e-300)),
        )
    if x <= 0.5:
        return total

    # Tail over [1-x, 1/2] in u = 1-t:  int u^{b-1} (1-u)^{a-1} du with
    # (1-u)^{a-1} = sum_k (1-a)_k/k! u^k, integrated term by term exactly.
    eps = 1.0 - x
    coef = 1.0
    tail = 0.0
    small_count = 0
    converged = False
    for k in range(control.max_terms):
        e = k + b
        if abs(e) < 1e-12:
            piece = math.log(0.5 / eps)
        else:
            piece = (0.5**e - eps**e) / e
        term = coef * piece
        tail += term
        if e > 0 and abs(term) <= control.rel_tol * max(abs(total + tail), 1e-300):
            small_count += 1
            if small_count >= 3:
                converged = True
                break
        else:
            small_count = 0
        coef *= (1.0 - a + k) / (k + 1.0)
    if not converged:
        raise TruncationError(
            f"incomplete_beta tail series hit {control.max_terms} terms",
            tail_estimate=abs(term / max(abs(total + tail), 1e-300)),
        )
    return total + tail


def gauss_2f1(
    a: float, b: float, c: float, z: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) for z in [0, 1].

    Power series for z < 1; at z = 1 the Gamma closed form, which requires
    ``c - a - b > 0``.
    """
    if c <= 0.0 and c == math.floor(c):
        raise DomainError(f"2F1 undefined at non-positive integer c={c}")
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"gauss_2f1 requires z in [0,1], got {z}")
    if z == 1.0:
        if c - a - b <= 0.0:
            raise DomainError(
                f"2F1(a,b;c;1) requires c-a-b > 0, got {c - a - b}"
            )
        sg = 1.0
        ln = 0.0
        for val, up in ((c, True), (c - a - b, True), (c - a, False), (c - b, False)):
            s, l = _gamma_signed_ln(val)
            sg *= s
            ln += l if up else -l
        return sg * math.exp(ln)

    total = 1.0
    term = 1.0
    for k in range(control.max_terms):
        term *= (a + k) * (b + k) * z / ((c + k) * (k + 1.0))
        total += term
        if abs(term) <= control.rel_tol * abs(total) and k >= 2:
            return total
    raise TruncationError(
        f"gauss_2f1 series hit {control.max_terms} terms at z={z}",
        tail_estimate=abs(term / max(abs(total), 1e-300)),
    )


def _ln_1f1_taylor_pos(a: float, b: float, z: float, control: SeriesControl) -> float:
    """log 1F1(a,b,z) for z > 0 by log-sum-exp over the (positive) Taylor terms."""
    ln_term = 0.0
    ln_sum = 0.0
    for k in range(10 * control.max_terms):
        ratio = (a + k) * z / ((b + k) * (k + 1.0))
        ln_term += math.log(ratio)
        ln_sum = np.logaddexp(ln_sum, ln_term)
        if ratio < 1.0 and ln_term < ln_sum + math.log(control.rel_tol):
            return float(ln_sum)
    raise TruncationError(f"1F1 Taylor series failed to converge at z={z}")


def _ln_1f1_asym_pos(a: float, b: float, z: float, control: SeriesControl) -> float:
    """log 1F1(a,b,z) via the large-z expansion
    1F1 ~ Gamma(b)/Gamma(a) e^z z^{a-b} sum_k (b-a)_k (1-a)_k / (k! z^k)."""
    s = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1000):
        term *= (b - a + k) * (1.0 - a + k) / ((k + 1.0) * z)
        if abs(term) >= prev:
            # asymptotic series started diverging before reaching rel_tol
            if abs(term) > control.rel_tol * abs(s):
                raise TruncationError(
                    f"1F1 asymptotic series stalled at accuracy {abs(term / s):.2e} "
                    f"(z={z}, b={b})",
                    tail_estimate=abs(term / s),
                )
            break
        s += term
        prev = abs(term)
        if abs(term) <= control.rel_tol * abs(s):
            break
    return float(sc.gammaln(b) - sc.gammaln(a) + z + (a - b) * math.log(z) + math.log(s))


def _1f1_alt_taylor(a: float, b: float, z: float, control: SeriesControl) -> float:
    """1F1(a,b,z) for moderate z < 0 by direct alternating summation."""
    total = 1.0
    term = 1.0
    for k in range(control.max_terms):
        term *= (a + k) * z / ((b + k) * (k + 1.0))
        total += term
        if abs(term) <= control.rel_tol * max(abs(total), 1e-300) and k >= 4:
            return total
    raise TruncationError(f"1F1 alternating series failed to converge at z={z}")


def kummer_1f1_ln(
    a: float, b: float, z: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> tuple[float, str]:
    """(log 1F1(a, b, z), regime) for b > a > 0.

    Regimes: ``taylor`` (power series, log-accumulated for z > 0),
    ``asymptotic`` (large-z expansion), ``alternating`` (direct series for
    moderate negative z), and ``transform+...`` (Kummer transform
    ``1F1(a,b,z) = e^z 1F1(b-a,b,-z)`` applied first for large negative z).
    """
    if not (b > a > 0.0):
        raise DomainError(f"kummer_1f1 requires b > a > 0, got a={a}, b={b}")
    if z == 0.0:
        return 0.0, "taylor"
    if z > 0.0:
        if z >= _asym_threshold(a, b):
            return _ln_1f1_asym_pos(a, b, z, control), "asymptotic"
        return _ln_1f1_taylor_pos(a, b, z, control), "taylor"
    if z >= -_ALT_TAYLOR_MAX:
        val = _1f1_alt_taylor(a, b, z, control)
        if val <= 0.0:
            raise TruncationError(f"1F1 alternating series lost all precision at z={z}")
        return math.log(val), "alternating"
    # Kummer transform onto the positive axis: e^z * 1F1(b-a, b, -z).
    ln_pos, regime = kummer_1f1_ln(b - a, b, -z, control)
    return z + ln_pos, f"transform+{regime}"


def kummer_1f1(
    a: float, b: float, z: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """Kummer confluent hypergeometric 1F1(a, b, z) for b > a > 0.

    Raises:
        RangeError: if the value overflows double precision (use
            :func:`kummer_1f1_ln` or :func:`kummer_1f1_scaled_ln` instead).
    """
    ln, _ = kummer_1f1_ln(a, b, z, control)
    if ln > 709.0:
        raise RangeError(
            f"1F1({a},{b},{z}) = exp({ln:.1f}) overflows; use kummer_1f1_ln"
        )
    return math.exp(ln)


def kummer_1f1_scaled_ln(
    a: float, b: float, z: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """log of the damped product e^{-z} 1F1(a, b, z) for z >= 0.

    This is the bounded combination in which the Kummer function enters all
    discounted-moment formulas, so no overflow occurs for any z.
    """
    if z < 0.0:
        raise DomainError("kummer_1f1_scaled_ln requires z >= 0")
    if z == 0.0:
        return 0.0
    if z >= _asym_threshold(a, b):
        # asymptotic form minus z: the e^z factor cancels analytically
        ln = _ln_1f1_asym_pos(a, b, z, control)
        return ln - z
    return _ln_1f1_taylor_pos(a, b, z, control) - z


def _ml_series(alpha: float, x: float, control: SeriesControl) -> float:
    """E_alpha(-x) by direct summation; caller guarantees x^(1/alpha) small."""
    total = 0.0
    ln_x = math.log(x) if x > 0 else -math.inf
    peaked = False
    prev = -math.inf
    for k in range(control.max_terms):
        ln_t = k * ln_x - float(sc.gammaln(alpha * k + 1.0))
        total += (-1.0) ** k * math.exp(ln_t)
        if ln_t < prev:
            peaked = True
        if peaked and ln_t < math.log(1e-18):
            return total
        prev = ln_t
    raise TruncationError(f"Mittag-Leffler series failed to converge at x={x}")


def _ml_spectral(alpha: float, x: float) -> float:
    """E_alpha(-x) from the spectral (completely monotone) representation

        E_alpha(-x) = sin(pi alpha)/(pi alpha)
                      * int_0^inf exp(-(u x)^(1/alpha)) / (u^2 + 2 u cos(pi alpha) + 1) du.
    """
    phi = alpha * math.pi
    cphi = math.cos(phi)
    inv_alpha = 1.0 / alpha

    def f(u):
        return math.exp(-((u * x) ** inv_alpha)) / (u * u + 2.0 * u * cphi + 1.0)

    pts = sorted({p for p in (1.0, -cphi, 1.0 / x, 40.0**alpha / x) if 0.0 < p})
    hi = max(2.0, 2.0 * pts[-1])
    inner = quad(f, 0.0, hi, points=[p for p in pts if p < hi], limit=200,
                 epsabs=1e-14, epsrel=1e-12)[0]
    outer = quad(f, hi, np.inf, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
    return math.sin(phi) / (alpha * math.pi) * (inner + outer)


def _ml_tail(alpha: float, x: float) -> float:
    """Algebraic tail sum_{k>=1} (-1)^{k-1} x^{-k} / Gamma(1 - alpha k),
    truncated at its smallest term (asymptotic, large x)."""
    total = 0.0
    prev = math.inf
    for k in range(1, 80):
        arg = 1.0 - alpha * k
        if arg == math.floor(arg):
            continue  # Gamma pole: the term vanishes
        s, ln = _gamma_signed_ln(arg)
        term = (-1.0) ** (k - 1) * s * math.exp(-k * math.log(x) - ln)
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
    return total


def mittag_leffler(
    alpha: float, z: float, control: SeriesControl = DEFAULT_SERIES_CONTROL
) -> float:
    """Mittag-Leffler function E_alpha(z) = sum_k z^k / Gamma(alpha k + 1)
    on the negative half-line, for alpha in (0, 1].

    Completely monotone in -z: the returned value lies in [0, 1].  Direct
    series for small |z|; the spectral integral representation beyond the
    window where alternating-series cancellation sets in.
    """
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"mittag_leffler requires alpha in (0,1], got {alpha}")
    if z > 0.0:
        raise DomainError(f"mittag_leffler requires z <= 0, got {z}")
    if z == 0.0:
        return 1.0
    if alpha == 1.0:
        return math.exp(z)
    x = -z
    if x ** (1.0 / alpha) <= 10.0:
        val = _ml_series(alpha, x, control)
    elif alpha > 0.99:
        val = _ml_tail(alpha, x)
    else:
        val = _ml_spectral(alpha, x)
    if val < -1e-12 or val > 1.0 + 1e-12:
        raise TruncationError(f"Mittag-Leffler value {val} escaped [0,1] at ({alpha}, {z})")
    return min(max(val, 0.0), 1.0)
