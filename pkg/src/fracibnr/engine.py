"""Distribution-agnostic evaluation of discounted IBNR moments.

The total discounted IBNR claim process is

    Z_delta(t) = sum_i e^{-delta (T_i + L_i)} 1{T_i <= t < T_i + L_i} X_i

with renewal arrivals T_i, iid reporting delays L_i and iid claim marks X_i,
all mutually independent.  Every moment of interest reduces to integrals of
the form ``int_0^t g(x) dm(x)`` against the renewal measure, with the delay
entering only through the Dickson-Hipp transform

    T_u w(v) = int_v^inf e^{-u(y-v)} w(y) dy

of its density ``w``.  This module implements:

* ``mean_ibnr``       -- the first moment,
* ``marginal_moment`` -- the recursion for E[Z_delta^n(t)],
* ``joint_moment``    -- the recursion for E[Z_delta^n(s) Z_delta^m(t)],
* ``covariance`` / ``variance`` / ``correlation`` -- direct evaluation of
  the closed covariance expression (three integrals minus the mean
  product), deliberately *not* routed through ``joint_moment`` so the two
  paths cross-validate each other.

The renewal density behaves like ``x^(alpha-1)`` at zero; every quadrature
against ``dm`` substitutes ``u = x^alpha`` so the transformed integrand is
bounded.  Lower-order moment functions appearing inside integrands are
sampled once on Chebyshev grids (scaled by ``t^alpha`` so the sampled
function is smooth through zero) and read back by barycentric
interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from ._chebyshev import ChebyshevInterpolant, cheb_nodes
from .errors import DomainError, NumericalError, QuadratureError
from .renewal import RenewalModel
from .specfun import ln_gamma

__all__ = [
    "DelayDistribution",
    "ExponentialDelay",
    "ParetoDelay",
    "CustomDelay",
    "ModelConfig",
    "QuadratureControl",
    "dh_transform",
    "mean_ibnr",
    "marginal_moment",
    "joint_moment",
    "covariance",
    "variance",
    "correlation",
]


@dataclass(frozen=True)
class QuadratureControl:
    """Tolerances and sizes for the quadrature/memoization machinery."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_depth: int = 200
    grid_points: int = 257

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.max_depth < 10:
            raise DomainError("max_depth must be >= 10")
        if self.grid_points < 8:
            raise DomainError("grid_points must be >= 8")


DEFAULT_QUADRATURE_CONTROL = QuadratureControl()

# Discount factors below this are treated as hard zero in tail cutoffs.
_EXP_NEGLIGIBLE = math.log(1e-16)


def _quad(f, a, b, ctrl: QuadratureControl, points=None):
    out = quad(
        f,
        a,
        b,
        epsabs=ctrl.abs_tol,
        epsrel=ctrl.rel_tol,
        limit=ctrl.max_depth,
        points=points,
        full_output=1,
    )
    val, abserr = out[0], out[1]
    if len(out) > 3 and abserr > max(100 * ctrl.abs_tol, 1e-6 * abs(val)):
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not converge: {out[3]} (abserr={abserr:.2e})"
        )
    return val


class DelayDistribution:
    """Base class of the reporting-delay family.

    Subclasses supply the survival function, the density, the mean, and the
    Dickson-Hipp transform ``dh(u, v) = T_u w(v)``; closed forms are used
    wherever they exist, adaptive quadrature on the damped tail otherwise.
    """

    def survival(self, x):
        raise NotImplementedError

    def density(self, x):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def laplace(self, u: float) -> float:
        """E[e^{-u L}] = T_u w(0)."""
        return self.dh(u, 0.0)

    def dh(self, u: float, v: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL) -> float:
        if u < 0 or v < 0:
            raise DomainError("dh requires u, v >= 0")
        if u == 0.0:
            return float(self.survival(v))
        return self._dh_quad(u, v, ctrl)

    def _dh_quad(self, u: float, v: float, ctrl: QuadratureControl) -> float:
        cutoff = -_EXP_NEGLIGIBLE / u
        return _quad(lambda z: math.exp(-u * z) * float(self.density(v + z)), 0.0, cutoff, ctrl)

    def dh_vec(self, u: float, v: np.ndarray, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL):
        """Vectorized ``dh`` over an array of lags (closed form or per-point quad)."""
        if u == 0.0:
            return np.asarray(self.survival(v), dtype=float)
        return np.array([self.dh(u, float(vi), ctrl) for vi in np.atleast_1d(v)])

    def survival_integral(self, a: float, b: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL) -> float:
        """int_a^b survival(x) dx."""
        return _quad(lambda x: float(self.survival(x)), a, b, ctrl)


@dataclass(frozen=True)
class ExponentialDelay(DelayDistribution):
    """Exponential reporting delay with rate ``beta`` (mean 1/beta)."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError(f"beta must be > 0, got {self.beta}")

    def survival(self, x):
        return np.exp(-self.beta * np.asarray(x, dtype=float))

    def density(self, x):
        return self.beta * np.exp(-self.beta * np.asarray(x, dtype=float))

    def mean(self) -> float:
        return 1.0 / self.beta

    def laplace(self, u: float) -> float:
        return self.beta / (self.beta + u)

    def dh(self, u, v, ctrl=DEFAULT_QUADRATURE_CONTROL):
        if u < 0 or v < 0:
            raise DomainError("dh requires u, v >= 0")
        return self.beta / (self.beta + u) * math.exp(-self.beta * v)

    def dh_vec(self, u, v, ctrl=DEFAULT_QUADRATURE_CONTROL):
        return self.beta / (self.beta + u) * np.exp(-self.beta * np.asarray(v, dtype=float))

    def survival_integral(self, a, b, ctrl=DEFAULT_QUADRATURE_CONTROL):
        return (math.exp(-self.beta * a) - math.exp(-self.beta * b)) / self.beta


@dataclass(frozen=True)
class ParetoDelay(DelayDistribution):
    """Pareto reporting delay with survival (theta/(theta+x))^eta."""

    theta: float
    eta: float

    def __post_init__(self):
        if self.theta <= 0 or self.eta <= 0:
            raise DomainError(f"theta, eta must be > 0, got ({self.theta}, {self.eta})")

    def survival(self, x):
        return (self.theta / (self.theta + np.asarray(x, dtype=float))) ** self.eta

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return self.eta * self.theta**self.eta / (self.theta + x) ** (self.eta + 1.0)

    def mean(self) -> float:
        if self.eta <= 1.0:
            return math.inf
        return self.theta / (self.eta - 1.0)

    def survival_integral(self, a, b, ctrl=DEFAULT_QUADRATURE_CONTROL):
        th, eta = self.theta, self.eta
        if eta == 1.0:
            return th * math.log((th + b) / (th + a))
        return th**eta * ((th + b) ** (1 - eta) - (th + a) ** (1 - eta)) / (1 - eta)


@dataclass(frozen=True)
class CustomDelay(DelayDistribution):
    """Delay given by tabulated survival and density values.

    The survival table is interpolated with a monotone cubic; beyond the
    last abscissa the survival is taken as zero.  Tables are tuples so the
    distribution stays hashable for the memoization caches.
    """

    xs: tuple
    survival_values: tuple
    density_values: tuple

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        sv = np.asarray(self.survival_values, dtype=float)
        dv = np.asarray(self.density_values, dtype=float)
        if xs.ndim != 1 or xs.size < 4 or xs.shape != sv.shape or xs.shape != dv.shape:
            raise DomainError("xs, survival_values, density_values must be equal-length (>=4)")
        if xs[0] != 0.0 or abs(sv[0] - 1.0) > 1e-12:
            raise DomainError("tables must start at x=0 with survival(0)=1")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("xs must be strictly increasing")
        if np.any(np.diff(sv) > 1e-12) or np.any(sv < -1e-12):
            raise DomainError("survival table must be nonincreasing and nonnegative")
        if np.any(dv < 0):
            raise DomainError("density table must be nonnegative")

    @cached_property
    def _surv_interp(self):
        return PchipInterpolator(np.asarray(self.xs), np.asarray(self.survival_values))

    @cached_property
    def _dens_interp(self):
        return PchipInterpolator(np.asarray(self.xs), np.asarray(self.density_values))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        hi = self.xs[-1]
        out = np.where(x >= hi, 0.0, np.clip(self._surv_interp(np.minimum(x, hi)), 0.0, 1.0))
        return out if out.ndim else float(out)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        hi = self.xs[-1]
        out = np.where(x >= hi, 0.0, np.maximum(self._dens_interp(np.minimum(x, hi)), 0.0))
        return out if out.ndim else float(out)

    def mean(self) -> float:
        return self.survival_integral(0.0, float(self.xs[-1]))

    def _dh_quad(self, u, v, ctrl):
        hi = float(self.xs[-1])
        if v >= hi:
            return 0.0
        cutoff = min(hi - v, -_EXP_NEGLIGIBLE / u)
        return _quad(lambda z: math.exp(-u * z) * float(self.density(v + z)), 0.0, cutoff, ctrl)


@dataclass(frozen=True)
class ModelConfig:
    """Full problem instance.

    Attributes:
        renewal: fractional Poisson arrival model.
        delta: constant force of interest (>= 0).
        delay: reporting-delay distribution.
        claim_moments: (mu_1, ..., mu_K); mu_0 = 1 is implied.
    """

    renewal: RenewalModel
    delta: float
    delay: DelayDistribution
    claim_moments: tuple

    def __post_init__(self):
        if self.delta < 0:
            raise DomainError(f"delta must be >= 0, got {self.delta}")
        mus = tuple(float(m) for m in self.claim_moments)
        object.__setattr__(self, "claim_moments", mus)
        if len(mus) < 1:
            raise DomainError("need at least the first claim moment")
        if any(m <= 0 for m in mus):
            raise DomainError("claim moments of a nonnegative claim must be positive")
        if len(mus) >= 2 and mus[1] < mus[0] ** 2 * (1 - 1e-12):
            raise DomainError(f"moment ordering violated: mu2={mus[1]} < mu1^2={mus[0]**2}")

    def mu(self, k: int) -> float:
        if k == 0:
            return 1.0
        if k > len(self.claim_moments):
            raise DomainError(
                f"insufficient claim moments: order {k} requested, "
                f"{len(self.claim_moments)} supplied"
            )
        return self.claim_moments[k - 1]

    @property
    def alpha(self) -> float:
        return self.renewal.alpha

    @property
    def lam(self) -> float:
        return self.renewal.lam


def dh_transform(
    delay: DelayDistribution,
    u: float,
    v: float,
    ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL,
) -> float:
    """Dickson-Hipp transform T_u w(v) of the delay density."""
    return delay.dh(u, v, ctrl)


def _dm_weight(cfg: ModelConfig) -> float:
    # lam / Gamma(1 + alpha): the constant in dm(x) after u = x^alpha
    return cfg.lam / math.exp(ln_gamma(1.0 + cfg.alpha))


def _renewal_integral(g, t: float, cfg: ModelConfig, ctrl: QuadratureControl) -> float:
    """int_0^t g(x) dm(x), with the x^(alpha-1) endpoint absorbed by u = x^alpha."""
    if t <= 0.0:
        return 0.0
    a = cfg.alpha
    if a == 1.0:
        return cfg.lam * _quad(g, 0.0, t, ctrl)
    inv_a = 1.0 / a
    return _dm_weight(cfg) * _quad(lambda u: g(u**inv_a), 0.0, t**a, ctrl)


# Composite Gauss-Legendre rule used when filling memoization grids: dyadic
# panels graded toward the upper endpoint, where delay transforms of the lag
# t - x concentrate into a boundary layer once the domain is much longer
# than the delay scale.  Relative panel resolution reaches 2^-22.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _panel_nodes(uppers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(nodes, weights) of shape (len(uppers), n_pts) for int_0^{upper}."""
    edges = [0.0] + [1.0 - 0.5**k for k in range(1, 23)] + [1.0]
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    half = (hi - lo) / 2.0
    mid = (hi + lo) / 2.0
    u01 = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w01 = (half[:, None] * _GL_W[None, :]).ravel()
    return uppers[:, None] * u01[None, :], uppers[:, None] * w01[None, :]


def _renewal_integral_nodes(g_vec, ts: np.ndarray, cfg: ModelConfig) -> np.ndarray:
    """Vectorized int_0^{ts[j]} g(x, j) dm(x) for a batch of upper limits.

    ``g_vec(x_mat)`` receives the (n_ts, n_pts) matrix of abscissae and must
    evaluate elementwise.
    """
    a = cfg.alpha
    ts = np.asarray(ts, dtype=float)
    if a == 1.0:
        x, w = _panel_nodes(ts)
        return cfg.lam * np.sum(w * g_vec(x), axis=1)
    u, w = _panel_nodes(ts**a)
    x = u ** (1.0 / a)
    return _dm_weight(cfg) * np.sum(w * g_vec(x), axis=1)


def mean_ibnr(
    cfg: ModelConfig, t: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL
) -> float:
    """E[Z_delta(t)] = mu_1 e^{-delta t} int_0^t T_delta w(t-x) dm(x)."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    d = cfg.delta
    val = _renewal_integral(lambda x: cfg.delay.dh(d, t - x, ctrl), t, cfg, ctrl)
    return cfg.mu(1) * math.exp(-d * t) * val


@lru_cache(maxsize=64)
def _mean_interp(cfg: ModelConfig, T: float, ctrl: QuadratureControl) -> ChebyshevInterpolant:
    """Interpolant of E[Z_delta(tau)]/tau^alpha on [0, T] (smooth through 0)."""
    nodes = cheb_nodes(ctrl.grid_points, 0.0, T)
    d = cfg.delta
    ts = nodes[1:]

    def g_vec(x_mat):
        lag = ts[:, None] - x_mat
        return cfg.delay.dh_vec(d, lag, ctrl)

    # integrand of the mean with the e^{-delta t} prefactor applied after
    vals = _renewal_integral_nodes(lambda x: g_vec(x), ts, cfg)
    scaled = cfg.mu(1) * np.exp(-d * ts) * vals / ts**cfg.alpha
    at_zero = cfg.mu(1) * cfg.delay.laplace(d) * _dm_weight(cfg)
    return ChebyshevInterpolant(nodes, np.concatenate([[at_zero], scaled]))


def variance(
    cfg: ModelConfig, t: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL
) -> float:
    """Var[Z_delta(t)] by direct evaluation of the two renewal integrals
    minus the squared mean; never clamped, a materially negative result
    raises :class:`NumericalError`."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    d = cfg.delta
    if cfg.renewal.is_poisson and d == 0.0:
        return cfg.lam * cfg.mu(2) * cfg.delay.survival_integral(0.0, t, ctrl)

    def first_integrand(x):
        return (
            math.exp(-d * x)
            * mean_ibnr(cfg, t - x, ctrl)
            * cfg.delay.dh(d, t - x, ctrl)
        )

    term1 = 2.0 * cfg.mu(1) * math.exp(-d * t) * _renewal_integral(first_integrand, t, cfg, ctrl)
    term2 = (
        cfg.mu(2)
        * math.exp(-2.0 * d * t)
        * _renewal_integral(lambda x: cfg.delay.dh(2.0 * d, t - x, ctrl), t, cfg, ctrl)
    )
    m = mean_ibnr(cfg, t, ctrl)
    out = term1 + term2 - m * m
    if out < 0.0:
        if abs(out) > max(1e4 * ctrl.abs_tol, 1e-7 * (term1 + term2)):
            raise NumericalError(
                f"variance came out negative ({out:.3e}); quadrature failure"
            )
        out = 0.0
    return out


def covariance(
    cfg: ModelConfig, s: float, t: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL
) -> float:
    """Cov[Z_delta(s), Z_delta(t)] for 0 < s <= t, by direct evaluation of
    the three-integral expression minus the mean product (not routed
    through ``joint_moment``, so the two paths can be cross-checked)."""
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    d = cfg.delta
    if cfg.renewal.is_poisson and d == 0.0:
        return cfg.lam * cfg.mu(2) * cfg.delay.survival_integral(t - s, t, ctrl)

    def i1(x):
        return math.exp(-d * x) * mean_ibnr(cfg, t - x, ctrl) * cfg.delay.dh(d, s - x, ctrl)

    def i3(x):
        return math.exp(-d * x) * mean_ibnr(cfg, s - x, ctrl) * cfg.delay.dh(d, t - x, ctrl)

    term1 = cfg.mu(1) * math.exp(-d * s) * _renewal_integral(i1, s, cfg, ctrl)
    term2 = (
        cfg.mu(2)
        * math.exp(-2.0 * d * t)
        * _renewal_integral(lambda x: cfg.delay.dh(2.0 * d, t - x, ctrl), s, cfg, ctrl)
    )
    term3 = cfg.mu(1) * math.exp(-d * t) * _renewal_integral(i3, s, cfg, ctrl)
    return term1 + term2 + term3 - mean_ibnr(cfg, s, ctrl) * mean_ibnr(cfg, t, ctrl)


def correlation(
    cfg: ModelConfig, s: float, t: float, ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL
) -> float:
    """Corr[Z_delta(s), Z_delta(t)] = Cov / sqrt(Var(s) Var(t)), checked
    against [-1, 1] (violations beyond 1e-6 raise)."""
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    vs = variance(cfg, s, ctrl)
    vt = variance(cfg, t, ctrl)
    if vs <= 0.0 or vt <= 0.0:
        raise NumericalError("correlation undefined: zero variance")
    rho = covariance(cfg, s, t, ctrl) / math.sqrt(vs * vt)
    if abs(rho) > 1.0 + 1e-6:
        raise NumericalError(f"correlation {rho} escaped [-1, 1]")
    return min(1.0, max(-1.0, rho))


# ---------------------------------------------------------------------------
# moment recursions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _marginal_interp(cfg: ModelConfig, order: int, T: float, ctrl: QuadratureControl):
    """Interpolant of E[Z_delta^order(tau)]/tau^alpha on [0, T]."""
    if order == 1:
        return _mean_interp(cfg, T, ctrl)
    d = cfg.delta
    a = cfg.alpha
    nodes = cheb_nodes(ctrl.grid_points, 0.0, T)
    ts = nodes[1:]
    lower = [None] + [_marginal_interp(cfg, i, T, ctrl) for i in range(1, order)]

    total = np.zeros_like(ts)
    for i in range(order):
        coef = cfg.mu(order - i) * math.comb(order, i)
        pref = coef * np.exp(-(order - i) * d * ts)

        def g_vec(x_mat, i=i):
            lag = ts[:, None] - x_mat
            out = np.exp(-i * d * x_mat) * cfg.delay.dh_vec((order - i) * d, lag, ctrl)
            if i >= 1:
                out = out * np.where(lag > 0, lag, 0.0) ** a * lower[i](np.clip(lag, 0.0, T))
            return out

        total += pref * _renewal_integral_nodes(g_vec, ts, cfg)

    at_zero = cfg.mu(order) * cfg.delay.laplace(order * d) * _dm_weight(cfg)
    return ChebyshevInterpolant(nodes, np.concatenate([[at_zero], total / ts**a]))


def marginal_moment(
    cfg: ModelConfig,
    n: int,
    t: float,
    ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL,
) -> float:
    """E[Z_delta^n(t)] via the renewal recursion; E[Z^0] = 1.

    Lower-order moment functions are precomputed on a Chebyshev grid over
    [0, t] and interpolated inside the integrand; the outer integral is
    adaptive.
    """
    if n < 0:
        raise DomainError(f"moment order must be >= 0, got {n}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    cfg.mu(n)  # raises if claim moments are insufficient
    if n == 0:
        return 1.0
    if t == 0.0:
        return 0.0
    if n == 1:
        return mean_ibnr(cfg, t, ctrl)
    d = cfg.delta
    a = cfg.alpha
    lower = [None] + [_marginal_interp(cfg, i, t, ctrl) for i in range(1, n)]
    total = 0.0
    for i in range(n):
        coef = cfg.mu(n - i) * math.comb(n, i) * math.exp(-(n - i) * d * t)

        def integrand(x, i=i):
            lag = t - x
            val = math.exp(-i * d * x) * cfg.delay.dh((n - i) * d, lag, ctrl)
            if i >= 1:
                val *= lag**a * float(lower[i](min(lag, t)))
            return val

        total += coef * _renewal_integral(integrand, t, cfg, ctrl)
    return total


class _JointGrids:
    """Chebyshev grids of the shifted joint moments G_{i,j}(sigma) =
    E[Z^i(sigma) Z^j(sigma + h)] / sigma^alpha for the fixed gap h = t - s.

    The recursion only ever shifts both time arguments by the same x, so
    the gap is invariant and one-dimensional grids in sigma suffice.
    """

    def __init__(self, cfg: ModelConfig, h: float, S: float, ctrl: QuadratureControl):
        self.cfg = cfg
        self.h = h
        self.S = S
        self.ctrl = ctrl
        self.nodes = cheb_nodes(ctrl.grid_points, 0.0, S)
        self._grids: dict[tuple[int, int], ChebyshevInterpolant] = {}

    def marginal(self, order: int):
        T = self.S + self.h
        if order == 0:
            return lambda u: np.ones_like(np.asarray(u, dtype=float))
        interp = _marginal_interp(self.cfg, order, T, self.ctrl)
        a = self.cfg.alpha

        def fn(u):
            u = np.asarray(u, dtype=float)
            return np.where(u > 0, u, 0.0) ** a * interp(np.clip(u, 0.0, T))

        return fn

    def value_fn(self, i: int, j: int):
        """G_{i,j} as a function of sigma (vectorized)."""
        if i == 0:
            mj = self.marginal(j)
            return lambda u: mj(np.asarray(u, dtype=float) + self.h)
        if j == 0:
            return self.marginal(i)
        interp = self.grid(i, j)
        a = self.cfg.alpha
        S = self.S

        def fn(u):
            u = np.asarray(u, dtype=float)
            return np.where(u > 0, u, 0.0) ** a * interp(np.clip(u, 0.0, S))

        return fn

    def _node_values(self, i: int, j: int, sig: np.ndarray) -> np.ndarray:
        cfg, ctrl, h = self.cfg, self.ctrl, self.h
        d = cfg.delta
        total = np.zeros_like(sig)
        for p in range(i):
            gpj = self.value_fn(p, j)
            coef = cfg.mu(i - p) * math.comb(i, p)
            pref = coef * np.exp(-(i - p) * d * sig)

            def g_vec(x_mat, p=p, gpj=gpj):
                lag = sig[:, None] - x_mat
                return (
                    np.exp(-(j + p) * d * x_mat)
                    * gpj(lag)
                    * cfg.delay.dh_vec((i - p) * d, lag, ctrl)
                )

            total += pref * _renewal_integral_nodes(g_vec, sig, cfg)
        for q in range(j):
            for p in range(i + 1):
                gpq = self.value_fn(p, q)
                coef = cfg.mu(i + j - p - q) * math.comb(i, p) * math.comb(j, q)
                pref = coef * np.exp(-(i + j - p - q) * d * (sig + h))

                def g_vec(x_mat, p=p, q=q, gpq=gpq):
                    lag = sig[:, None] - x_mat
                    return (
                        np.exp(-(p + q) * d * x_mat)
                        * gpq(lag)
                        * cfg.delay.dh_vec((i + j - p - q) * d, lag + h, ctrl)
                    )

                total += pref * _renewal_integral_nodes(g_vec, sig, cfg)
        return total

    def _limit_at_zero(self, i: int, j: int) -> float:
        cfg, h = self.cfg, self.h
        d = cfg.delta
        marg = {q: self.marginal(q) for q in range(j)}
        mj = self.marginal(j)
        out = cfg.mu(i) * cfg.delay.laplace(i * d) * float(np.atleast_1d(mj(h))[0])
        for q in range(j):
            out += (
                cfg.mu(i + j - q)
                * math.comb(j, q)
                * math.exp(-(i + j - q) * d * h)
                * cfg.delay.dh((i + j - q) * d, h, self.ctrl)
                * float(np.atleast_1d(marg[q](h))[0])
            )
        return out * _dm_weight(cfg)

    def grid(self, i: int, j: int) -> ChebyshevInterpolant:
        key = (i, j)
        if key not in self._grids:
            sig = self.nodes[1:]
            vals = self._node_values(i, j, sig) / sig**self.cfg.alpha
            at_zero = self._limit_at_zero(i, j)
            self._grids[key] = ChebyshevInterpolant(
                self.nodes, np.concatenate([[at_zero], vals])
            )
        return self._grids[key]


@lru_cache(maxsize=32)
def _joint_grids(cfg: ModelConfig, h: float, S: float, ctrl: QuadratureControl) -> _JointGrids:
    return _JointGrids(cfg, h, S, ctrl)


MAX_JOINT_ORDER = 4


def joint_moment(
    cfg: ModelConfig,
    n: int,
    m: int,
    s: float,
    t: float,
    ctrl: QuadratureControl = DEFAULT_QUADRATURE_CONTROL,
) -> float:
    """E[Z_delta^n(s) Z_delta^m(t)] for 0 < s <= t via the joint recursion.

    Both time arguments shift together inside the recursion, so the
    memoization grids are one-dimensional in the shifted time at fixed gap
    t - s.  Supported up to total order n + m <= 4.
    """
    if not (0 < s <= t):
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    if n < 0 or m < 0:
        raise DomainError("orders must be >= 0")
    if n + m > MAX_JOINT_ORDER:
        raise DomainError(
            f"joint moments supported to total order {MAX_JOINT_ORDER}, got {n + m}"
        )
    cfg.mu(n + m)  # raises if claim moments are insufficient
    if n == 0 and m == 0:
        return 1.0
    if m == 0:
        return marginal_moment(cfg, n, s, ctrl)
    if n == 0:
        return marginal_moment(cfg, m, t, ctrl)

    grids = _joint_grids(cfg, t - s, s, ctrl)
    d = cfg.delta
    h = t - s
    total = 0.0
    for p in range(n):
        gpj = grids.value_fn(p, m)
        coef = cfg.mu(n - p) * math.comb(n, p) * math.exp(-(n - p) * d * s)

        def integrand(x, p=p, gpj=gpj):
            lag = s - x
            return (
                math.exp(-(m + p) * d * x)
                * float(np.atleast_1d(gpj(lag))[0])
                * cfg.delay.dh((n - p) * d, lag, ctrl)
            )

        total += coef * _renewal_integral(integrand, s, cfg, ctrl)
    for q in range(m):
        for p in range(n + 1):
            gpq = grids.value_fn(p, q)
            coef = (
                cfg.mu(n + m - p - q)
                * math.comb(n, p)
                * math.comb(m, q)
                * math.exp(-(n + m - p - q) * d * t)
            )

            def integrand(x, p=p, q=q, gpq=gpq):
                lag = s - x
                return (
                    math.exp(-(p + q) * d * x)
                    * float(np.atleast_1d(gpq(lag))[0])
                    * cfg.delay.dh((n + m - p - q) * d, lag + h, ctrl)
                )

            total += coef * _renewal_integral(integrand, s, cfg, ctrl)
    return total
