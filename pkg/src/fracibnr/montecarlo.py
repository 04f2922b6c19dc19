"""Monte Carlo simulation of the discounted IBNR process.

Paths are generated from counter-based Philox streams keyed
``(seed, path_index)``, so path ``i`` is identical regardless of worker
count or scheduling; estimates reduce over path-ordered arrays with
numpy's fixed-order pairwise summation, making the whole pipeline
bit-reproducible for a given ``(seed, n_paths)``.

A compiled Cython kernel is used when available (see
:func:`mc_backend`); the pure-numpy fallback produces bit-identical
results, only slower.  All requested statistics are evaluated on common
paths, so covariances between horizons are estimable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _mc_fallback
from ._mc_fallback import (
    CLAIM_EXP,
    CLAIM_LOGNORMAL,
    CLAIM_PARETO,
    CLAIM_POINT,
    DELAY_EXP,
    DELAY_PARETO,
    MAX_EVENTS,
    draw_interarrival,
    path_generator,
)
from .engine import CustomDelay, ExponentialDelay, ModelConfig, ParetoDelay
from .errors import ConfigError, DomainError
from .renewal import RenewalModel

try:  # compiled kernel, optional
    from . import _mc_core as _core

    _BACKEND = "compiled"
except ImportError:  # pragma: no cover - build environment dependent
    _core = _mc_fallback
    _BACKEND = "python"

__all__ = [
    "ClaimLaw",
    "PointMassClaims",
    "ExponentialClaims",
    "ParetoClaims",
    "LogNormalClaims",
    "SimulationPath",
    "Estimate",
    "Target",
    "mc_backend",
    "path_generator",
    "sample_interarrival",
    "sample_path",
    "evaluate_z",
    "estimate",
    "event_count_mean",
]

_CHUNK = 4096


def mc_backend() -> str:
    """Which path kernel is active: ``"compiled"`` or ``"python"``."""
    return _BACKEND


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("IBNR_THREADS", "1")))
    except ValueError:
        return 1


class ClaimLaw:
    """Claim-size distribution with analytic moments and inverse-cdf sampling."""

    kind: int = -1

    def moment(self, k: int) -> float:
        raise NotImplementedError

    def kernel_params(self) -> tuple[int, float, float]:
        raise NotImplementedError

    def check_moments(self, cfg: ModelConfig) -> None:
        """The law's analytic mu_1, mu_2 must match the configured moments."""
        for k in range(1, min(len(cfg.claim_moments), 2) + 1):
            analytic = self.moment(k)
            if not math.isfinite(analytic) or abs(analytic - cfg.mu(k)) > 1e-12 * max(
                1.0, abs(cfg.mu(k))
            ):
                raise ConfigError(
                    f"claim law moment mu_{k}={analytic} does not match "
                    f"configured {cfg.mu(k)}"
                )


@dataclass(frozen=True)
class PointMassClaims(ClaimLaw):
    """Degenerate claims X = value; value 1 turns Z(t) into the number in
    system of a G/G/infinity queue (delta = 0)."""

    value: float = 1.0

    def moment(self, k):
        return self.value**k

    def kernel_params(self):
        return CLAIM_POINT, self.value, 0.0


@dataclass(frozen=True)
class ExponentialClaims(ClaimLaw):
    mean: float = 1.0

    def moment(self, k):
        return math.factorial(k) * self.mean**k

    def kernel_params(self):
        return CLAIM_EXP, self.mean, 0.0


@dataclass(frozen=True)
class ParetoClaims(ClaimLaw):
    theta: float
    eta: float

    def moment(self, k):
        if self.eta <= k:
            return math.inf
        out = self.theta**k * math.factorial(k)
        for j in range(1, k + 1):
            out /= self.eta - j
        return out

    def kernel_params(self):
        return CLAIM_PARETO, self.theta, self.eta

    @classmethod
    def from_moments(cls, mu1: float, mu2: float) -> "ParetoClaims":
        """Solve (theta, eta) from mu1 = theta/(eta-1), mu2 = 2 theta^2/((eta-1)(eta-2))."""
        ratio = mu2 / mu1**2
        if ratio <= 2.0:
            raise ConfigError(f"Pareto claims need mu2/mu1^2 > 2, got {ratio}")
        eta = 2.0 * (ratio - 1.0) / (ratio - 2.0)
        return cls(theta=mu1 * (eta - 1.0), eta=eta)


@dataclass(frozen=True)
class LogNormalClaims(ClaimLaw):
    mu: float
    sigma: float

    def moment(self, k):
        return math.exp(k * self.mu + 0.5 * k * k * self.sigma**2)

    def kernel_params(self):
        return CLAIM_LOGNORMAL, self.mu, self.sigma

    @classmethod
    def from_moments(cls, mu1: float, mu2: float) -> "LogNormalClaims":
        if mu2 <= mu1**2:
            raise ConfigError("need mu2 > mu1^2")
        sigma2 = math.log(mu2 / mu1**2)
        return cls(mu=math.log(mu1) - 0.5 * sigma2, sigma=math.sqrt(sigma2))


@dataclass(frozen=True)
class SimulationPath:
    """One realization up to ``horizon``: arrival times, delays, claim marks."""

    arrivals: np.ndarray
    delays: np.ndarray
    claims: np.ndarray
    horizon: float

    def __post_init__(self):
        a = np.asarray(self.arrivals, dtype=float)
        if not (len(a) == len(self.delays) == len(self.claims)):
            raise DomainError("arrivals, delays, claims must have equal length")
        if len(a) and (np.any(np.diff(a) <= 0) or a[-1] > self.horizon or a[0] <= 0):
            raise DomainError("arrivals must be strictly increasing in (0, horizon]")


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo point estimate with its standard error."""

    value: float
    std_error: float
    n_paths: int

    def __post_init__(self):
        if self.n_paths < 2:
            raise DomainError("need n_paths >= 2")
        if self.std_error < 0:
            raise DomainError("std_error must be >= 0")


@dataclass(frozen=True)
class Target:
    """One requested statistic: mean/variance at t, covariance or joint
    moment of Z(s) and Z(t)."""

    kind: str
    t: float
    s: float | None = None
    n: int = 1
    m: int = 1

    def __post_init__(self):
        if self.kind not in ("mean", "variance", "covariance", "joint"):
            raise DomainError(f"unknown target kind {self.kind!r}")
        if self.kind in ("covariance", "joint"):
            if self.s is None or not (0 < self.s <= self.t):
                raise DomainError(f"target {self.kind} needs 0 < s <= t")


def sample_interarrival(model: RenewalModel, rng: np.random.Generator) -> float:
    """One interarrival draw with survival E_alpha(-lam t^alpha)."""
    return draw_interarrival(rng, model.alpha, model.lam)


def _delay_kernel_params(delay) -> tuple[int, float, float, object]:
    if isinstance(delay, ExponentialDelay):
        return DELAY_EXP, delay.beta, 0.0, None
    if isinstance(delay, ParetoDelay):
        return DELAY_PARETO, delay.theta, delay.eta, None
    if isinstance(delay, CustomDelay):
        xs = np.asarray(delay.xs, dtype=float)
        sv = np.asarray(delay.survival_values, dtype=float)

        def inverse(u: float) -> float:
            # survival is nonincreasing: interpolate x against 1 - survival
            return float(np.interp(u, 1.0 - sv, xs))

        return _mc_fallback.DELAY_CUSTOM, 0.0, 0.0, inverse
    raise ConfigError(f"unsupported delay for simulation: {type(delay).__name__}")


def sample_path(
    cfg: ModelConfig, claim: ClaimLaw, horizon: float, rng: np.random.Generator
) -> SimulationPath:
    """Simulate one path: cumulative interarrivals to the horizon, one delay
    and one claim per arrival (mutually independent streams of draws)."""
    if horizon <= 0:
        raise DomainError(f"horizon must be > 0, got {horizon}")
    dkind, d1, d2, custom = _delay_kernel_params(cfg.delay)
    ckind, c1, c2 = claim.kernel_params()
    arrivals, delays, claims = [], [], []
    T = 0.0
    while True:
        T += draw_interarrival(rng, cfg.alpha, cfg.lam)
        if T > horizon:
            break
        if len(arrivals) >= MAX_EVENTS:
            raise DomainError(f"path exceeded the {MAX_EVENTS}-event cap")
        arrivals.append(T)
        if custom is not None:
            delays.append(custom(rng.random()))
        else:
            delays.append(_mc_fallback.draw_delay(rng, dkind, d1, d2))
        claims.append(_mc_fallback.draw_claim(rng, ckind, c1, c2))
    return SimulationPath(
        np.array(arrivals), np.array(delays), np.array(claims), float(horizon)
    )


def evaluate_z(path: SimulationPath, t: float, delta: float = 0.0) -> float:
    """Z_delta(t) = sum_i e^{-delta (T_i + L_i)} 1{T_i <= t < T_i + L_i} X_i."""
    if t > path.horizon:
        raise DomainError(f"t={t} beyond simulated horizon {path.horizon}")
    T, L, X = path.arrivals, path.delays, path.claims
    mask = (T <= t) & (T + L > t)
    if not mask.any():
        return 0.0
    disc = np.exp(-delta * (T[mask] + L[mask])) if delta != 0.0 else 1.0
    return float(np.sum(disc * X[mask]))


def evaluate_z_many(path: SimulationPath, times, delta: float = 0.0) -> np.ndarray:
    return np.array([evaluate_z(path, float(t), delta) for t in times])


def _simulate_matrix(cfg, claim, times, n_paths, seed, horizon):
    """(Z, N) matrices of shape (n_paths, len(times)) on common paths."""
    dkind, d1, d2, custom = _delay_kernel_params(cfg.delay)
    ckind, c1, c2 = claim.kernel_params()
    times = np.ascontiguousarray(sorted(set(float(t) for t in times)))
    K = times.size
    out_z = np.zeros((n_paths, K))
    out_n = np.zeros((n_paths, K))
    kernel = _mc_fallback if custom is not None else _core

    def run(start, count):
        kernel.run_paths(
            seed, start, count, times, cfg.alpha, cfg.lam, cfg.delta, horizon,
            dkind, d1, d2, ckind, c1, c2,
            out_z[start : start + count], out_n[start : start + count],
            custom_delay=custom,
        )

    starts = list(range(0, n_paths, _CHUNK))
    workers = _workers()
    if workers == 1 or len(starts) == 1:
        for s0 in starts:
            run(s0, min(_CHUNK, n_paths - s0))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(run, s0, min(_CHUNK, n_paths - s0)) for s0 in starts]
            for f in futs:
                f.result()
    return times, out_z, out_n


def _col(times: np.ndarray, t: float) -> int:
    return int(np.searchsorted(times, t))


def estimate(
    cfg: ModelConfig,
    claim: ClaimLaw,
    targets: list[Target],
    n_paths: int,
    seed: int,
) -> list[Estimate]:
    """Evaluate all targets on common paths; deterministic in (seed, n_paths)
    regardless of worker count.

    Standard errors: sample-std/sqrt(n) for mean and joint-moment targets,
    delta-method errors for variance and covariance targets.
    """
    if n_paths < 100:
        raise DomainError(f"need n_paths >= 100, got {n_paths}")
    claim.check_moments(cfg)
    all_times = []
    for tg in targets:
        all_times.append(tg.t)
        if tg.s is not None:
            all_times.append(tg.s)
    horizon = max(all_times)
    times, Z, _ = _simulate_matrix(cfg, claim, all_times, n_paths, seed, horizon)
    n = n_paths
    out = []
    for tg in targets:
        zt = Z[:, _col(times, tg.t)]
        if tg.kind == "mean":
            se = float(np.std(zt, ddof=1)) / math.sqrt(n)
            out.append(Estimate(float(np.mean(zt)), se, n))
        elif tg.kind == "variance":
            c = zt - zt.mean()
            v = float(np.sum(c * c)) / (n - 1)
            m4 = float(np.mean(c**4))
            var_of_var = max(m4 - v * v * (n - 3) / (n - 1), 0.0) / n
            out.append(Estimate(v, math.sqrt(var_of_var), n))
        elif tg.kind == "covariance":
            zs = Z[:, _col(times, tg.s)]
            cs, ct2 = zs - zs.mean(), zt - zt.mean()
            cov = float(np.sum(cs * ct2)) / (n - 1)
            var_of_cov = max(float(np.mean(cs**2 * ct2**2)) - cov * cov, 0.0) / n
            out.append(Estimate(cov, math.sqrt(var_of_cov), n))
        else:  # joint moment E[Z^n(s) Z^m(t)]
            zs = Z[:, _col(times, tg.s)]
            w = zs**tg.n * zt**tg.m
            out.append(Estimate(float(np.mean(w)), float(np.std(w, ddof=1)) / math.sqrt(n), n))
    return out


def event_count_mean(cfg: ModelConfig, t: float, n_paths: int, seed: int) -> Estimate:
    """Monte Carlo estimate of E[N(t)] on the same path machinery."""
    times, _, N = _simulate_matrix(cfg, PointMassClaims(1.0), [t], n_paths, seed, t)
    counts = N[:, 0]
    return Estimate(
        float(np.mean(counts)), float(np.std(counts, ddof=1)) / math.sqrt(n_paths), n_paths
    )
