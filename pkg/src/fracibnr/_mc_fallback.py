"""Pure-python Monte Carlo path kernel.

Reference implementation of the path simulation; the compiled Cython core
(:mod:`fracibnr._mc_core`) mirrors the exact same stream layout and draw
order, so both backends produce bit-identical output for a given
``(seed, path_index)``:

* path ``i`` reads from a Philox stream keyed ``(seed, i)``;
* per event, interarrival uniforms are drawn first (two for the
  Mittag-Leffler sampler when alpha < 1, one for the Poisson case), then,
  if the arrival is within the horizon, one delay uniform and the claim
  draw (point-mass claims consume no uniform).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

DELAY_EXP, DELAY_PARETO, DELAY_CUSTOM = 0, 1, 2
CLAIM_POINT, CLAIM_EXP, CLAIM_PARETO, CLAIM_LOGNORMAL = 0, 1, 2, 3

MAX_EVENTS = 10_000_000

_TINY_LOG = -1e-300  # replaces log(1-u) when u == 0 so interarrivals stay > 0


def philox_state(seed: int, path_index: int) -> dict:
    """numpy Philox state dict for the stream keyed (seed, path_index)."""
    return {
        "bit_generator": "Philox",
        "state": {
            "counter": np.zeros(4, dtype=np.uint64),
            "key": np.array([seed, path_index], dtype=np.uint64),
        },
        "buffer": np.zeros(4, dtype=np.uint64),
        "buffer_pos": 4,
        "has_uint32": 0,
        "uinteger": 0,
    }


def path_generator(seed: int, path_index: int) -> np.random.Generator:
    """Fresh generator for one path's counter-based stream."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, path_index], dtype=np.uint64)))


def draw_interarrival(rng, alpha: float, lam: float) -> float:
    """One interarrival time with survival E_alpha(-lam t^alpha).

    alpha = 1 inverts the exponential; alpha < 1 uses the two-uniform
    construction tau = lam^(-1/a) |ln U| (sin(a pi)/tan(a pi V) - cos(a pi))^(1/a),
    whose survival is validated against the Mittag-Leffler function in the
    test suite (KS gate).
    """
    if alpha == 1.0:
        u = rng.random()
        ln_u = math.log1p(-u)
        if ln_u == 0.0:
            ln_u = _TINY_LOG
        return -ln_u / lam
    u1 = rng.random()
    u2 = rng.random()
    ln_u = math.log1p(-u1)
    if ln_u == 0.0:
        ln_u = _TINY_LOG
    v = u2 if u2 > 0.0 else 1e-16
    api = alpha * math.pi
    factor = math.sin(api) / math.tan(api * v) - math.cos(api)
    return lam ** (-1.0 / alpha) * (-ln_u) * factor ** (1.0 / alpha)


def draw_delay(rng, kind: int, d1: float, d2: float) -> float:
    u = rng.random()
    if kind == DELAY_EXP:
        return -math.log1p(-u) / d1
    if kind == DELAY_PARETO:
        return d1 * ((1.0 - u) ** (-1.0 / d2) - 1.0)
    raise ValueError(f"unknown delay kind {kind}")


def draw_claim(rng, kind: int, c1: float, c2: float) -> float:
    if kind == CLAIM_POINT:
        return c1
    u = rng.random()
    if kind == CLAIM_EXP:
        return -c1 * math.log1p(-u)
    if kind == CLAIM_PARETO:
        return c1 * ((1.0 - u) ** (-1.0 / c2) - 1.0)
    if kind == CLAIM_LOGNORMAL:
        if u <= 0.0:
            u = 1e-16
        return math.exp(c1 + c2 * ndtri(u))
    raise ValueError(f"unknown claim kind {kind}")


def _one_path(rng, times, alpha, lam, delta, horizon,
              delay_sampler, claim_sampler, z_row, n_row) -> None:
    T = 0.0
    n_events = 0
    while True:
        T += draw_interarrival(rng, alpha, lam)
        if T > horizon:
            return
        n_events += 1
        if n_events > MAX_EVENTS:
            raise RuntimeError(f"path exceeded the {MAX_EVENTS}-event cap")
        L = delay_sampler(rng)
        X = claim_sampler(rng)
        report = T + L
        disc = math.exp(-delta * report) * X if delta != 0.0 else X
        for k in range(times.shape[0]):
            tk = times[k]
            if T <= tk:
                n_row[k] += 1.0
                if report > tk:
                    z_row[k] += disc


def run_paths(seed, start, count, times, alpha, lam, delta, horizon,
              delay_kind, d1, d2, claim_kind, c1, c2, out_z, out_n,
              custom_delay=None) -> None:
    """Simulate paths [start, start+count) into out_z/out_n (count x K)."""
    bg = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64))
    rng = np.random.Generator(bg)
    state = philox_state(seed, 0)
    key = state["state"]["key"]

    if custom_delay is not None:
        delay_sampler = lambda g: custom_delay(g.random())
    else:
        delay_sampler = lambda g: draw_delay(g, delay_kind, d1, d2)
    claim_sampler = lambda g: draw_claim(g, claim_kind, c1, c2)

    times = np.ascontiguousarray(times, dtype=float)
    for i in range(count):
        key[1] = start + i
        bg.state = state
        _one_path(rng, times, alpha, lam, delta, horizon,
                  delay_sampler, claim_sampler, out_z[i], out_n[i])
