"""Barycentric interpolation on Chebyshev-Lobatto nodes.

Used for the memoization grids of the moment recursions: lower-order
moment functions are sampled once on a Chebyshev grid and then read back
inside quadrature integrands at a continuum of shifted arguments.
"""

from __future__ import annotations

import numpy as np

__all__ = ["cheb_nodes", "ChebyshevInterpolant"]


def cheb_nodes(n: int, lo: float, hi: float) -> np.ndarray:
    """`n` Chebyshev-Lobatto points on [lo, hi], increasing, endpoints included."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    k = np.arange(n)
    x = np.cos(np.pi * k / (n - 1))  # 1 .. -1
    return lo + (hi - lo) * (1.0 - x) / 2.0


class ChebyshevInterpolant:
    """Barycentric interpolant through values on Chebyshev-Lobatto nodes.

    Evaluation is vectorized and exact at the nodes; weights for the
    Lobatto family are (-1)^k with halved endpoints.
    """

    def __init__(self, nodes: np.ndarray, values: np.ndarray):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.shape != values.shape or nodes.ndim != 1:
            raise ValueError("nodes/values must be equal-length 1-d arrays")
        n = nodes.size
        w = (-1.0) ** np.arange(n)
        w[0] *= 0.5
        w[-1] *= 0.5
        self.nodes = nodes
        self.values = values
        self._w = w

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        xv = np.atleast_1d(x).ravel()
        diff = xv[:, None] - self.nodes[None, :]
        out = np.empty_like(xv)
        exact = np.abs(diff) < 1e-14 * max(1.0, abs(self.nodes[-1] - self.nodes[0]))
        hit = exact.any(axis=1)
        if hit.any():
            idx = exact[hit].argmax(axis=1)
            out[hit] = self.values[idx]
        rest = ~hit
        if rest.any():
            q = self._w[None, :] / diff[rest]
            out[rest] = (q @ self.values) / q.sum(axis=1)
        return float(out[0]) if shape == () else out.reshape(shape)
