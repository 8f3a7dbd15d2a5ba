"""Gauss-Legendre rules, interval maps and Nystrom log-determinants."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg


class SingularMatrixError(ArithmeticError):
    """I - K is numerically singular on the given rule."""


class NegativeDeterminantError(ArithmeticError):
    """det(I - K) came out negative: not a valid gap probability."""


@dataclass(frozen=True)
class QuadRule:
    """Nodes and positive weights on an interval (a, b)."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        a, b = (float(v) for v in self.interval)
        if x.ndim != 1 or x.shape != w.shape or x.size == 0:
            raise ValueError("nodes and weights must be 1-d arrays of equal nonzero length")
        if not a < b:
            raise ValueError(f"empty interval ({a}, {b})")
        if np.any(np.diff(x) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if x[0] <= a or x[-1] >= b:
            raise ValueError("nodes must be interior to the interval")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - (b - a)) > 1e-13 * max(1.0, b - a):
            raise ValueError("weights do not sum to the interval length")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "interval", (a, b))

    def __len__(self):
        return self.nodes.size


@lru_cache(maxsize=64)
def gauss_legendre(m):
    """m-point Gauss-Legendre rule on (-1, 1)."""
    if int(m) != m or not 1 <= m <= 2000:
        raise ValueError(f"gauss_legendre: need integer 1 <= m <= 2000, got {m!r}")
    x, w = np.polynomial.legendre.leggauss(int(m))
    # leggauss weights are accurate but their sum drifts by a few ulps at large m
    w = w * (2.0 / w.sum())
    return QuadRule(x, w, (-1.0, 1.0))


def map_rule(rule, a, b, transform="affine"):
    """Map a rule to (a, b).

    ``affine`` is the linear map.  ``sqrt`` requires a = 0 and uses x = b u^2
    with u the affine image in (0, 1); it clusters nodes at x = 0.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"map_rule: need a < b, got ({a}, {b})")
    lo, hi = rule.interval
    t = (rule.nodes - lo) / (hi - lo)
    wt = rule.weights / (hi - lo)
    if transform == "affine":
        return QuadRule(a + (b - a) * t, (b - a) * wt, (a, b))
    if transform == "sqrt":
        if a != 0.0:
            raise ValueError("map_rule: sqrt transform requires a = 0")
        x = b * t * t
        w = 2.0 * b * t * wt
        w = w * (b / w.sum())  # absorb rounding so the weights sum to b
        return QuadRule(x, w, (a, b))
    raise ValueError(f"map_rule: unknown transform {transform!r}")


def composite_rule(m, breakpoints):
    """Gauss-Legendre panels of m points on consecutive breakpoints."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
        raise ValueError("breakpoints must be strictly increasing, at least two")
    base = gauss_legendre(m)
    xs, ws = [], []
    for lo, hi in zip(bp[:-1], bp[1:]):
        xs.append(lo + (hi - lo) * (base.nodes + 1.0) / 2.0)
        ws.append(base.weights * (hi - lo) / 2.0)
    w = np.concatenate(ws)
    w = w * ((bp[-1] - bp[0]) / w.sum())
    return QuadRule(np.concatenate(xs), w, (bp[0], bp[-1]))


def integrate(f, rule):
    """Weighted sum of f over the rule nodes; f must accept an array."""
    vals = np.asarray(f(rule.nodes))
    return np.dot(rule.weights, vals)


def logdet_i_minus(kmat, weights):
    """ln det(I - W^{1/2} K W^{1/2}) for a kernel matrix K on nodes with weights W."""
    kmat = np.asarray(kmat)
    sw = np.sqrt(np.asarray(weights, dtype=float))
    a = np.eye(sw.size) - sw[:, None] * kmat * sw[None, :]
    if not np.all(np.isfinite(a)):
        raise ValueError("kernel matrix has non-finite entries")
    if np.iscomplexobj(a):
        raise TypeError("logdet_i_minus expects a real kernel matrix")
    lu, piv = linalg.lu_factor(a, check_finite=False)
    d = np.diag(lu)
    # reciprocal 1-norm condition number near rounding level: det(I - K) is
    # indistinguishable from 0
    rcond, _ = linalg.lapack.dgecon(lu, np.linalg.norm(a, 1), norm="1")
    if rcond <= 100 * sw.size * np.finfo(float).eps:
        raise SingularMatrixError("I - K is numerically singular on this rule")
    swaps = np.count_nonzero(piv != np.arange(piv.size))
    sign = (-1) ** swaps * np.prod(np.sign(d))
    if sign < 0:
        raise NegativeDeterminantError("det(I - K) < 0: invalid operator or rule too coarse")
    return float(np.sum(np.log(np.abs(d))))


def nystrom_logdet(kernel, rule):
    """ln det(I - K) by the symmetrized Nystrom method.

    ``kernel(x, y)`` must broadcast over arrays (it is called with a column
    and a row of nodes) and handle the diagonal x == y itself.
    """
    x = rule.nodes
    kmat = np.asarray(kernel(x[:, None], x[None, :]), dtype=float)
    if kmat.shape != (x.size, x.size):
        kmat = np.broadcast_to(kmat, (x.size, x.size))
    return logdet_i_minus(kmat, rule.weights)
