"""Gauss-Legendre quadrature on piecewise-smooth integrands."""

import math
from functools import lru_cache

import numpy as np

from .errors import QuadratureError

GL_ORDER = 16


@lru_cache(maxsize=8)
def gauss_legendre(order=GL_ORDER):
    """Nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def split_points(lo, hi, breaks, max_len=math.inf):
    """Sorted piece endpoints covering [lo, hi].

    Interior ``breaks`` become endpoints; pieces longer than ``max_len``
    are subdivided evenly.
    """
    pts = [lo]
    pts.extend(b for b in np.unique(np.asarray(breaks, dtype=float)) if lo < b < hi)
    pts.append(hi)
    out = [lo]
    for left, right in zip(pts[:-1], pts[1:]):
        n = max(1, math.ceil((right - left) / max_len)) if math.isfinite(max_len) else 1
        if n > 1:
            out.extend(np.linspace(left, right, n + 1)[1:-1])
        out.append(right)
    return np.asarray(out)


def piecewise_nodes(edges, order=GL_ORDER):
    """Quadrature nodes and weights for all pieces ``edges[i]..edges[i+1]``."""
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    left, right = edges[:-1, None], edges[1:, None]
    half = 0.5 * (right - left)
    nodes = left + half * (x + 1.0)
    weights = half * w
    return nodes, weights


def piecewise_gl(f, lo, hi, breaks=(), max_len=math.inf, order=GL_ORDER):
    """Fixed-order Gauss-Legendre, one rule per smooth piece.

    ``f`` must accept an ndarray of abscissae. Returns 0 for an empty range.
    """
    if hi < lo:
        raise ValueError("hi < lo")
    if hi == lo:
        return 0.0
    nodes, weights = piecewise_nodes(split_points(lo, hi, breaks, max_len), order)
    vals = f(nodes)
    return math.fsum((vals * weights).ravel())


def adaptive_gl(f, lo, hi, tol, breaks=(), order=GL_ORDER, max_depth=40):
    """Adaptive composite Gauss-Legendre by interval bisection.

    A piece is accepted when its value agrees with the sum over its two
    halves to within its share of ``tol``. Returns ``(value, error_estimate)``
    and raises :class:`QuadratureError` if ``max_depth`` is exhausted.
    """
    x, w = gauss_legendre(order)

    def rule(left, right):
        half = 0.5 * (right - left)
        return half * float(np.dot(w, f(left + half * (x + 1.0))))

    total_len = hi - lo
    if total_len == 0:
        return 0.0, 0.0
    pieces = split_points(lo, hi, breaks)
    stack = [(l, r, rule(l, r), 0) for l, r in zip(pieces[:-1], pieces[1:])]
    parts, errs = [], []
    failed = False
    while stack:
        left, right, whole, depth = stack.pop()
        mid = 0.5 * (left + right)
        a, b = rule(left, mid), rule(mid, right)
        err = abs(a + b - whole)
        share = tol * (right - left) / total_len
        if err <= share or depth >= max_depth:
            failed |= err > share
            parts.append(a + b)
            errs.append(err)
        else:
            stack.append((left, mid, a, depth + 1))
            stack.append((mid, right, b, depth + 1))
    value, error = math.fsum(parts), math.fsum(errs)
    if failed:
        raise QuadratureError("adaptive Gauss-Legendre did not converge", value, error)
    return value, error
