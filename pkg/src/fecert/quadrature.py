"""Quadrature rules on the unit interval and on triangles.

Triangle rules are stored as barycentric points with weights expressed as
fractions of the triangle area (they sum to one).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

T_ORDER = 8


@dataclass(frozen=True)
class TriangleRule:
    name: str
    bary: np.ndarray     # (Q, 3)
    weights: np.ndarray  # (Q,), sums to 1
    degree: int          # polynomials up to this degree are integrated exactly

    def points(self, coords: np.ndarray) -> np.ndarray:
        """Physical points for triangles ``coords`` of shape (M, 3, 2) -> (M, Q, 2)."""
        return np.einsum("qk,mkd->mqd", self.bary, coords)


@lru_cache(maxsize=None)
def edge_midpoint_rule() -> TriangleRule:
    """Three edge midpoints, equal weights; exact for quadratics."""
    bary = np.array([[0.5, 0.5, 0.0],
                     [0.0, 0.5, 0.5],
                     [0.5, 0.0, 0.5]])
    return TriangleRule("edge_midpoint", bary, np.full(3, 1.0 / 3.0), 2)


@lru_cache(maxsize=None)
def collapsed_gauss_rule(n: int) -> TriangleRule:
    """Conical product rule from n x n Gauss-Legendre points (Duffy map).

    Exact for polynomials of degree 2n - 2.  All weights are positive.
    """
    s, ws = gauss_legendre_01(n)
    t, wt = gauss_legendre_01(n)
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt) * (1.0 - S)
    x = S.ravel()
    y = (T * (1.0 - S)).ravel()
    bary = np.stack([1.0 - x - y, x, y], axis=1)
    w = 2.0 * W.ravel()
    return TriangleRule(f"collapsed_gauss_{n}", bary, w / w.sum(), 2 * n - 2)


def get_rule(rule=None) -> TriangleRule:
    """Resolve ``None`` (default midpoint rule), a name, an int order, or a rule."""
    if rule is None or rule == "edge_midpoint":
        return edge_midpoint_rule()
    if isinstance(rule, TriangleRule):
        return rule
    if isinstance(rule, int):
        return collapsed_gauss_rule(rule)
    if isinstance(rule, str) and rule.startswith("collapsed_gauss_"):
        return collapsed_gauss_rule(int(rule.rsplit("_", 1)[1]))
    raise ValueError(f"unknown quadrature rule {rule!r}")


@lru_cache(maxsize=None)
def gauss_legendre_01(n: int = T_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
