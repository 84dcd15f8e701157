"""Gauss rules and composite graded rules on [0, 1].

The singular integrals in this package all reduce to

    ∫_0^1 x^a (1 - x)^b φ(x) dx

with real ``a, b > -1`` and a ``φ`` that may still carry an oscillatory
factor such as ``x^{iy}``.  :func:`graded_rule` handles this with
geometrically shrinking panels towards each endpoint and a Gauss-Jacobi
rule on the innermost panel, so the non-smooth remainder only lives on a
panel whose mass is below double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "Rule",
    "gauss_legendre",
    "gauss_jacobi",
    "gauss_laguerre",
    "graded_rule",
    "panel_rule",
    "depth_for",
]


@dataclass(frozen=True)
class Rule:
    """Nodes and weights of a quadrature rule (weight function included).

    ``comp`` holds ``1 - nodes`` computed without cancellation; it matters
    for rules on [0, 1] whose nodes crowd towards 1.
    """

    nodes: np.ndarray
    weights: np.ndarray
    comp: np.ndarray | None = None

    def complement(self) -> np.ndarray:
        return 1.0 - self.nodes if self.comp is None else self.comp

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.tensordot(values, self.weights, axes=([axis], [0]))


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> Rule:
    """n-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return Rule(0.5 * (x + 1.0), 0.5 * w)


@lru_cache(maxsize=256)
def gauss_jacobi(n: int, a: float, b: float) -> Rule:
    """n-point rule for ∫_0^1 x^a (1-x)^b φ(x) dx."""
    if a <= -1 or b <= -1:
        raise ValueError(f"Jacobi exponents must exceed -1, got a={a}, b={b}")
    # scipy's weight is (1-y)^alpha (1+y)^beta on [-1, 1]; x = (1+y)/2
    y, w = roots_jacobi(n, b, a)
    return Rule(0.5 * (y + 1.0), w * 0.5 ** (a + b + 1.0), 0.5 * (1.0 - y))


@lru_cache(maxsize=16)
def gauss_laguerre(n: int) -> Rule:
    """n-point rule for ∫_0^∞ e^{-x} φ(x) dx."""
    x, w = np.polynomial.laguerre.laggauss(n)
    return Rule(x, w)


def depth_for(exponent: float, tol: float = 1e-17, floor: float = 1e-300) -> float:
    """Width of the innermost panel so that ∫_0^ε x^exponent dx ≲ tol."""
    p = exponent + 1.0
    if p <= 0:
        raise ValueError("non-integrable endpoint exponent")
    return max(floor, tol ** (1.0 / p))


def panel_rule(edges: np.ndarray, order: int) -> Rule:
    """Composite Gauss-Legendre rule over consecutive ``edges``."""
    base = gauss_legendre(order)
    a = edges[:-1, None]
    h = np.diff(edges)[:, None]
    nodes = (a + h * base.nodes[None, :]).ravel()
    weights = np.abs(h * base.weights[None, :]).ravel()
    return Rule(nodes, weights)


def _geometric_edges(span: float, depth: float, ratio: float) -> np.ndarray:
    # distances from the endpoint: span, span*ratio, ..., >= depth
    k = max(1, math.ceil(math.log(depth / span) / math.log(ratio)))
    return span * ratio ** np.arange(k + 1)


@lru_cache(maxsize=512)
def _graded_cached(
    a: float, b: float, depth_left: float, depth_right: float, order: int, ratio: float
) -> Rule:
    if a <= -1 or b <= -1:
        raise ValueError(f"endpoint exponents must exceed -1, got a={a}, b={b}")
    left = _geometric_edges(0.5, depth_left, ratio)  # 0.5, ..., eps_L
    right = _geometric_edges(0.5, depth_right, ratio)
    eps_l, eps_r = left[-1], right[-1]

    # interior panels: [eps_l, 0.5] graded towards 0, and [0.5, 1 - eps_r]
    # graded towards 1 (built in the complement variable 1 - x)
    mid_left = panel_rule(left[::-1], order)
    mid_right = panel_rule(right, order)  # distances from 1

    x_l, c_l = mid_left.nodes, 1.0 - mid_left.nodes
    c_r = mid_right.nodes
    x_r = 1.0 - c_r
    nodes = [x_l, x_r]
    comps = [c_l, c_r]
    weights = [
        mid_left.weights * x_l**a * c_l**b,
        mid_right.weights * x_r**a * c_r**b,
    ]

    # innermost panel at 0: x = eps_l*y, weight (eps_l y)^a (1 - eps_l y)^b
    jl = gauss_jacobi(order, a, 0.0)
    x = eps_l * jl.nodes
    nodes.append(x)
    comps.append(1.0 - x)
    weights.append(jl.weights * eps_l ** (a + 1.0) * (1.0 - x) ** b)

    # innermost panel at 1: 1 - x = eps_r*y
    jr = gauss_jacobi(order, b, 0.0)
    c = eps_r * jr.nodes
    nodes.append(1.0 - c)
    comps.append(c)
    weights.append(jr.weights * eps_r ** (b + 1.0) * (1.0 - c) ** a)

    nodes_arr = np.concatenate(nodes)
    order_idx = np.argsort(nodes_arr, kind="stable")
    return Rule(
        nodes_arr[order_idx],
        np.concatenate(weights)[order_idx],
        np.concatenate(comps)[order_idx],
    )


def graded_rule(
    a: float = 0.0,
    b: float = 0.0,
    *,
    depth_left: float | None = None,
    depth_right: float | None = None,
    order: int = 16,
    ratio: float = 0.25,
) -> Rule:
    """Composite rule for ∫_0^1 x^a (1-x)^b φ(x) dx.

    Panels shrink geometrically (factor ``ratio``) towards both endpoints
    down to ``depth_left`` / ``depth_right``; the last panel on each side
    carries the exact Jacobi weight.  Default depths make the innermost
    panels negligible for bounded ``φ``.
    """
    if depth_left is None:
        depth_left = depth_for(a)
    if depth_right is None:
        depth_right = depth_for(b)
    return _graded_cached(
        float(a), float(b), float(depth_left), float(depth_right), int(order), float(ratio)
    )
