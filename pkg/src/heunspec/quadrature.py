"""Composite Gauss-Legendre quadrature with panel doubling and branch tracking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureNonConvergence(RuntimeError):
    """Panel doubling exhausted without the successive estimates agreeing."""


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    panels: int


@lru_cache(maxsize=8)
def _gl_base(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def composite_rule(a: float, b: float, panels: int, order: int = 32) -> QuadratureRule:
    x, w = _gl_base(order)
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadratureRule(nodes=nodes, weights=weights, order=order, panels=panels)


def adaptive_integral(
    f,
    a: float,
    b: float,
    rtol: float = 1e-11,
    atol: float = 1e-14,
    order: int = 32,
    start_panels: int = 2,
    max_panels: int = 1024,
):
    """Integrate a vectorized integrand, doubling panels until two estimates agree.

    f receives the full ascending node array (so integrands that track a branch
    along the interval can do it internally).  Returns (value, error_estimate).
    """
    prev = None
    panels = start_panels
    while panels <= max_panels:
        rule = composite_rule(a, b, panels, order)
        val = np.sum(rule.weights * f(rule.nodes))
        if prev is not None:
            err = abs(val - prev)
            if err <= max(atol, rtol * abs(val)):
                return val, err
        prev = val
        panels *= 2
    raise QuadratureNonConvergence(
        f"no convergence to rtol={rtol:g} within {max_panels} panels on [{a}, {b}]"
    )


def continued_sqrt(radicand: np.ndarray, anchor: complex) -> np.ndarray:
    """Square roots of radicand values along an ordered path, continued from anchor.

    anchor is the known branch value just before the first node.  Sign flips
    are detected between consecutive principal square roots (angle beyond 90
    degrees) and accumulated, then the whole chain is aligned to the anchor.
    """
    w = np.sqrt(radicand.astype(complex))
    if len(w) == 0:
        return w
    inner = w[1:] * np.conj(w[:-1])
    flips = np.where(inner.real < 0.0, -1.0, 1.0)
    signs = np.concatenate(([1.0], np.cumprod(flips)))
    out = w * signs
    if abs(out[0] - anchor) > abs(out[0] + anchor):
        out = -out
    return out


def agm_elliptic_k(m: float) -> float:
    """Complete elliptic integral K in the parameter convention, by the AGM.

    K(m) = integral over [0, pi/2] of (1 - m sin^2)^(-1/2); equals
    pi / (2 AGM(1, sqrt(1 - m))).
    """
    if not 0.0 <= m < 1.0:
        raise ValueError("parameter m must be in [0, 1)")
    a = 1.0
    b = math.sqrt(1.0 - m)
    for _ in range(60):
        if abs(a - b) <= 1e-17 * a:
            break
        a, b = (a + b) / 2.0, math.sqrt(a * b)
    return math.pi / (2.0 * a)
