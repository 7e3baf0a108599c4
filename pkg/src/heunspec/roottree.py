"""Tracing the limiting root tree from the reality condition of a period integral.

For each root a_i, the branch through a_i is the zero set of Im F_i(b), where
F_i(b) integrates sqrt((b - t) / Q(t)) over the opposite side [a_j, a_k] of
the root triangle.  Substituting t = midpoint + half * cos(sigma) cancels both
endpoint singularities exactly and leaves the smooth integrand
sqrt((t - b) / (t - a_i)), whose branch is continued along sigma.  The three
branches are traced predictor-corrector style in lockstep and meet at a point
interior to the hull.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .cubics import ConvexHull, CubicConfig, convex_hull, hull_distance
from .quadrature import composite_rule


class BranchJump(RuntimeError):
    """Branch continuation became ambiguous; the probe point is too close to the segment."""


class LeftHull(RuntimeError):
    """A traced curve escaped the convex hull of the roots."""


class Mismatch(RuntimeError):
    """The three curve fronts did not meet within the allowed radius."""


class TraceStalled(RuntimeError):
    """Lockstep tracing exceeded its round budget without the fronts meeting."""


@dataclass(frozen=True)
class PeriodIntegral:
    value: complex
    branch_flips: int
    error_estimate: float


def _side(c: CubicConfig, i: int) -> tuple[complex, complex, complex]:
    """(a_i, a_j, a_k): the chosen root and the endpoints of the opposite side."""
    roots = c.roots
    a_i = roots[i - 1]
    rest = [roots[k] for k in range(3) if k != i - 1]
    return a_i, rest[0], rest[1]


def _period_values(c: CubicConfig, i: int, b: complex, rtol: float = 1e-11):
    """F and dF/db by one panel-doubled pass over sigma in [0, pi].

    The derivative integrand is -1 / (2 phi (t - a_i)) with the same continued
    branch phi, so indicator and gradient are exactly consistent.
    """
    a_i, a_j, a_k = _side(c, i)
    mid = (a_j + a_k) / 2.0
    half = (a_k - a_j) / 2.0
    prev = None
    panels = 2
    flips = 0
    while panels <= 512:
        rule = composite_rule(0.0, math.pi, panels)
        t = mid + half * np.cos(rule.nodes)
        num = t - b
        den = t - a_i
        scale = max(float(np.max(np.abs(num))), 1e-300)
        if float(np.min(np.abs(num))) < 1e-13 * scale:
            raise BranchJump(f"probe {b} is numerically on the integration segment")
        rad = num / den
        anchor = cmath.sqrt((a_k - b) / (a_k - a_i))
        phi = _continued(rad, anchor)
        flips = int(np.sum((phi / np.sqrt(rad)).real < 0))
        f_val = np.sum(rule.weights * phi)
        df_val = np.sum(rule.weights * (-0.5) / (phi * den))
        vals = np.array([f_val, df_val])
        if prev is not None:
            err = float(np.max(np.abs(vals - prev)))
            if err <= max(1e-14, rtol * float(np.max(np.abs(vals)))):
                return complex(f_val), complex(df_val), err, flips
        prev = vals
        panels *= 2
    raise BranchJump(f"period quadrature did not settle at b={b}; branch likely crossed")


def _continued(rad: np.ndarray, anchor: complex) -> np.ndarray:
    w = np.sqrt(rad.astype(complex))
    inner = w[1:] * np.conj(w[:-1])
    fl = np.where(inner.real < 0.0, -1.0, 1.0)
    signs = np.concatenate(([1.0], np.cumprod(fl)))
    out = w * signs
    if abs(out[0] - anchor) > abs(out[0] + anchor):
        out = -out
    return out


def period_integral(c: CubicConfig, i: int, b: complex) -> PeriodIntegral:
    f, _, err, flips = _period_values(c, i, b)
    return PeriodIntegral(value=f, branch_flips=flips, error_estimate=err)


def indicator(c: CubicConfig, i: int, b: complex) -> float:
    """Im F_i(b); zero (up to branch sign) exactly on the traced locus."""
    f, _, _, _ = _period_values(c, i, b)
    return f.imag


def indicator_gradient(c: CubicConfig, i: int, b: complex) -> complex:
    """Complex derivative dF/db by the differentiated integrand."""
    _, df, _, _ = _period_values(c, i, b)
    return df


@dataclass(frozen=True)
class TracedCurve:
    root_index: int
    polyline: np.ndarray
    step: float
    termination: str


@dataclass(frozen=True)
class RootTree:
    """Three traced branches plus the estimated common point."""

    curves: tuple[TracedCurve, TracedCurve, TracedCurve]
    common_point: complex
    mismatch_radius: float


class _Tracer:
    """State of a single advancing branch."""

    def __init__(self, c: CubicConfig, i: int, hull: ConvexHull, step: float, tol: float):
        self.c = c
        self.i = i
        self.hull = hull
        self.step = step
        self.tol = tol
        start = c.roots[i - 1]
        self.points = [complex(start)]
        _, df, _, _ = _period_values(c, i, start)
        tangent = 1.0 / df
        tangent = tangent / abs(tangent)
        toward = hull.centroid - start
        if (tangent * toward.conjugate()).real < 0:
            tangent = -tangent
        self.direction = tangent
        self.done = False
        self.termination = ""

    @property
    def front(self) -> complex:
        return self.points[-1]

    def advance(self) -> None:
        b_pred = self.front + self.step * self.direction
        b = self._correct(b_pred)
        if hull_distance(self.hull, b) > 1e-6 * self.hull.diameter:
            raise LeftHull(f"branch {self.i} escaped the hull at {b}")
        prev = self.front
        self.points.append(complex(b))
        new_dir = b - prev
        if abs(new_dir) > 0:
            self.direction = new_dir / abs(new_dir)
        # re-align with the local tangent to avoid drift accumulating
        _, df, _, _ = _period_values(self.c, self.i, b)
        tangent = 1.0 / df
        tangent = tangent / abs(tangent)
        if (tangent * self.direction.conjugate()).real < 0:
            tangent = -tangent
        self.direction = tangent

    def _correct(self, b: complex) -> complex:
        for _ in range(25):
            f, df, _, _ = _period_values(self.c, self.i, b)
            if abs(f.imag) < self.tol:
                return b
            b = b - 1j * f.imag / df
        raise BranchJump(f"corrector failed to reach |Im F| < {self.tol:g} near {b}")


def _middle_root(c: CubicConfig) -> int:
    ref = None
    for r in c.roots[1:]:
        if r != c.roots[0]:
            ref = r - c.roots[0]
            break
    ts = [((r - c.roots[0]) * ref.conjugate()).real for r in c.roots]
    order = sorted(range(3), key=lambda k: ts[k])
    return order[1] + 1


def _collinear_tree(c: CubicConfig, step: float) -> RootTree:
    mid_idx = _middle_root(c)
    mid = c.roots[mid_idx - 1]
    curves = []
    for i in (1, 2, 3):
        start = c.roots[i - 1]
        length = abs(mid - start)
        if length == 0:
            pts = np.array([start], dtype=complex)
        else:
            count = max(2, int(math.ceil(length / step)) + 1)
            pts = start + (mid - start) * np.linspace(0.0, 1.0, count)
        curves.append(
            TracedCurve(root_index=i, polyline=pts, step=step, termination="collinear-segment")
        )
    return RootTree(curves=tuple(curves), common_point=complex(mid), mismatch_radius=0.0)


def trace_curve(c: CubicConfig, i: int, step: float, tol: float = 1e-9) -> TracedCurve:
    """Trace branch i; the stopping rule needs the other two fronts, so all three run."""
    return trace_tree_curves(c, step=step, tol=tol)[i - 1]


def trace_tree_curves(
    c: CubicConfig, step: float | None = None, tol: float = 1e-9
) -> tuple[TracedCurve, TracedCurve, TracedCurve]:
    """Advance the three branches toward each other until the fronts meet.

    Per round the branch whose front is farthest from the other two advances
    one arc step, so the fronts arrive at the meeting point together and no
    branch runs through the saddle of its own level set (where the tangent
    direction becomes undefined).  Done when all pairwise front distances are
    within 2 * step.
    """
    hull = convex_hull(c)
    if step is None:
        step = 1e-2 * hull.diameter
    if c.collinear:
        return _collinear_tree(c, step).curves
    tracers = [_Tracer(c, i, hull, step, tol) for i in (1, 2, 3)]
    budget = int(12.0 * hull.diameter / step) + 30
    for _ in range(budget):
        fronts = [t.front for t in tracers]
        gaps = [
            min(abs(fronts[k] - fronts[j]) for j in range(3) if j != k) for k in range(3)
        ]
        if max(abs(fronts[k] - fronts[j]) for k in range(3) for j in range(3)) <= 2.0 * step:
            for t in tracers:
                t.done = True
                t.termination = "met-other-fronts"
            break
        tracers[int(np.argmax(gaps))].advance()
    if not all(t.done for t in tracers):
        raise TraceStalled("lockstep tracing exhausted its round budget")
    return tuple(
        TracedCurve(
            root_index=t.i,
            polyline=np.array(t.points, dtype=complex),
            step=step,
            termination=t.termination,
        )
        for t in tracers
    )


def assemble_tree(curves: tuple[TracedCurve, TracedCurve, TracedCurve]) -> RootTree:
    """Common point from the front centroid; curves trimmed at nearest approach."""
    if curves[0].termination == "collinear-segment":
        common = curves[0].polyline[-1]
        return RootTree(curves=tuple(curves), common_point=complex(common), mismatch_radius=0.0)
    ends = [cv.polyline[-1] for cv in curves]
    mismatch = max(abs(p - q) for p in ends for q in ends)
    step = curves[0].step
    if mismatch > 10.0 * step:
        raise Mismatch(f"front mismatch radius {mismatch:.3e} exceeds 10 * step = {10 * step:.3e}")
    common = sum(ends) / 3.0
    trimmed = []
    for cv in curves:
        d = np.abs(cv.polyline - common)
        cut = int(np.argmin(d)) + 1
        trimmed.append(
            TracedCurve(
                root_index=cv.root_index,
                polyline=cv.polyline[:cut],
                step=cv.step,
                termination=cv.termination,
            )
        )
    return RootTree(curves=tuple(trimmed), common_point=complex(common), mismatch_radius=mismatch)


def build_tree(c: CubicConfig, step: float | None = None, tol: float = 1e-9) -> RootTree:
    return assemble_tree(trace_tree_curves(c, step=step, tol=tol))


def distance_to_tree(tree: RootTree, z: complex) -> float:
    """Min distance to the three polylines, each closed up to the common point."""
    from .cubics import _segment_distance

    best = math.inf
    for cv in tree.curves:
        pts = list(cv.polyline)
        if pts[-1] != tree.common_point:
            pts = pts + [tree.common_point]
        if len(pts) == 1:
            best = min(best, abs(z - pts[0]))
            continue
        for p, q in zip(pts[:-1], pts[1:]):
            best = min(best, _segment_distance(z, p, q))
    return best
