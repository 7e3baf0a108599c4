"""Cauchy transforms and logarithmic potentials of the averaged chord measure.

The transform of the averaged measure is a single theta-integral whose
integrand is the arcsine transform of the chord at theta; the square-root
branch is continued along theta from its value 1/z at theta = 0.  Outside the
endpoint ellipse the transform satisfies a non-homogeneous second-order ODE
with coefficients built from the cubic alone, which this module evaluates as
a residual, both directly and through the one-dimensional moment-integral
families obtained by the change of variables t = 2 theta^2 - 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cubics import ShiftedCubic, _segment_distance
from .geometry import (
    ComplexSegment,
    DegenerateEllipse,
    LimitProfile,
    ellipse_geometry,
    is_strictly_outside,
    support_segment,
)
from .quadrature import (
    QuadratureNonConvergence,
    adaptive_integral,
    agm_elliptic_k,
    composite_rule,
    continued_sqrt,
)


class OnSupport(ValueError):
    """Evaluation point lies on the support segment."""


class OnOrInsideSupport(ValueError):
    """Evaluation point is not strictly outside the support of the averaged measure."""


class DivergentIntegral(ValueError):
    """Moment integral diverges for the requested parameter."""


class ResonantCubic(ValueError):
    """v^2 - 4w = 0: the change of variables to the moment family breaks down."""


class StepSizeUnderflow(RuntimeError):
    """The ODE integrator failed before reaching the end of the interval."""


class PointInsideEllipse(ValueError):
    """Transform comparison requested at a point inside the support ellipse."""


# ---------------------------------------------------------------------------
# arcsine building blocks


def cauchy_arcsine(seg: ComplexSegment, z: complex) -> complex:
    """Transform 1/sqrt((z - e1)(z - e2)) with the branch behaving like 1/z at infinity."""
    mid = seg.midpoint
    h = seg.half
    if h == 0:
        if z == mid:
            raise OnSupport("point coincides with the degenerate segment")
        return 1.0 / (z - mid)
    zeta = (z - mid) / h
    scale = abs(h) + abs(z - mid)
    if _segment_distance(z, seg.e1, seg.e2) < 1e-13 * scale:
        raise OnSupport("point lies on the support segment")
    # sqrt(zeta^2 - 1) ~ zeta at infinity; cut confined to the segment
    root = zeta * cmath.sqrt(1.0 - 1.0 / (zeta * zeta))
    return 1.0 / (h * root)


def arcsine_potential(seg: ComplexSegment, z: complex) -> float:
    """Logarithmic potential of the arcsine measure, log|(zeta + sqrt(zeta^2-1)) h / 2|."""
    mid = seg.midpoint
    h = seg.half
    if h == 0:
        d = abs(z - mid)
        if d == 0:
            raise OnSupport("point coincides with the degenerate segment")
        return math.log(d)
    zeta = (z - mid) / h
    scale = abs(h) + abs(z - mid)
    if _segment_distance(z, seg.e1, seg.e2) < 1e-13 * scale:
        raise OnSupport("point lies on the support segment")
    w = (zeta + zeta * cmath.sqrt(1.0 - 1.0 / (zeta * zeta))) * h / 2.0
    return math.log(abs(w))


# ---------------------------------------------------------------------------
# averaged measure: guard and theta-integrals


def exterior_guard(p: LimitProfile, z: complex, margin: float = 0.0) -> None:
    """Raise unless z is strictly outside the support of the averaged measure."""
    if p.degenerate:
        seg = support_segment(p)
        if _segment_distance(z, seg.e1, seg.e2) <= max(margin, 1e-12):
            raise OnOrInsideSupport(f"{z} is on or too close to the degenerate support")
        return
    e = ellipse_geometry(p)
    if not is_strictly_outside(e, z, margin):
        raise OnOrInsideSupport(f"{z} is not strictly outside the support ellipse")


def _radicand(p: LimitProfile, z: complex, theta: np.ndarray) -> np.ndarray:
    t2 = theta * theta
    return (p.v * p.v - 4.0 * p.w) * t2 * t2 + (2.0 * p.v * z + 4.0 * p.w) * t2 + z * z


def _averaged_values(p: LimitProfile, z: complex, rtol: float = 1e-11):
    """C, C', C'' of the averaged measure by one panel-doubled quadrature."""
    prev = None
    panels = 4
    while panels <= 1024:
        rule = composite_rule(0.0, 1.0, panels)
        theta = rule.nodes
        rad = _radicand(p, z, theta)
        if np.min(np.abs(rad)) < 1e-13 * max(np.max(np.abs(rad)), 1e-300):
            raise OnOrInsideSupport("transform radicand vanishes on the theta path")
        g = continued_sqrt(rad, z)
        drdz = p.v * theta * theta + z  # half of d(radicand)/dz
        c0 = np.sum(rule.weights / g)
        c1 = np.sum(rule.weights * (-drdz) / (rad * g))
        c2 = np.sum(rule.weights * (3.0 * drdz * drdz - rad) / (rad * rad * g))
        vals = np.array([c0, c1, c2])
        if prev is not None and np.all(
            np.abs(vals - prev) <= np.maximum(1e-14, rtol * np.abs(vals))
        ):
            return complex(c0), complex(c1), complex(c2), float(np.max(np.abs(vals - prev)))
        prev = vals
        panels *= 2
    raise QuadratureNonConvergence("averaged transform quadrature did not converge")


def cauchy_averaged(p: LimitProfile, z: complex, margin: float = 0.0) -> complex:
    exterior_guard(p, z, margin)
    c0, _, _, _ = _averaged_values(p, z)
    return c0


def cauchy_averaged_derivatives(p: LimitProfile, z: complex) -> tuple[complex, complex]:
    exterior_guard(p, z)
    _, c1, c2, _ = _averaged_values(p, z)
    return c1, c2


@dataclass(frozen=True)
class TransformSample:
    """Transform and derivatives at a certified exterior point, with ODE residual."""

    z: complex
    C: complex
    C1: complex
    C2: complex
    residual: complex


def transform_sample(sc: ShiftedCubic, z: complex) -> TransformSample:
    p = LimitProfile.from_shifted(sc)
    exterior_guard(p, z)
    c0, c1, c2, _ = _averaged_values(p, z)
    q = z * (z * z + sc.v * z + sc.w)
    q1 = 3.0 * z * z + 2.0 * sc.v * z + sc.w
    q2 = 6.0 * z + 2.0 * sc.v
    res = q * c2 + q1 * c1 + q2 * c0 / 8.0 + 0.25
    return TransformSample(z=complex(z), C=c0, C1=c1, C2=c2, residual=res)


def heun_ode_residual(sc: ShiftedCubic, z: complex) -> complex:
    """Q C'' + Q' C' + Q'' C / 8 + Q''' / 24 for the monic shifted cubic."""
    return transform_sample(sc, z).residual


def log_potential_averaged(p: LimitProfile, z: complex, rtol: float = 1e-11) -> float:
    exterior_guard(p, z)

    def integrand(theta: np.ndarray) -> np.ndarray:
        mids = -p.v * theta * theta
        halves = 2.0 * np.sqrt(-p.w * (1.0 - theta * theta) * (theta * theta) + 0j)
        out = np.empty(len(theta), dtype=float)
        for k in range(len(theta)):
            h = halves[k]
            if h == 0:
                out[k] = math.log(abs(z - mids[k]))
                continue
            zeta = (z - mids[k]) / h
            w = (zeta + zeta * cmath.sqrt(1.0 - 1.0 / (zeta * zeta))) * h / 2.0
            out[k] = math.log(abs(w))
        return out

    val, _ = adaptive_integral(integrand, 0.0, 1.0, rtol=rtol, start_panels=4)
    return float(val)


# ---------------------------------------------------------------------------
# special-case moment family (collinear cubic z(z^2 - 1/4), s = 4 z^2 - 1)


def _special_bundle(s: float, rtol: float = 1e-12, depth: int = 2):
    """I_nu and its first `depth` s-derivatives for nu = 0..3 at real s > 0.

    chi-substitution t = 2 sin(chi)^2 - 1 removes the 1/sqrt(t+1) endpoint.
    Higher derivative integrands peak like s**(-(depth+1/2)) at t = 0, so only
    the rows actually needed take part in the convergence test.
    """
    if s <= 0:
        raise DivergentIntegral("moment integrals require s > 0")
    prev = None
    panels = 4
    # the integrand peak at t = 0 has width sqrt(s); tiny s needs fine panels
    max_panels = 2048 if s >= 1e-4 else 65536
    while panels <= max_panels:
        rule = composite_rule(0.0, math.pi / 2.0, panels)
        chi = rule.nodes
        t = 2.0 * np.sin(chi) ** 2 - 1.0
        c = np.cos(chi)
        den = t * t + s
        root = np.sqrt(den)
        tp = np.stack([np.ones_like(t), t, t * t, t * t * t])
        iv = 2.0 * np.sum(rule.weights * c * tp / root, axis=1)
        parts = [iv]
        if depth >= 1:
            parts.append(-np.sum(rule.weights * c * tp / (den * root), axis=1))
        if depth >= 2:
            parts.append(1.5 * np.sum(rule.weights * c * tp / (den * den * root), axis=1))
        vals = np.concatenate(parts)
        if prev is not None and np.all(
            np.abs(vals - prev) <= np.maximum(1e-15, rtol * np.abs(vals))
        ):
            while len(parts) < 3:
                parts.append(None)
            return parts[0], parts[1], parts[2]
        prev = vals
        panels *= 2
    raise QuadratureNonConvergence(f"special moment quadrature did not converge at s={s}")


def moment_special(s: float, nu: int) -> float:
    """I_nu(s), the nu-th moment of the endpoint-weighted radical integrand."""
    if nu < 0:
        raise ValueError("nu must be a nonnegative integer")
    if nu <= 3:
        iv, _, _ = _special_bundle(s, depth=0)
        return float(iv[nu])

    def integrand(chi):
        t = 2.0 * np.sin(chi) ** 2 - 1.0
        return 2.0 * np.cos(chi) * t**nu / np.sqrt(t * t + s)

    if s <= 0:
        raise DivergentIntegral("moment integrals require s > 0")
    val, _ = adaptive_integral(integrand, 0.0, math.pi / 2.0, rtol=1e-12)
    return float(val.real)


def check_special_relations(s: float) -> tuple[float, float, float]:
    """Residuals of the derivative recurrence and the two integration-by-parts identities."""
    iv, div, _ = _special_bundle(s, depth=1)
    rec = div[2] + 0.5 * iv[0] + s * div[0]
    two = div[2] + div[1] + 0.25 * iv[0] - 1.0 / (2.0 * math.sqrt(1.0 + s))
    three = div[3] - div[1] + 0.75 * iv[1] + 0.25 * iv[0]
    return float(rec), float(two), float(three)


def special_der1_residual(s: float) -> float:
    """Residual of the eliminated first-moment derivative identity."""
    iv, div, _ = _special_bundle(s, depth=1)
    return float(div[1] - s * div[0] - 0.25 * iv[0] - 1.0 / (2.0 * math.sqrt(1.0 + s)))


def special_ode_residual(s: float) -> float:
    """16 s (1+s) I0'' + 16 (1+2s) I0' + 3 I0 + 2 / sqrt(1+s)."""
    iv, div, d2v = _special_bundle(s)
    return float(
        16.0 * s * (1.0 + s) * d2v[0]
        + 16.0 * (1.0 + 2.0 * s) * div[0]
        + 3.0 * iv[0]
        + 2.0 / math.sqrt(1.0 + s)
    )


def solve_special_ode(s0: float, s1: float, samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the moment ODE as an IVP seeded by quadrature values at s0.

    Returns (s_grid, I0_values) on `samples` equally spaced points.
    """
    from scipy.integrate import solve_ivp

    if not 0 < s0 < s1:
        raise ValueError("need 0 < s0 < s1")
    iv, div, _ = _special_bundle(s0, depth=1)

    def rhs(s, y):
        return [
            y[1],
            (-2.0 / math.sqrt(1.0 + s) - 16.0 * (1.0 + 2.0 * s) * y[1] - 3.0 * y[0])
            / (16.0 * s * (1.0 + s)),
        ]

    grid = np.linspace(s0, s1, samples)
    sol = solve_ivp(
        rhs,
        (s0, s1),
        [float(iv[0]), float(div[0])],
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
        t_eval=grid,
    )
    if not sol.success:
        raise StepSizeUnderflow(f"ODE integration failed: {sol.message}")
    return grid, sol.y[0]


@lru_cache(maxsize=1)
def resolve_elliptic_convention() -> str:
    """Pick the K-argument convention making the homogeneous solution residual small.

    Tested once at s = 1; the parameter convention (argument taken as m, not
    as a modulus k to be squared) is the one that satisfies the equation.
    """
    best = None
    for conv in ("parameter", "modulus"):
        r = abs(_y1_hom_residual(1.0, conv))
        if best is None or r < best[1]:
            best = (conv, r)
    return best[0]


def y1_value(s: float, convention: str | None = None) -> float:
    """Homogeneous solution built from the complete elliptic integral by the AGM."""
    if convention is None:
        convention = resolve_elliptic_convention()
    x = (math.sqrt(1.0 + s) - 1.0) / (2.0 * math.sqrt(1.0 + s))
    m = x if convention == "parameter" else x * x
    return 2.0 / (math.pi * (1.0 + s) ** 0.25) * agm_elliptic_k(m)


def _y1_hom_residual(s: float, convention: str, h: float = 3e-4) -> float:
    y0 = y1_value(s, convention)
    yp = (y1_value(s + h, convention) - y1_value(s - h, convention)) / (2.0 * h)
    ypp = (y1_value(s + h, convention) - 2.0 * y0 + y1_value(s - h, convention)) / (h * h)
    return 16.0 * s * (1.0 + s) * ypp + 16.0 * (1.0 + 2.0 * s) * yp + 3.0 * y0


def y1_homogeneous_check(s: float) -> float:
    """Finite-difference residual of the homogeneous equation at the adopted convention."""
    return _y1_hom_residual(s, resolve_elliptic_convention())


# ---------------------------------------------------------------------------
# general moment family


@dataclass(frozen=True)
class SpecialCaseVars:
    """Changed variables (s, u, a) of the moment family for a general cubic."""

    s: complex
    u: complex
    a: complex


def special_vars(sc: ShiftedCubic, z: complex) -> SpecialCaseVars:
    a = sc.v * sc.v - 4.0 * sc.w
    if abs(a) < 1e-12 * max(1.0, abs(sc.v) ** 2 + 4.0 * abs(sc.w)):
        raise ResonantCubic("v^2 - 4w = 0")
    s = -16.0 * sc.w * (z * z + sc.v * z + sc.w) / (a * a)
    u = sc.v * (sc.v + 2.0 * z) / a
    return SpecialCaseVars(s=s, u=u, a=a)


def _general_bundle(sc: ShiftedCubic, z: complex, rtol: float = 1e-11):
    """I_nu and dI_nu/ds for nu = 0..3, plus the continued endpoint root.

    Uses theta with t = 2 theta^2 - 1 (endpoint singularity removed); the
    branch of sqrt((t+u)^2 + s) is continued from its value 2 z / sqrt(a)
    at theta = 0, which makes nu = 0 reduce to the averaged transform.
    """
    sv = special_vars(sc, z)
    sa = cmath.sqrt(sv.a)
    anchor = 2.0 * z / sa
    prev = None
    panels = 4
    while panels <= 1024:
        rule = composite_rule(0.0, 1.0, panels)
        theta = rule.nodes
        t = 2.0 * theta * theta - 1.0
        rad = (t + sv.u) ** 2 + sv.s
        rad_all = np.concatenate([rad, [(1.0 + sv.u) ** 2 + sv.s]])
        if np.min(np.abs(rad_all)) < 1e-13 * max(np.max(np.abs(rad_all)), 1e-300):
            raise OnOrInsideSupport("moment radicand vanishes on the path")
        g_all = continued_sqrt(rad_all, anchor)
        g = g_all[:-1]
        g_end = g_all[-1]
        tu = np.stack([np.ones_like(t) + 0j, t + sv.u, (t + sv.u) ** 2, (t + sv.u) ** 3])
        iv = (2.0 / sa) * np.sum(rule.weights * tu / g, axis=1)
        div = (-1.0 / sa) * np.sum(rule.weights * tu / (rad * g), axis=1)
        vals = np.concatenate([iv, div])
        if prev is not None and np.all(
            np.abs(vals - prev) <= np.maximum(1e-15, rtol * np.abs(vals))
        ):
            return iv, div, g_end, sv, sa
        prev = vals
        panels *= 2
    raise QuadratureNonConvergence("general moment quadrature did not converge")


def moment_general(sc: ShiftedCubic, z: complex, nu: int) -> complex:
    if not 0 <= nu <= 3:
        raise ValueError("nu must be in 0..3")
    p = LimitProfile.from_shifted(sc)
    exterior_guard(p, z)
    iv, _, _, _, _ = _general_bundle(sc, z)
    return complex(iv[nu])


def check_general_relations(sc: ShiftedCubic, z: complex) -> tuple[complex, complex, complex]:
    """Residuals of the general derivative recurrence and by-parts identities.

    The boundary terms carry 1/sqrt(a) with the square root consistent with
    the continued integrand branch at t = 1.
    """
    p = LimitProfile.from_shifted(sc)
    exterior_guard(p, z)
    iv, div, g_end, sv, sa = _general_bundle(sc, z)
    u, s = sv.u, sv.s
    rec = div[2] + 0.5 * iv[0] + s * div[0]
    two = div[2] + div[1] - u * div[1] + 0.25 * iv[0] - 1.0 / (2.0 * sa * g_end)
    three = (
        div[3]
        - div[1]
        - (u * u - 2.0 * u) * div[1]
        + 0.75 * iv[1]
        - (u - 1.0) / 4.0 * iv[0]
        - u / (sa * g_end)
    )
    return complex(rec), complex(two), complex(three)


# ---------------------------------------------------------------------------
# transform comparison (balayage check)


def compare_transforms(mu, p: LimitProfile, points, origin: complex = 0.0):
    """Per-point |C_mu - C_M| and |pot_mu - pot_M|.

    mu atoms and points live in a common frame; the averaged measure sits at
    `origin` in that frame (its own coordinate is z - origin).
    """
    from .spectral import cauchy_transform_empirical, log_potential_empirical

    out = []
    for z in points:
        zs = z - origin
        try:
            exterior_guard(p, zs)
        except OnOrInsideSupport as exc:
            raise PointInsideEllipse(str(exc)) from exc
        c_emp = cauchy_transform_empirical(mu, z)
        c_avg = cauchy_averaged(p, zs)
        pot_emp = log_potential_empirical(mu, z)
        pot_avg = log_potential_averaged(p, zs)
        out.append((abs(c_emp - c_avg), abs(pot_emp - pot_avg)))
    return out
