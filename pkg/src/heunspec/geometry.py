"""Chord-family geometry of the averaged arcsine measure.

The large-n limits of the matrix entries define, for each tau in [0, 1], a
complex segment carrying an arcsine measure.  The endpoints of the family
sweep an ellipse through the origin whose foci are the two nonzero roots of
the shifted cubic; when the three roots are collinear with the origin root in
the middle, the ellipse collapses to a segment.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .cubics import ShiftedCubic


class ZeroW(ValueError):
    """w = 0 leaves the chord direction undefined."""


class DegenerateEllipse(ValueError):
    """The endpoint curve collapses to a segment (collinear-roots shift)."""


@dataclass(frozen=True)
class LimitProfile:
    """Coefficients (v, w) of the shifted cubic together with u, a square root of w.

    u defaults to the principal branch; the derived geometry is invariant
    under u -> -u, which the test suite checks.
    """

    v: complex
    w: complex
    u: complex = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.u is None:
            object.__setattr__(self, "u", cmath.sqrt(self.w))
        if abs(self.u * self.u - self.w) > 1e-14 * max(1.0, abs(self.w)):
            raise ValueError("u is not a square root of w")

    @staticmethod
    def from_shifted(sc: ShiftedCubic) -> "LimitProfile":
        return LimitProfile(sc.v, sc.w)

    def xi(self, tau: float) -> complex:
        th = 1.0 - tau
        return -self.v * th * th

    def psi(self, tau: float) -> complex:
        th = 1.0 - tau
        return -self.w * (1.0 - th * th) * th * th

    @property
    def degenerate(self) -> bool:
        return abs(self._bcad()) <= 1e-13 * max(1.0, abs(self.v) * abs(self.u))

    def _bcad(self) -> float:
        # BC - AD in the notation below, equal to Re(v * conj(u))
        return (self.v * self.u.conjugate()).real


@dataclass(frozen=True)
class ComplexSegment:
    e1: complex
    e2: complex

    @property
    def midpoint(self) -> complex:
        return (self.e1 + self.e2) / 2.0

    @property
    def half(self) -> complex:
        return (self.e2 - self.e1) / 2.0

    @property
    def is_point(self) -> bool:
        return self.e1 == self.e2


def segment_at(p: LimitProfile, tau: float) -> ComplexSegment:
    """Chord at parameter tau: midpoint xi(tau), endpoints xi +- 2 sqrt(psi)."""
    mid = p.xi(tau)
    off = 2.0 * cmath.sqrt(p.psi(tau))
    return ComplexSegment(mid - off, mid + off)


def segment_direction(p: LimitProfile) -> complex:
    if p.w == 0:
        raise ZeroW("w = 0: chord direction undefined")
    d = 1j * p.u
    return d / abs(d)


@dataclass(frozen=True)
class EllipseGeometry:
    """Quadratic form and metric data of the endpoint ellipse.

    The form a11 x^2 + 2 a12 x y + a22 y^2 + 2 a13 x + 2 a23 y has no
    constant term (the curve passes through the origin), so the inside sign
    is anchored by the value at the center.  eccentricity is the
    center-to-focus distance c, with a^2 = b^2 + c^2.
    """

    a11: float
    a12: float
    a22: float
    a13: float
    a23: float
    A: float
    B: float
    C: float
    D: float
    center: complex
    semi_major: float
    semi_minor: float
    eccentricity: float
    f1: complex
    f2: complex
    delta_det: float
    delta_minor: float
    iota: float
    center_sign: float = field(default=0.0)

    def form(self, z: complex) -> float:
        x, y = z.real, z.imag
        return (
            self.a11 * x * x
            + 2.0 * self.a12 * x * y
            + self.a22 * y * y
            + 2.0 * self.a13 * x
            + 2.0 * self.a23 * y
        )


def gamma_param(p: LimitProfile, phi: float) -> tuple[complex, complex]:
    """The two boundary points -v sin^2(phi) +- i u sin(2 phi)."""
    s2 = math.sin(phi) ** 2
    s22 = math.sin(2.0 * phi)
    base = -p.v * s2
    off = 1j * p.u * s22
    return (base + off, base - off)


def ellipse_geometry(p: LimitProfile) -> EllipseGeometry:
    A = -p.v.real
    B = -p.u.imag
    C = -p.v.imag
    D = p.u.real
    bcad = B * C - A * D
    scale = max(1.0, abs(p.v) * abs(p.u))
    if abs(bcad) <= 1e-13 * scale:
        raise DegenerateEllipse(
            "endpoint curve is a segment (roots collinear about the origin root)"
        )
    a11 = C * C + 4.0 * D * D
    a12 = -(A * C + 4.0 * B * D)
    a22 = A * A + 4.0 * B * B
    a13 = 2.0 * D * bcad
    a23 = -2.0 * B * bcad
    delta_det = -4.0 * bcad**4
    delta_minor = 4.0 * bcad * bcad
    iota = a11 + a22
    s = math.sqrt(max(iota * iota - 4.0 * delta_minor, 0.0))
    # eigenvalues of the quadratic part are 4a^2 and 4b^2 for this family
    lam_max = (iota + s) / 2.0
    lam_min = (iota - s) / 2.0
    a = 0.5 * math.sqrt(lam_max)
    b = 0.5 * math.sqrt(max(lam_min, 0.0))
    c = 0.5 * math.sqrt(math.sqrt(max(iota * iota - 4.0 * delta_minor, 0.0)))
    center = complex(A / 2.0, C / 2.0)
    disc = cmath.sqrt(p.v * p.v - 4.0 * p.w)
    f1 = (-p.v + disc) / 2.0
    f2 = (-p.v - disc) / 2.0
    geo = EllipseGeometry(
        a11=a11,
        a12=a12,
        a22=a22,
        a13=a13,
        a23=a23,
        A=A,
        B=B,
        C=C,
        D=D,
        center=center,
        semi_major=a,
        semi_minor=b,
        eccentricity=c,
        f1=f1,
        f2=f2,
        delta_det=delta_det,
        delta_minor=delta_minor,
        iota=iota,
    )
    object.__setattr__(geo, "center_sign", math.copysign(1.0, geo.form(center)))
    return geo


def ellipse_form_residual(e: EllipseGeometry, z: complex) -> float:
    return e.form(z)


def boundary_points(e: EllipseGeometry, p: LimitProfile, count: int = 256) -> np.ndarray:
    """Samples of the boundary over phi in [-pi/2, pi/2] (single sign covers both branches)."""
    phis = np.linspace(-math.pi / 2.0, math.pi / 2.0, count, endpoint=False)
    s2 = np.sin(phis) ** 2
    s22 = np.sin(2.0 * phis)
    return -p.v * s2 + 1j * p.u * s22


def boundary_distance(e: EllipseGeometry, p: LimitProfile, z: complex) -> float:
    """Distance from z to the boundary via sampling plus local refinement in phi."""
    phis = np.linspace(-math.pi / 2.0, math.pi / 2.0, 720)
    pts = -p.v * np.sin(phis) ** 2 + 1j * p.u * np.sin(2.0 * phis)
    d = np.abs(pts - z)
    k = int(np.argmin(d))
    lo = phis[max(k - 1, 0)]
    hi = phis[min(k + 1, len(phis) - 1)]

    def dist(phi):
        return abs(-p.v * math.sin(phi) ** 2 + 1j * p.u * math.sin(2.0 * phi) - z)

    # golden-section refinement
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1v, f2v = dist(x1), dist(x2)
    for _ in range(60):
        if f1v < f2v:
            hi, x2, f2v = x2, x1, f1v
            x1 = hi - g * (hi - lo)
            f1v = dist(x1)
        else:
            lo, x1, f1v = x1, x2, f2v
            x2 = lo + g * (hi - lo)
            f2v = dist(x2)
    return min(f1v, f2v)


def is_strictly_outside(e: EllipseGeometry, z: complex, margin: float = 0.0) -> bool:
    if math.copysign(1.0, e.form(z)) == e.center_sign:
        return False
    if margin <= 0.0:
        return True
    # reconstruct the profile quantities needed for the parametric boundary
    v = complex(-e.A, -e.C)
    u = complex(e.D, -e.B)
    p = LimitProfile(v, u * u, u)
    return boundary_distance(e, p, z) >= margin


def support_segment(p: LimitProfile, samples: int = 512) -> ComplexSegment:
    """Extent of the degenerate (collinear) support along the chord direction."""
    d = segment_direction(p)
    taus = np.linspace(0.0, 1.0, samples)
    lo = math.inf
    hi = -math.inf
    for tau in taus:
        seg = segment_at(p, float(tau))
        for endp in (seg.e1, seg.e2):
            t = (endp * d.conjugate()).real
            lo = min(lo, t)
            hi = max(hi, t)
    return ComplexSegment(lo * d, hi * d)
