"""Cubic polynomials given by their roots, root-centered shifts, and hull geometry.

Everything downstream is driven by the three roots of a monic cubic Q: the
spectral matrix is built from the coefficients of Q after translating one
root to the origin, and the inclusion results are stated relative to the
convex hull of the roots.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

COLLINEAR_RTOL = 1e-12


class DuplicateRoot(ValueError):
    """Two of the prescribed cubic roots coincide."""


@dataclass(frozen=True)
class CubicConfig:
    """Monic cubic stored by its three pairwise-distinct roots."""

    a1: complex
    a2: complex
    a3: complex
    leading: complex = 1.0

    def __post_init__(self):
        roots = (self.a1, self.a2, self.a3)
        for i in range(3):
            for j in range(i + 1, 3):
                if roots[i] == roots[j]:
                    raise DuplicateRoot(f"roots {i + 1} and {j + 1} coincide at {roots[i]}")

    @property
    def roots(self) -> tuple[complex, complex, complex]:
        return (self.a1, self.a2, self.a3)

    @property
    def collinear(self) -> bool:
        # cross product of the two edge vectors, zero-tested relative to their lengths
        d2 = self.a2 - self.a1
        d3 = self.a3 - self.a1
        return abs((d2 * d3.conjugate()).imag) <= COLLINEAR_RTOL * abs(d2) * abs(d3)

    def __call__(self, z: complex) -> complex:
        return self.leading * (z - self.a1) * (z - self.a2) * (z - self.a3)


@dataclass(frozen=True)
class ShiftedCubic:
    """Coefficients (v, w) of Q(z) = z(z^2 + v z + w) after moving one root to 0.

    w is the product of the two remaining shifted roots and is nonzero exactly
    when the original roots are pairwise distinct.
    """

    v: complex
    w: complex
    origin_root_index: int

    def __post_init__(self):
        if self.w == 0:
            raise DuplicateRoot("shifted cubic has a repeated root at the origin (w = 0)")
        if self.origin_root_index not in (1, 2, 3):
            raise ValueError("origin_root_index must be 1, 2 or 3")

    @property
    def other_roots(self) -> tuple[complex, complex]:
        """The two nonzero roots of z^2 + v z + w, in shifted coordinates."""
        disc = cmath.sqrt(self.v * self.v - 4.0 * self.w)
        r1 = (-self.v + disc) / 2.0
        r2 = (-self.v - disc) / 2.0
        return (r1, r2)

    def __call__(self, z: complex) -> complex:
        return z * (z * z + self.v * z + self.w)


@dataclass(frozen=True)
class LowDegreePoly:
    """P(z) = alpha z^2 + beta z + gamma, degree at most two."""

    alpha: complex
    beta: complex
    gamma: complex

    def __call__(self, z: complex) -> complex:
        return (self.alpha * z + self.beta) * z + self.gamma

    def shifted(self, c: complex) -> "LowDegreePoly":
        """Rewrite P in the coordinate z' = z - c, i.e. return P(z' + c)."""
        return LowDegreePoly(
            self.alpha,
            2.0 * self.alpha * c + self.beta,
            (self.alpha * c + self.beta) * c + self.gamma,
        )


def lame_derivative_poly(sc: ShiftedCubic) -> LowDegreePoly:
    """P = Q'/2 for the monic shifted cubic, the classical Lame choice."""
    return LowDegreePoly(1.5, sc.v, sc.w / 2.0)


@dataclass(frozen=True)
class ConvexHull:
    """Convex hull of the three roots: a triangle, or a segment when collinear."""

    vertices: tuple[complex, ...] = field()

    @property
    def centroid(self) -> complex:
        return sum(self.vertices) / len(self.vertices)

    @property
    def diameter(self) -> float:
        vs = self.vertices
        return max(abs(p - q) for p in vs for q in vs)


def cubic_from_roots(a1: complex, a2: complex, a3: complex) -> CubicConfig:
    return CubicConfig(complex(a1), complex(a2), complex(a3))


def shift_to_root(c: CubicConfig, i: int) -> ShiftedCubic:
    """Translate root a_i to the origin; the other two roots b, c give v = -(b+c), w = bc."""
    if i not in (1, 2, 3):
        raise ValueError("root index must be 1, 2 or 3")
    origin = c.roots[i - 1]
    others = [r - origin for k, r in enumerate(c.roots) if k != i - 1]
    return ShiftedCubic(-(others[0] + others[1]), others[0] * others[1], i)


def unshift_roots(sc: ShiftedCubic, origin: complex) -> tuple[complex, complex, complex]:
    """Roots of the reconstructed cubic back in the original coordinate."""
    r1, r2 = sc.other_roots
    return (origin, r1 + origin, r2 + origin)


def convex_hull(c: CubicConfig) -> ConvexHull:
    if c.collinear:
        # keep the two extreme points of the segment
        ref = c.a2 - c.a1
        if ref == 0:  # pragma: no cover - excluded by CubicConfig
            ref = c.a3 - c.a1
        ts = sorted(c.roots, key=lambda r: ((r - c.a1) * ref.conjugate()).real)
        return ConvexHull((ts[0], ts[-1]))
    # counterclockwise orientation via the signed cross product
    d2 = c.a2 - c.a1
    d3 = c.a3 - c.a1
    if (d2.conjugate() * d3).imag > 0:
        return ConvexHull((c.a1, c.a2, c.a3))
    return ConvexHull((c.a1, c.a3, c.a2))


def _segment_distance(z: complex, p: complex, q: complex) -> float:
    d = q - p
    L2 = (d * d.conjugate()).real
    if L2 == 0.0:
        return abs(z - p)
    t = ((z - p) * d.conjugate()).real / L2
    t = min(1.0, max(0.0, t))
    return abs(z - (p + t * d))


def hull_distance(h: ConvexHull, z: complex) -> float:
    """Distance from z to the filled hull (zero inside)."""
    vs = h.vertices
    if len(vs) == 3:
        inside = True
        for k in range(3):
            p, q = vs[k], vs[(k + 1) % 3]
            if ((q - p).conjugate() * (z - p)).imag < 0:
                inside = False
                break
        if inside:
            return 0.0
        return min(_segment_distance(z, vs[k], vs[(k + 1) % 3]) for k in range(3))
    return _segment_distance(z, vs[0], vs[-1])


def in_hull_neighborhood(h: ConvexHull, z: complex, eps: float) -> bool:
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return hull_distance(h, z) <= eps
