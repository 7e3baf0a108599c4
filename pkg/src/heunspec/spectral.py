"""Tridiagonal spectral matrix, scaled recurrence evaluation, and root finding.

The admissible linear polynomials V(z) of the polynomial-solution problem for

    (z^3 + v z^2 + w z) S'' + (alpha z^2 + beta z + gamma) S' + V S = 0

are encoded by the roots of the determinant of an (n+1) x (n+1) complex
tridiagonal matrix that is linear in the root parameter.  The determinant is
never expanded into monomial coefficients: it is evaluated through the
principal-minor three-term recurrence with power-of-two rescaling at every
step, so that degrees around 100 stay inside double-precision range.  Roots
are found by simultaneous Aberth-Ehrlich iteration driven by the ratio of the
determinant to its derivative (both from the recurrence), then polished by
Newton steps and certified by the size of the final correction.

Notes
-----
The recurrence for the leading principal minors D_i of a tridiagonal matrix
with diagonal (x - xi_i), superdiagonal a_i and subdiagonal g_i is

    D_i = (x - xi_i) D_{i-1} - a_i g_i D_{i-2},   D_0 = 1, D_{-1} = 0,

and the derivative recurrence is obtained by differentiating term by term.
Both sequences share one power-of-two exponent per evaluation point, so the
Newton ratio D/D' is exact in the mantissas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cubics import ConvexHull, LowDegreePoly, ShiftedCubic


class DegenerateTheta(ValueError):
    """n(n - 1 + alpha) vanished; the leading coefficient cannot be annihilated."""


class RootFindingFailure(RuntimeError):
    """Simultaneous iteration did not converge within the iteration budget."""


class NullSpaceFailure(RuntimeError):
    """Forward substitution and inverse iteration both failed to produce a null vector."""


class AtomHit(ValueError):
    """Evaluation point coincides with an atom of the measure."""


def theta_n(n: int, alpha: complex) -> complex:
    if n < 1:
        raise ValueError("n must be a positive integer")
    val = n * (n - 1 + complex(alpha))
    if abs(n - 1 + complex(alpha)) < 1e-14 * (n + abs(alpha)):
        raise DegenerateTheta(f"theta_{n} = n(n-1+alpha) vanishes for alpha={alpha}")
    return val


@dataclass(frozen=True)
class SpectralMatrix:
    """Entry arrays of the tridiagonal matrix, 0-based over matrix index i = 1..n+1.

    xi has n+1 entries, alpha_off/gamma_off/psi have n entries (indices 2..n+1).
    """

    n: int
    theta: complex
    xi: np.ndarray
    alpha_off: np.ndarray
    gamma_off: np.ndarray
    psi: np.ndarray
    source: tuple[complex, complex, complex, complex, complex]  # (v, w, alpha, beta, gamma)

    @property
    def size(self) -> int:
        return self.n + 1

    def dense(self, lam: complex) -> np.ndarray:
        """Dense matrix at the given root parameter, for oracles and fallbacks."""
        m = np.zeros((self.size, self.size), dtype=complex)
        for k in range(self.size):
            m[k, k] = lam - self.xi[k]
        for k in range(self.n):
            m[k, k + 1] = self.alpha_off[k]
            m[k + 1, k] = self.gamma_off[k]
        return m


def build_matrix(sc: ShiftedCubic, p: LowDegreePoly, n: int) -> SpectralMatrix:
    v, w = sc.v, sc.w
    al, be, ga = p.alpha, p.beta, p.gamma
    th = theta_n(n, al)
    i = np.arange(1, n + 2, dtype=float)
    xi = -(v * (n - i) * (n - i + 1) + be * (n - i + 1)) / th
    i2 = i[1:]
    alpha_off = ((n - i2) * (n - i2 + 1) + al * (n - i2 + 1)) / th - 1.0
    gamma_off = (w * (n - i2 + 1) * (n - i2 + 2) + ga * (n - i2 + 2)) / th
    return SpectralMatrix(
        n=n,
        theta=th,
        xi=xi.astype(complex),
        alpha_off=alpha_off.astype(complex),
        gamma_off=gamma_off.astype(complex),
        psi=(alpha_off * gamma_off).astype(complex),
        source=(complex(v), complex(w), complex(al), complex(be), complex(ga)),
    )


@dataclass(frozen=True)
class ScaledValue:
    """Complex value mantissa * 2**exponent with |mantissa| in [1, 2), or canonical zero."""

    mantissa: complex
    exponent: int

    def to_complex(self) -> complex:
        return self.mantissa * math.pow(2.0, self.exponent)

    def abs_log2(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return math.log2(abs(self.mantissa)) + self.exponent

    @staticmethod
    def from_complex(z: complex) -> "ScaledValue":
        if z == 0:
            return ScaledValue(0j, 0)
        _, e = math.frexp(abs(z))
        return ScaledValue(z * math.pow(2.0, 1 - e), e - 1)


def _recurrence(m: SpectralMatrix, lam: np.ndarray, k: int):
    """Evaluate minor k and its derivative at points lam, sharing one exponent.

    Returns (p, dp, e2): minor = p * 2**e2, derivative = dp * 2**e2.
    """
    lam = np.asarray(lam, dtype=complex)
    p = np.ones_like(lam)
    pm1 = np.zeros_like(lam)
    dp = np.zeros_like(lam)
    dpm1 = np.zeros_like(lam)
    e2 = np.zeros(lam.shape, dtype=np.int64)
    for i in range(1, k + 1):
        xi = m.xi[i - 1]
        psi = m.psi[i - 2] if i >= 2 else 0.0
        t = lam - xi
        pnew = t * p - psi * pm1
        dpnew = p + t * dp - psi * dpm1
        pm1, p = p, pnew
        dpm1, dp = dp, dpnew
        mag = np.abs(p)
        live = mag > 0
        if np.any(live):
            _, ex = np.frexp(np.where(live, mag, 1.0))
            shift = np.where(live, ex - 1, 0).astype(np.int64)
            fac = np.exp2(-shift.astype(float))
            p = p * fac
            pm1 = pm1 * fac
            dp = dp * fac
            dpm1 = dpm1 * fac
            e2 = e2 + shift
    return p, dp, e2


def sp_eval(m: SpectralMatrix, lam: complex, k: int | None = None) -> ScaledValue:
    """Principal minor Sp_{n,k} at lam as a scaled value; k = n+1 is the full determinant."""
    if k is None:
        k = m.n + 1
    if not 0 <= k <= m.n + 1:
        raise ValueError(f"minor index k={k} outside 0..{m.n + 1}")
    p, _, e2 = _recurrence(m, np.array([lam], dtype=complex), k)
    val = ScaledValue.from_complex(complex(p[0]))
    if val.mantissa == 0:
        return val
    return ScaledValue(val.mantissa, val.exponent + int(e2[0]))


def sp_eval_derivative(m: SpectralMatrix, lam: complex, k: int | None = None) -> ScaledValue:
    if k is None:
        k = m.n + 1
    _, dp, e2 = _recurrence(m, np.array([lam], dtype=complex), k)
    val = ScaledValue.from_complex(complex(dp[0]))
    if val.mantissa == 0:
        return val
    return ScaledValue(val.mantissa, val.exponent + int(e2[0]))


def _newton_ratio(m: SpectralMatrix, lam: np.ndarray) -> np.ndarray:
    """Sp_n / Sp_n' elementwise; the shared exponent cancels."""
    p, dp, _ = _recurrence(m, lam, m.n + 1)
    dp = np.where(dp == 0, 1e-300, dp)
    return p / dp


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform probability measure on the n+1 spectral roots (with multiplicity)."""

    atoms: np.ndarray
    weight: float

    @property
    def n(self) -> int:
        return len(self.atoms) - 1

    def grouped(self, merge_tol: float | None = None) -> list[tuple[complex, int]]:
        """Distinct atoms with multiplicities (atoms equal after the merge step)."""
        out: list[tuple[complex, int]] = []
        for a in self.atoms:
            for idx, (b, k) in enumerate(out):
                if a == b or (merge_tol is not None and abs(a - b) <= merge_tol):
                    out[idx] = (b, k + 1)
                    break
            else:
                out.append((complex(a), 1))
        return out


def _initial_guesses(m: SpectralMatrix) -> np.ndarray:
    v, w = m.source[0], m.source[1]
    disc = np.sqrt(complex(v * v - 4.0 * w))
    r1 = (-v + disc) / 2.0
    r2 = (-v - disc) / 2.0
    centroid = (0.0 + r1 + r2) / 3.0
    radius = 1.5 * max(abs(r1), abs(r2))
    k = np.arange(m.n + 1, dtype=float)
    # golden-ratio phase jitter keeps the start away from symmetry axes
    angles = 2.0 * np.pi * k / (m.n + 1) + 2.0 * np.pi * 0.6180339887498949 + 0.05 * np.sin(2.7 * k)
    return centroid + radius * np.exp(1j * angles)


def _aberth_sweeps(m: SpectralMatrix, tol: float, max_iter: int) -> np.ndarray:
    """Jacobi-style simultaneous sweeps; returns estimates once they settle.

    Settling means either max correction below tol * spread or stagnation at
    the determinant-evaluation noise floor (corrections small and no longer
    halving), which is the normal outcome for n around 50: the matrix is far
    from normal and the determinant value near the interior of the root arc
    drowns in rounding noise long before 1e-12 accuracy.
    """
    z = _initial_guesses(m)
    history: list[float] = []
    for sweep in range(max_iter):
        ratio = _newton_ratio(m, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - ratio * s
        denom = np.where(denom == 0, 1.0, denom)
        corr = ratio / denom
        z = z - corr
        spread = max(float(np.max(np.abs(z - np.mean(z)))), 1e-30)
        max_corr = float(np.max(np.abs(corr)))
        history.append(max_corr)
        if max_corr < tol * spread:
            return z
        if (
            sweep >= 30
            and max_corr < 1e-3 * spread
            and min(history[-15:]) > 0.5 * min(history[:-15])
        ):
            return z
    raise RootFindingFailure(
        f"Aberth iteration neither converged nor stagnated in {max_iter} sweeps "
        f"(last max correction {history[-1]:.3e})"
    )


def _eig_roots(m: SpectralMatrix) -> np.ndarray:
    """Eigenvalues of a tridiagonal matrix whose characteristic polynomial is Sp_n.

    Backward-stable fallback for sizes where the determinant value near the
    root arc is numerically indistinguishable from zero over a fat region, so
    no determinant-driven iteration can localize the interior roots.  The
    minor recurrence only sees the diagonal and the off-diagonal pair
    products, so the complex-symmetric balanced form with off-diagonals
    sqrt(psi) has the identical spectral polynomial while being far less
    non-normal than the raw matrix.
    """
    a = np.diag(m.xi).astype(complex)
    idx = np.arange(m.n)
    s = np.sqrt(m.psi.astype(complex))
    a[idx, idx + 1] = s
    a[idx + 1, idx] = s
    return np.linalg.eigvals(a)


def spectral_roots(
    m: SpectralMatrix,
    tol: float = 1e-12,
    max_iter: int = 200,
    merge_rtol: float = 1e-7,
    certify_tol: float = 1e-8,
    method: str = "auto",
) -> EmpiricalMeasure:
    """All n+1 roots of the spectral determinant, with multiplicity.

    The primary path is simultaneous Aberth-Ehrlich iteration on the scaled
    recurrence followed by Newton polish.  When that cannot settle (the
    determinant noise plateau swallows the root spacing, typical beyond
    n around 70), the auto mode falls back to the eigenvalues of the
    tridiagonal matrix.  Either way every distinct root is certified by the
    null-space residual of its recovered solution vector; certification
    failure raises, never a silent partial result.
    """
    if method not in ("auto", "aberth", "eig"):
        raise ValueError("method must be auto, aberth or eig")
    nroots = m.n + 1
    if method == "eig":
        best = _eig_roots(m)
    else:
        try:
            z = _aberth_sweeps(m, tol, max_iter)
            # Newton polish, keeping the iterate with the smallest step per root
            best = z.copy()
            best_step = np.abs(_newton_ratio(m, z))
            for _ in range(5):
                z = z - _newton_ratio(m, z)
                cur = np.abs(_newton_ratio(m, z))
                better = cur < best_step
                best[better] = z[better]
                best_step[better] = cur[better]
        except RootFindingFailure:
            if method == "aberth":
                raise
            best = _eig_roots(m)
    spread = max(float(np.max(np.abs(best - np.mean(best)))), 1e-30)
    atoms = _merge_close(best, merge_rtol * spread)
    mu = EmpiricalMeasure(atoms=atoms, weight=1.0 / nroots)
    worst = 0.0
    for t, _ in mu.grouped():
        sol = recover_solution(m, t, residual_tol=math.inf)
        worst = max(worst, _null_residual(m, t, sol.coefficients))
    if worst > certify_tol:
        raise RootFindingFailure(
            f"root certification failed: worst null-space residual {worst:.3e} > {certify_tol:g}"
        )
    return mu


def _merge_close(z: np.ndarray, merge_tol: float) -> np.ndarray:
    """Cluster roots closer than merge_tol; each cluster mean is repeated with multiplicity."""
    remaining = list(range(len(z)))
    clusters: list[list[int]] = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        changed = True
        while changed:
            changed = False
            for j in list(remaining):
                if any(abs(z[j] - z[k]) <= merge_tol for k in members):
                    members.append(j)
                    remaining.remove(j)
                    changed = True
        clusters.append(members)
    atoms = []
    for members in clusters:
        center = complex(np.mean(z[members]))
        atoms.extend([center] * len(members))
    return np.array(atoms, dtype=complex)


def root_residual(m: SpectralMatrix, t: complex) -> float:
    """Size of the Newton correction at t, relative to the root scale."""
    step = _newton_ratio(m, np.array([t], dtype=complex))
    return float(abs(step[0]) / max(1.0, abs(t)))


@dataclass(frozen=True)
class PolynomialSolution:
    """Coefficients u_0..u_n (descending powers, u_0 = 1) of the degree-n solution."""

    coefficients: np.ndarray
    degree: int
    root: complex


def recover_solution(m: SpectralMatrix, lam: complex, residual_tol: float = 1e-8) -> PolynomialSolution:
    """Null vector of the tridiagonal matrix at a root, normalized to u_0 = 1.

    Forward substitution solves rows 1..n exactly; row n+1 is the closure
    residual and is small exactly when lam is a root.  If a superdiagonal
    entry is too small to divide by, inverse iteration takes over.
    """
    n = m.n
    u = np.zeros(n + 1, dtype=complex)
    u[0] = 1.0
    ok = True
    scale = float(np.max(np.abs(m.alpha_off))) if n >= 1 else 1.0
    for i in range(1, n + 1):
        a = m.alpha_off[i - 1]
        if abs(a) < 1e-12 * max(scale, 1.0):
            ok = False
            break
        rhs = (lam - m.xi[i - 1]) * u[i - 1]
        if i >= 2:
            rhs += m.gamma_off[i - 2] * u[i - 2]
        u[i] = -rhs / a
    if ok:
        res = _null_residual(m, lam, u)
        if res < residual_tol:
            return PolynomialSolution(coefficients=u, degree=n, root=complex(lam))
    u = _inverse_iteration(m, lam)
    res = _null_residual(m, lam, u)
    if res >= residual_tol:
        raise NullSpaceFailure(f"null-space residual {res:.3e} above {residual_tol:g} at root {lam}")
    return PolynomialSolution(coefficients=u, degree=n, root=complex(lam))


def _tridiag_apply(m: SpectralMatrix, lam: complex, u: np.ndarray) -> np.ndarray:
    out = (lam - m.xi) * u
    out[:-1] += m.alpha_off * u[1:]
    out[1:] += m.gamma_off * u[:-1]
    return out


def _null_residual(m: SpectralMatrix, lam: complex, u: np.ndarray) -> float:
    norm = float(np.max(np.abs(u)))
    if norm == 0:
        return math.inf
    return float(np.max(np.abs(_tridiag_apply(m, lam, u)))) / norm


def _inverse_iteration(m: SpectralMatrix, lam: complex, sweeps: int = 4) -> np.ndarray:
    from scipy.linalg import solve_banded

    n1 = m.n + 1
    ab = np.zeros((3, n1), dtype=complex)
    ab[0, 1:] = m.alpha_off
    ab[1, :] = lam - m.xi
    ab[2, :-1] = m.gamma_off
    # tiny diagonal shift keeps the factorization of the singular matrix finite
    eps = 1e-14 * max(1.0, float(np.max(np.abs(ab[1]))))
    ab[1, :] += eps
    rng = np.random.default_rng(7)
    u = rng.standard_normal(n1) + 1j * rng.standard_normal(n1)
    for _ in range(sweeps):
        u = solve_banded((1, 1), ab, u)
        u = u / np.max(np.abs(u))
    if u[0] == 0:
        raise NullSpaceFailure("inverse iteration produced a null vector with u_0 = 0")
    return u / u[0]


def operator_residual(sc: ShiftedCubic, p: LowDegreePoly, s: PolynomialSolution) -> float:
    """Max coefficient of Q S'' + P S' - theta (z - lam) S, relative to max |u|."""
    u = s.coefficients
    n = s.degree
    th = theta_n(n, p.alpha)
    q = np.array([1.0, sc.v, sc.w, 0.0], dtype=complex)
    pp = np.array([p.alpha, p.beta, p.gamma], dtype=complex)
    d1 = np.polyder(u)
    d2 = np.polyder(u, 2) if n >= 2 else np.zeros(1, dtype=complex)
    total = np.polymul(q, d2)
    total = np.polyadd(total, np.polymul(pp, d1))
    vlin = np.array([-th, th * s.root], dtype=complex)
    total = np.polyadd(total, np.polymul(vlin, u))
    return float(np.max(np.abs(total)) / np.max(np.abs(u)))


def coefficient_limit_deviation(m: SpectralMatrix) -> float:
    """Max distance of the matrix entries from their smooth large-n profiles."""
    v, w = m.source[0], m.source[1]
    n = m.n
    i = np.arange(1, n + 2, dtype=float)
    tau = i / (n + 1)
    th = 1.0 - tau
    xi_lim = -v * th * th
    psi_lim = -w * (1.0 - th * th) * th * th
    dev_xi = np.abs(m.xi - xi_lim)
    dev = dev_xi[0]
    combined = dev_xi[1:] + np.abs(m.psi - psi_lim[1:])
    return float(max(dev, np.max(combined)))


def cauchy_transform_empirical(mu: EmpiricalMeasure, z: complex) -> complex:
    d = z - mu.atoms
    if np.min(np.abs(d)) < 1e-14:
        raise AtomHit(f"evaluation point {z} coincides with an atom")
    return complex(mu.weight * np.sum(1.0 / d))


def log_potential_empirical(mu: EmpiricalMeasure, z: complex) -> float:
    d = np.abs(z - mu.atoms)
    if np.min(d) < 1e-14:
        raise AtomHit(f"evaluation point {z} coincides with an atom")
    return float(mu.weight * np.sum(np.log(d)))


def translate_measure(mu: EmpiricalMeasure, c: complex) -> EmpiricalMeasure:
    return EmpiricalMeasure(atoms=mu.atoms + c, weight=mu.weight)


def polya_inclusion_check(hull: ConvexHull, mu: EmpiricalMeasure, eps: float) -> bool:
    from .cubics import in_hull_neighborhood

    return all(in_hull_neighborhood(hull, complex(a), eps) for a in mu.atoms)
