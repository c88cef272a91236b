"""Shear profiles b(y) on the torus and their critical-point structure.

Every supported profile is a finite trigonometric polynomial, so all
derivatives are exact (term-wise rotation of harmonics) and the random
phase integrals elsewhere in the package reduce to per-harmonic path
integrals via the angle-addition formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

TWO_PI = 2.0 * np.pi

_MAX_DERIVATIVE_ORDER = 64


class DegenerateProfileError(ValueError):
    """Raised when a critical point is degenerate beyond the supported order."""


def torus_distance(y1, y2):
    """Geodesic distance on T = R / 2*pi*Z (min over integer shifts)."""
    d = np.mod(np.asarray(y1) - np.asarray(y2), TWO_PI)
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True)
class ShearProfile:
    """A smooth 2*pi-periodic shear profile stored as cosine/sine harmonics.

    b(y) = sum_k cos_coeffs[k] * cos(k y) + sin_coeffs[k] * sin(k y),
    with k = 0 .. len(coeffs)-1.  Immutable; shareable across workers.
    """

    cos_coeffs: tuple = field(default_factory=tuple)
    sin_coeffs: tuple = field(default_factory=tuple)
    label: str = "custom"

    @staticmethod
    def cos_power(m: int) -> "ShearProfile":
        """b(y) = cos^m(y), expanded into harmonics exactly."""
        if m < 1:
            raise ValueError(f"cos_power requires m >= 1, got {m}")
        a = np.zeros(m + 1)
        # cos^m y = 2^(1-m) * sum_{j < m/2} C(m,j) cos((m-2j) y)  (+ central term)
        for j in range(m // 2 + 1):
            k = m - 2 * j
            if k == 0:
                a[0] += comb(m, j) * 2.0 ** (-m)
            else:
                a[k] += comb(m, j) * 2.0 ** (1 - m)
        return ShearProfile(tuple(a), tuple(np.zeros(m + 1)), label=f"cos^{m}")

    @staticmethod
    def from_fourier(terms) -> "ShearProfile":
        """Build from a list of (wavenumber, cosine amplitude, sine amplitude)."""
        if not terms:
            raise ValueError("empty Fourier series")
        kmax = max(int(k) for k, _, _ in terms)
        a = np.zeros(kmax + 1)
        s = np.zeros(kmax + 1)
        for k, ak, sk in terms:
            k = int(k)
            if k < 0:
                raise ValueError("wavenumbers must be nonnegative")
            a[k] += ak
            s[k] += sk
        return ShearProfile(tuple(a), tuple(s), label="fourier")

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(len(self.cos_coeffs))

    def harmonics(self, order: int = 0):
        """(a_k, s_k) arrays of the order-th derivative, exact term-wise."""
        if order < 0:
            raise ValueError(f"derivative order must be nonnegative, got {order}")
        if order > _MAX_DERIVATIVE_ORDER:
            raise ValueError(
                f"derivative order {order} exceeds supported maximum "
                f"{_MAX_DERIVATIVE_ORDER}"
            )
        a = np.asarray(self.cos_coeffs, dtype=float)
        s = np.asarray(self.sin_coeffs, dtype=float)
        k = self.wavenumbers.astype(float)
        for _ in range(order):
            a, s = k * s, -k * a
        return a, s

    def evaluate(self, y, order: int = 0):
        """b^(order)(y); 2*pi-periodic in y."""
        a, s = self.harmonics(order)
        y = np.asarray(y, dtype=float)
        ky = np.multiply.outer(self.wavenumbers.astype(float), y)
        out = np.tensordot(a, np.cos(ky), axes=(0, 0)) + np.tensordot(
            s, np.sin(ky), axes=(0, 0)
        )
        return out if out.ndim else float(out)

    def __call__(self, y):
        return self.evaluate(y, 0)

    def sup_norm(self, order: int = 0, n: int = 4096) -> float:
        ygrid = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return float(np.max(np.abs(self.evaluate(ygrid, order))))


def evaluate(profile: ShearProfile, y, derivative_order: int = 0):
    """Module-level alias for ShearProfile.evaluate."""
    return profile.evaluate(y, derivative_order)


@dataclass(frozen=True)
class CriticalStructure:
    """Critical points of b with the vanishing orders of b' at each."""

    points: tuple          # y_i in [0, 2*pi), strictly increasing
    orders: tuple          # N_i = vanishing order of b' at y_i
    max_order: int         # N = max_i N_i
    count: int             # m

    def min_separation(self) -> float:
        pts = np.asarray(self.points)
        if len(pts) < 2:
            return TWO_PI
        gaps = np.diff(np.concatenate([pts, [pts[0] + TWO_PI]]))
        return float(np.min(gaps))


def analyze_critical_structure(
    profile: ShearProfile,
    grid_size: int = 4096,
    newton_tol: float = 1e-13,
    order_threshold: float = 1e-8,
    max_supported_order: int = 8,
) -> CriticalStructure:
    """Locate the zeros of b' and the vanishing order at each.

    Candidates come from sign changes of b' and from near-zero local minima
    of |b'| (the latter catch even-order zeros, where b' touches zero
    without changing sign).  Each candidate is refined by Newton iteration
    on the lowest-order derivative with a simple zero there.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    ygrid = np.linspace(0.0, TWO_PI, grid_size, endpoint=False)
    bp = profile.evaluate(ygrid, 1)
    scale = np.max(np.abs(bp))
    if scale == 0.0:
        raise DegenerateProfileError("b' vanishes identically")

    candidates = []
    # sign changes of b' (odd-order zeros)
    sgn = np.sign(bp)
    for j in np.nonzero(sgn * np.roll(sgn, -1) < 0)[0]:
        y0, y1 = ygrid[j], ygrid[j] + TWO_PI / grid_size
        f0, f1 = bp[j], bp[(j + 1) % grid_size]
        candidates.append(y0 + (y1 - y0) * f0 / (f0 - f1))
    # near-zero local minima of |b'| (even-order zeros)
    mag = np.abs(bp)
    is_min = (mag < np.roll(mag, 1)) & (mag <= np.roll(mag, -1))
    for j in np.nonzero(is_min & (mag < 1e-3 * scale))[0]:
        candidates.append(ygrid[j])

    points, orders = [], []
    # per-order magnitude scale for the "nonzero derivative" test
    deriv_scale = [profile.sup_norm(order=k) for k in range(max_supported_order + 2)]
    for y0 in candidates:
        # determine the vanishing order: smallest k with |b^(k+1)| clearly nonzero
        order = None
        for k in range(1, max_supported_order + 1):
            val = abs(profile.evaluate(y0, k + 1))
            ref = deriv_scale[k + 1]
            if ref > 0 and val > order_threshold * ref:
                order = k
                break
        if order is None:
            raise DegenerateProfileError(
                f"critical point near y={y0:.6f} degenerate beyond order "
                f"{max_supported_order}"
            )
        # Newton on b^(order), which has a simple zero at y_i
        y = y0
        converged = False
        for _ in range(60):
            f = profile.evaluate(y, order)
            fp = profile.evaluate(y, order + 1)
            step = f / fp
            y -= step
            if abs(step) < newton_tol:
                converged = True
                break
        if not converged:
            raise RuntimeError(f"Newton iteration failed near y={y0:.6f}")
        y = float(np.mod(y, TWO_PI))
        if any(torus_distance(y, p) < 1e-8 for p in points):
            continue
        points.append(y)
        orders.append(order)

    if not points:
        raise DegenerateProfileError("no critical points found")
    idx = np.argsort(points)
    points = tuple(float(points[i]) for i in idx)
    orders = tuple(int(orders[i]) for i in idx)
    return CriticalStructure(
        points=points, orders=orders, max_order=max(orders), count=len(points)
    )
