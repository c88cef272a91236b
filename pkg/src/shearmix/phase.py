"""Random phase phi_t(y) and its derivative field S_t(y) along a shared path.

Because every shear profile is a trigonometric polynomial, the angle-
addition formulas turn the node-wise time integrals into per-harmonic
path integrals:

    phi_t(y) = sum_k A_k(t) cos(k y) + B_k(t) sin(k y),
    A_k = a_k * int cos(k w_s) ds + s_k * int sin(k w_s) ds,
    B_k = s_k * int cos(k w_s) ds - a_k * int sin(k w_s) ds,

with w_s = sqrt(2 nu) W_s.  This is an exact rearrangement of the
trapezoid quadrature at every grid node and additionally lets us evaluate
phi, S = phi', and S' anywhere on the torus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .brownian import BrownianPath
from .grid import PeriodicGrid1D, TWO_PI
from .shear import CriticalStructure, ShearProfile, torus_distance


class LemmaViolationError(RuntimeError):
    """Diagnostic error: an interval assumed sign-definite is not."""


def _trig_eval(cos_c: np.ndarray, sin_c: np.ndarray, y, order: int = 0):
    """Evaluate sum_k cos_c[k] cos(ky) + sin_c[k] sin(ky), or a derivative."""
    a = np.asarray(cos_c, dtype=float).copy()
    s = np.asarray(sin_c, dtype=float).copy()
    k = np.arange(len(a), dtype=float)
    for _ in range(order):
        a, s = k * s, -k * a
    y = np.asarray(y, dtype=float)
    ky = np.multiply.outer(k, y)
    out = np.tensordot(a, np.cos(ky), axes=(0, 0)) + np.tensordot(
        s, np.sin(ky), axes=(0, 0)
    )
    return out if out.ndim else float(out)


@dataclass
class PhaseField:
    """phi and S sampled on a y-grid for one (path, t), plus exact harmonics."""

    grid: PeriodicGrid1D
    t: float
    phi: np.ndarray
    S: np.ndarray
    path_seed: int
    nu: float
    phi_cos: np.ndarray = field(repr=False, default=None)
    phi_sin: np.ndarray = field(repr=False, default=None)

    def phi_at(self, y):
        return _trig_eval(self.phi_cos, self.phi_sin, y)

    def S_at(self, y):
        return _trig_eval(self.phi_cos, self.phi_sin, y, order=1)

    def S_prime_at(self, y):
        return _trig_eval(self.phi_cos, self.phi_sin, y, order=2)


class PhaseAccumulator:
    """Prefix integrals of cos/sin(k w_s) along one path, queryable at any t."""

    def __init__(self, b: ShearProfile, path: BrownianPath, nu: float):
        self.b = b
        self.path = path
        self.nu = nu
        k = b.wavenumbers
        w = np.sqrt(2.0 * nu) * path.W
        kw = np.multiply.outer(k.astype(float), w)   # (K+1, M+1)
        ds = path.times[1] - path.times[0]
        self._cum_cos = self._prefix_trapezoid(np.cos(kw), ds)
        self._cum_sin = self._prefix_trapezoid(np.sin(kw), ds)
        self._kw = kw
        self._ds = ds

    @staticmethod
    def _prefix_trapezoid(v: np.ndarray, ds: float) -> np.ndarray:
        out = np.zeros_like(v)
        out[:, 1:] = np.cumsum(0.5 * (v[:, 1:] + v[:, :-1]) * ds, axis=1)
        return out

    def _integrals_at(self, t: float):
        if t < 0 or t > self.path.horizon + 1e-12:
            raise ValueError(f"t={t} outside the path horizon {self.path.horizon}")
        pos = t / self._ds
        j = min(int(pos), self.path.n_steps)
        Ic = self._cum_cos[:, j].copy()
        Is = self._cum_sin[:, j].copy()
        frac = t - self.path.times[j]
        if frac > 0:
            # partial last step: linear interpolation of W, trapezoid in s
            wj = self._kw[:, j]
            wj1 = self._kw[:, min(j + 1, self.path.n_steps)]
            wt = wj + (wj1 - wj) * (frac / self._ds)
            Ic += 0.5 * (np.cos(wj) + np.cos(wt)) * frac
            Is += 0.5 * (np.sin(wj) + np.sin(wt)) * frac
        return Ic, Is

    def field_at(self, t: float, grid: PeriodicGrid1D) -> PhaseField:
        Ic, Is = self._integrals_at(t)
        a, s = self.b.harmonics(0)
        phi_cos = a * Ic + s * Is
        phi_sin = s * Ic - a * Is
        y = grid.nodes
        phi = _trig_eval(phi_cos, phi_sin, y)
        S = _trig_eval(phi_cos, phi_sin, y, order=1)
        return PhaseField(
            grid=grid, t=t, phi=phi, S=S, path_seed=self.path.seed, nu=self.nu,
            phi_cos=phi_cos, phi_sin=phi_sin,
        )


def compute_phase_field(b: ShearProfile, path: BrownianPath, nu: float,
                        t: float, grid: PeriodicGrid1D) -> PhaseField:
    """phi_t and S_t on the grid for a single (path, t); shared-omega contract."""
    if path.horizon + 1e-12 < t:
        raise ValueError(f"path horizon {path.horizon} shorter than t={t}")
    return PhaseAccumulator(b, path, nu).field_at(t, grid)


@dataclass
class SublevelReport:
    """Interval cover of the sublevel set A = {|S| <= c t^(1/(N+1))}."""

    c: float
    t: float
    threshold: float
    measure: float
    intervals: list            # [(a, b)] with a < b, b - a <= 2*pi, mod 2*pi
    cover_count: int
    complement: list           # intervals J with |S| > threshold


def sublevel_set(fieldv: PhaseField, c: float, N: int,
                 max_intervals: int | None = None) -> SublevelReport:
    """Resolve A = {|S| <= c t^(1/(N+1))} into a disjoint interval cover.

    Crossing points of |S| with the threshold are refined by root finding
    on the exact harmonic representation of S.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    t = fieldv.t
    thr = c * t ** (1.0 / (N + 1))
    y = fieldv.grid.nodes
    g = np.abs(fieldv.S) - thr
    mask = g <= 0.0

    if mask.all():
        return SublevelReport(c=c, t=t, threshold=thr, measure=TWO_PI,
                              intervals=[(0.0, TWO_PI)], cover_count=1,
                              complement=[])
    if not mask.any():
        return SublevelReport(c=c, t=t, threshold=thr, measure=0.0,
                              intervals=[], cover_count=0,
                              complement=[(0.0, TWO_PI)])

    n = len(y)
    h = TWO_PI / n

    def gfun(yy):
        return abs(fieldv.S_at(yy)) - thr

    # refine every sign change of g to a crossing point
    crossing_after = {}
    for j in range(n):
        j1 = (j + 1) % n
        if (g[j] <= 0) != (g[j1] <= 0):
            a, b = y[j], y[j] + h
            try:
                crossing_after[j] = brentq(gfun, a, b, xtol=1e-12)
            except ValueError:
                crossing_after[j] = a + h * g[j] / (g[j] - g[j1])

    # walk runs of the mask, using refined endpoints
    intervals = []
    idx = np.nonzero(mask.astype(int) - np.roll(mask, 1).astype(int) == 1)[0]
    for s_idx in idx:
        a = crossing_after.get((s_idx - 1) % n, y[s_idx])
        j = s_idx
        while mask[(j + 1) % n]:
            j += 1
        b = crossing_after.get(j % n, y[j % n] + h)
        if j >= n or b < a:
            b = b + TWO_PI if b < a else b
        intervals.append((a, b))

    if max_intervals is not None:
        while len(intervals) > max_intervals:
            gaps = [
                (intervals[(i + 1) % len(intervals)][0] - intervals[i][1]) % TWO_PI
                for i in range(len(intervals))
            ]
            i = int(np.argmin(gaps))
            j = (i + 1) % len(intervals)
            a = intervals[i][0]
            b = intervals[j][1]
            if b < a:
                b += TWO_PI
            merged = (a, b)
            keep = [intervals[k] for k in range(len(intervals)) if k not in (i, j)]
            intervals = keep + [merged]
            intervals.sort()

    measure = float(sum(b - a for a, b in intervals))
    complement = _complement_intervals(intervals)
    return SublevelReport(c=c, t=t, threshold=thr, measure=measure,
                          intervals=intervals, cover_count=len(intervals),
                          complement=complement)


def _complement_intervals(intervals):
    """Complement of a disjoint interval family on the torus."""
    if not intervals:
        return [(0.0, TWO_PI)]
    ivs = sorted((a % TWO_PI, a % TWO_PI + (b - a)) for a, b in intervals)
    comp = []
    for i, (a, b) in enumerate(ivs):
        nxt = ivs[(i + 1) % len(ivs)][0]
        start = b % TWO_PI
        length = (nxt - b) % TWO_PI
        if length > 1e-12:
            comp.append((start, start + length))
    return comp


def check_inverse_derivative_integral(fieldv: PhaseField,
                                      report: SublevelReport) -> float:
    """integral over J of |d/dy (1/S_t)|, exact on monotone pieces.

    On each maximal subinterval of J where S' has a fixed sign the integrand
    is a total derivative, so the integral telescopes to |1/S(b) - 1/S(a)|;
    S' zeros are located by root finding on the harmonic representation.
    """
    total = 0.0
    for a, b in report.complement:
        if b <= a:
            b += TWO_PI
        # breakpoints: zeros of S' inside (a, b)
        n_sub = max(64, int((b - a) / TWO_PI * 8 * len(fieldv.grid.nodes)))
        yy = np.linspace(a, b, n_sub)
        sp = fieldv.S_prime_at(yy)
        s_vals = fieldv.S_at(yy)
        if np.min(s_vals) < 0 < np.max(s_vals):
            raise LemmaViolationError(
                f"S_t changes sign inside complement interval ({a:.4f}, {b:.4f})"
            )
        breaks = [a]
        for j in range(n_sub - 1):
            if (sp[j] <= 0) != (sp[j + 1] <= 0):
                breaks.append(
                    brentq(fieldv.S_prime_at, yy[j], yy[j + 1], xtol=1e-12)
                )
        breaks.append(b)
        s_at_breaks = fieldv.S_at(np.asarray(breaks))
        inv = 1.0 / s_at_breaks
        total += float(np.sum(np.abs(np.diff(inv))))
    return total


def count_zeros_near_critical_points(fieldv: PhaseField,
                                     structure: CriticalStructure,
                                     delta: float, n_probe: int = 2048):
    """Sign-change counts of S_t (and S_t') within each ball B_{2 delta}(y_i)."""
    counts_s, counts_sp = [], []
    for y_i in structure.points:
        yy = np.linspace(y_i - 2 * delta, y_i + 2 * delta, n_probe)
        s = fieldv.S_at(yy)
        sp = fieldv.S_prime_at(yy)
        counts_s.append(int(np.count_nonzero(np.diff(np.sign(s)) != 0)))
        counts_sp.append(int(np.count_nonzero(np.diff(np.sign(sp)) != 0)))
    return counts_s, counts_sp


def calibrate_sublevel_constant(b: ShearProfile, structure: CriticalStructure,
                                delta: float, accumulators, t_values,
                                grid: PeriodicGrid1D, N: int | None = None) -> float:
    """Freeze c as half the pilot infimum of |S_t| t^(-1/(N+1)) away from
    the critical balls, so A_{t}(c) stays inside the balls on the pilot sweep."""
    N = N if N is not None else structure.max_order
    y = grid.nodes
    outside = np.ones(len(y), dtype=bool)
    for y_i in structure.points:
        outside &= torus_distance(y, y_i) >= 2 * delta
    inf_ratio = np.inf
    for acc in accumulators:
        for t in t_values:
            f = acc.field_at(t, grid)
            ratio = np.min(np.abs(f.S[outside])) * t ** (-1.0 / (N + 1))
            inf_ratio = min(inf_ratio, float(ratio))
    if not np.isfinite(inf_ratio) or inf_ratio <= 0:
        raise RuntimeError("calibration sweep produced no usable infimum")
    return 0.5 * inf_ratio
